#include "ame/harness/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ame::harness {

std::string_view to_string(Method method) { return method == Method::Amgpf ? "amgpf" : "gpf"; }

Method parse_method(std::string_view text) {
  if (text == "amgpf") return Method::Amgpf;
  if (text == "gpf") return Method::Gpf;
  throw std::invalid_argument("unknown method '" + std::string(text) + "' (expected amgpf or gpf)");
}

void PipelineConfig::validate() const {
  sim::CameraModel probe{camera, {}};
  probe.validate();
  saliency.validate();
  memory.validate();
  field.validate();
  mapping::GridSpec{grid_resolution, 0.0, 0.0, 1, 1}.validate();
  if (pixel_stride < 1) throw std::invalid_argument("mapping: pixel stride must be >= 1");
  if (!(ground_tolerance >= 0.0)) throw std::invalid_argument("mapping: ground tolerance must be >= 0");
  if (!(limits.v_max > 0.0 && limits.omega_max > 0.0)) {
    throw std::invalid_argument("robot: velocity limits must be > 0");
  }
  if (!(deadband >= 0.0 && deadband < 1.0)) throw std::invalid_argument("robot: deadband must be in [0, 1)");
  if (!(tracking_gain > 0.0)) throw std::invalid_argument("robot: tracking gain must be > 0");
  if (!(sensing_radius > 0.0)) throw std::invalid_argument("robot: sensing radius must be > 0");
  if (!(tick_rate > 0.0)) throw std::invalid_argument("loop: tick rate must be > 0");
  if (!(max_duration > 0.0)) throw std::invalid_argument("loop: max duration must be > 0");
  if (!(collision_debounce >= 0.0)) throw std::invalid_argument("loop: collision debounce must be >= 0");
}

bool TrialBook::all_dwells_done() const {
  return std::all_of(dwell_done.begin(), dwell_done.end(), [](bool done) { return done; });
}

TickLoop::TickLoop(sim::World world, PipelineConfig config, Method method)
    : world_(std::move(world)), config_(std::move(config)), method_(method) {
  world_.validate();
  config_.validate();
  grid_ = mapping::GridSpec::covering(world_.bounds, config_.grid_resolution);
  map_ = memory::AttentivenessMap(grid_);
  state_ = world_.start_pose;
  state_.v = 0.0;
  state_.omega = 0.0;
  prev_state_ = state_;
  book_.dwell_timers.assign(world_.working_areas.size(), 0.0);
  book_.dwell_done.assign(world_.working_areas.size(), false);
}

bool TickLoop::timed_out() const {
  const auto limit = static_cast<std::int64_t>(std::llround(config_.max_duration * config_.tick_rate));
  return tick_ >= limit;
}

const TickRecord& TickLoop::step(CommandSource& source) {
  if (finished()) {
    throw std::logic_error("TickLoop::step called after the trial finished");
  }
  const double dt = config_.dt();
  const double time = static_cast<double>(tick_) * dt;

  sim::CameraMount mount = config_.mount;
  mount.yaw_offset += source.head_yaw(time);
  const auto camera = sim::make_camera(config_.camera, state_, mount);
  perception_.frame = sim::render_rgbd(world_, camera, tick_);
  perception_.image_saliency = saliency::image_saliency(perception_.frame.rgb, config_.saliency);
  perception_.image_saliency.tick = tick_;
  perception_.depth_saliency =
      saliency::depth_saliency(perception_.frame.depth, config_.camera.z_near, config_.camera.z_far);
  perception_.depth_saliency.tick = tick_;
  perception_.fused = saliency::fuse_saliency(perception_.image_saliency, perception_.depth_saliency,
                                              config_.saliency.k_image, config_.saliency.k_depth);
  perception_.fused.tick = tick_;
  const mapping::ProjectionParams projection{state_.body_height, config_.pixel_stride, config_.ground_tolerance};
  perception_.topdown = mapping::project_visible_cells(perception_.frame, perception_.fused, grid_, projection);
  perception_.topdown.tick = tick_;
  map_ = memory::update(std::move(map_), perception_.topdown, config_.memory);

  perception_.observations = sim::observe_obstacles(world_, state_, prev_state_, dt, config_.sensing_radius);
  auto baseline = haptics::gpf_baseline(perception_.observations, config_.field, state_);
  const double baseline_magnitude = baseline.magnitude;
  auto force = method_ == Method::Amgpf
                   ? haptics::total_repulsion(perception_.observations, map_, config_.field, state_)
                   : std::move(baseline);

  const TickContext context{tick_, time, state_, force, book_};
  const sim::AxisPair axes = source.axes(context);
  const sim::VelocityCommand command = sim::shape_command(axes, config_.deadband, config_.limits);
  const sim::RobotState candidate = sim::step_robot(state_, command, dt, config_.tracking_gain);
  const bool collision = sim::check_collision(world_, candidate);

  prev_state_ = state_;
  if (collision) {
    state_.v = 0.0;
    state_.omega = 0.0;
  } else {
    state_ = candidate;
  }

  int dwells_done = 0;
  for (std::size_t k = 0; k < world_.working_areas.size(); ++k) {
    const auto& wa = world_.working_areas[k];
    if (wa.area.contains(state_.x, state_.y)) {
      book_.dwell_timers[k] += dt;
      if (book_.dwell_timers[k] >= wa.dwell_seconds - 1e-9) {
        book_.dwell_done[k] = true;
      }
    } else {
      book_.dwell_timers[k] = 0.0;
    }
    dwells_done += book_.dwell_done[k] ? 1 : 0;
  }
  if (book_.all_dwells_done() && world_.goal.contains(state_.x, state_.y)) {
    book_.goal_reached = true;
  }

  TickRecord record;
  record.tick = tick_;
  record.time = static_cast<double>(tick_ + 1) * dt;
  record.state = state_;
  record.axes = axes;
  record.command = command;
  record.force = std::move(force);
  record.baseline_magnitude = baseline_magnitude;
  record.collision = collision;
  record.visible_cells = perception_.topdown.cells.size();
  record.map_mean = map_.mean();
  record.map_max = map_.max();
  record.dwells_done = dwells_done;
  log_.push_back(std::move(record));
  ++tick_;
  return log_.back();
}

}  // namespace ame::harness
