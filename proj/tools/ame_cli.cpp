#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ame/common/codec.hpp"
#include "ame/config/run_config.hpp"
#include "ame/harness/trial.hpp"
#include "ame/mapping/mapping.hpp"
#include "ame/sim/world_io.hpp"

#ifndef AME_WORLDS_DIR
#define AME_WORLDS_DIR "worlds"
#endif

namespace fs = std::filesystem;
using ame::config::ConfigError;
using ame::config::RunConfig;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDnf = 3;
constexpr int kExitInterrupted = 130;
constexpr int kStripCellPixels = 4;

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

/// Uniform failure line: error[<class>]: <message>
int fail(std::string_view kind, std::string_view message, int code) {
  std::string line(message);
  for (char& c : line) {
    if (c == '\n') c = ' ';
  }
  std::cerr << "error[" << kind << "]: " << line << "\n";
  return code;
}

struct CommonOptions {
  std::string config_path;
  std::string world;
  std::string method;
  std::string out;
  std::vector<std::string> overrides;
  std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "JSON run config");
  cmd->add_option("--world", opts.world, "world file");
  cmd->add_option("--method", opts.method, "amgpf or gpf");
  cmd->add_option("--seed", opts.seed, "operator noise seed");
  cmd->add_option("--out", opts.out, "output directory");
  cmd->add_option("--override", opts.overrides, "dotted.key=value, repeatable");
}

RunConfig resolve(const CommonOptions& opts) {
  std::vector<std::string> overrides;
  auto quoted = [](const std::string& text) { return nlohmann::json(text).dump(); };
  if (!opts.world.empty()) overrides.push_back("world=" + quoted(opts.world));
  if (!opts.method.empty()) overrides.push_back("method=" + quoted(opts.method));
  if (!opts.out.empty()) overrides.push_back("out=" + quoted(opts.out));
  if (opts.seed >= 0) overrides.push_back("seed=" + std::to_string(opts.seed));
  overrides.insert(overrides.end(), opts.overrides.begin(), opts.overrides.end());
  return ame::config::load(opts.config_path, overrides);
}

ame::sim::World load_world_or_config_error(const std::string& path) {
  if (path.empty()) {
    throw ConfigError("config: no world file given (use --world or the 'world' key)");
  }
  try {
    return ame::sim::load_world(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

ame::RgbImage strip_image(const std::vector<ame::RgbImage>& frames) {
  if (frames.empty()) return {};
  const int w = frames.front().width() * kStripCellPixels;
  const int h = frames.front().height() * kStripCellPixels;
  const int n = static_cast<int>(frames.size());
  ame::RgbImage out(n * (w + 1) - 1, h, ame::Rgb{255, 255, 255});
  for (int k = 0; k < n; ++k) {
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        out(k * (w + 1) + u, v) = frames[k](u / kStripCellPixels, v / kStripCellPixels);
      }
    }
  }
  return out;
}

int cmd_run(const CommonOptions& opts) {
  RunConfig cfg = resolve(opts);
  auto world = load_world_or_config_error(cfg.world);
  ame::harness::Scenario scenario;
  try {
    scenario = ame::harness::make_scenario(std::move(world));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const fs::path out_dir = cfg.out;
  fs::create_directories(out_dir);

  std::vector<ame::RgbImage> snapshots;
  ame::harness::TickObserver observer;
  if (cfg.snapshot_every > 0) {
    observer = [&](const ame::harness::TickLoop& loop) {
      if (loop.tick() % cfg.snapshot_every == 0) {
        snapshots.push_back(ame::heatmap(loop.map().raster(), 0.0, 1.0));
      }
    };
  }
  const auto result =
      ame::harness::run_trial(scenario, cfg.method, cfg.op, cfg.pipeline, cfg.seed, observer);

  {
    std::ofstream ticks(out_dir / "ticks.csv", std::ios::binary);
    ame::harness::write_ticks_csv(ticks, result.ticks);
  }
  write_text(out_dir / "metrics.json", ame::harness::metrics_json(result));
  write_text(out_dir / "config.json", ame::config::to_json(cfg).dump(2) + "\n");
  if (!snapshots.empty()) {
    ame::write_png(out_dir / "attentiveness_strip.png", strip_image(snapshots));
  }
  const auto& m = result.metrics;
  std::cout << scenario.name << " " << ame::harness::to_string(cfg.method) << " seed " << cfg.seed
            << (result.completed ? " completed" : " DNF") << ": time " << m.completion_time << " s, distance "
            << m.total_displacement << " m, speed " << m.average_speed << " m/s, collisions " << m.collisions
            << ", force " << m.average_feedback_force << " N\n";
  if (!result.completed) {
    return fail("dnf", "trial did not reach the goal within " + std::to_string(cfg.pipeline.max_duration) + " s",
                kExitDnf);
  }
  return kExitOk;
}

int cmd_compare(const CommonOptions& opts, const std::vector<std::string>& scenario_files,
                const std::vector<std::uint64_t>& seeds, const std::string& worlds_dir) {
  RunConfig cfg = resolve(opts);
  std::vector<std::string> files = scenario_files;
  if (files.empty()) files = cfg.scenarios;
  if (files.empty()) {
    for (const auto& p : ame::harness::shipped_scenario_files(worlds_dir)) files.push_back(p.string());
  }
  if (!seeds.empty()) cfg.seeds = seeds;

  std::vector<ame::harness::Scenario> scenarios;
  for (const auto& f : files) {
    try {
      scenarios.push_back(ame::harness::make_scenario(load_world_or_config_error(f)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }

  const fs::path out_dir = cfg.out;
  fs::create_directories(out_dir);
  std::ofstream trials_stream(out_dir / "trials.csv", std::ios::binary);
  ame::harness::write_trials_header(trials_stream);

  ame::harness::CompareOptions options;
  options.seeds = cfg.seeds;
  options.cancel = &g_interrupted;
  options.on_trial = [&](const ame::harness::TrialResult& t) {
    ame::harness::write_trial_row(trials_stream, t);
    trials_stream.flush();
    spdlog::info("{} {} seed {}: {} s, {} N", t.scenario, ame::harness::to_string(t.method), t.seed,
                 t.metrics.completion_time, t.metrics.average_feedback_force);
  };
  std::signal(SIGINT, on_sigint);
  std::signal(SIGTERM, on_sigint);
  const auto report = ame::harness::compare_methods(scenarios, cfg.op, cfg.pipeline, options);
  trials_stream.close();
  {
    std::ofstream csv(out_dir / "report.csv", std::ios::binary);
    ame::harness::write_report_csv(csv, report);
  }
  const std::string summary = ame::harness::summary_text(report);
  write_text(out_dir / "summary.txt", summary);
  std::cout << summary;
  if (report.interrupted) {
    return fail("interrupted", "compare stopped after " + std::to_string(report.trials.size()) +
                                   " trials; partial results written to " + out_dir.string(),
                kExitInterrupted);
  }
  return kExitOk;
}

class HoldStill final : public ame::harness::CommandSource {
 public:
  ame::sim::AxisPair axes(const ame::harness::TickContext&) override { return {}; }
};

int cmd_debug_frame(const CommonOptions& opts, std::optional<double> x, std::optional<double> y,
                    std::optional<double> theta) {
  RunConfig cfg = resolve(opts);
  auto world = load_world_or_config_error(cfg.world);
  if (x) world.start_pose.x = *x;
  if (y) world.start_pose.y = *y;
  if (theta) world.start_pose.theta = ame::sim::normalize_angle(*theta);
  if (!world.bounds.contains(world.start_pose.x, world.start_pose.y)) {
    throw ConfigError("debug-frame: pose (" + std::to_string(world.start_pose.x) + ", " +
                      std::to_string(world.start_pose.y) + ") lies outside the world bounds");
  }
  ame::harness::TickLoop loop(world, cfg.pipeline, cfg.method);
  HoldStill still;
  loop.step(still);

  const auto& p = loop.perception();
  const auto& cam = cfg.pipeline.camera;
  const fs::path out_dir = cfg.out;
  fs::create_directories(out_dir);
  ame::write_png(out_dir / "rgb.png", p.frame.rgb);
  ame::write_png(out_dir / "depth.png", ame::to_gray(p.frame.depth, cam.z_near, cam.z_far));
  ame::write_png(out_dir / "saliency_image.png", ame::to_gray(p.image_saliency.scores, 0.0, 255.0));
  ame::write_png(out_dir / "saliency_depth.png", ame::to_gray(p.depth_saliency.scores, 0.0, 255.0));
  ame::write_png(out_dir / "saliency_fused.png", ame::to_gray(p.fused.scores, 0.0, 255.0));
  ame::write_png(out_dir / "topdown_saliency.png", ame::heatmap(ame::mapping::topdown_raster(p.topdown), 0.0, 255.0));
  ame::write_png(out_dir / "attentiveness.png", ame::heatmap(loop.map().raster(), 0.0, 1.0));
  std::cout << "wrote 7 images to " << out_dir.string() << " (" << p.topdown.cells.size() << " visible cells)\n";
  return kExitOk;
}

int cmd_validate(const CommonOptions& opts) {
  RunConfig cfg = resolve(opts);
  if (!cfg.world.empty()) {
    auto world = load_world_or_config_error(cfg.world);
    try {
      (void)ame::harness::make_scenario(std::move(world));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  std::cout << ame::config::to_json(cfg).dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attentiveness-map haptic feedback simulator"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off");

  CommonOptions run_opts, compare_opts, frame_opts, validate_opts;
  auto* run = app.add_subcommand("run", "run one scripted trial");
  add_common(run, run_opts);

  auto* compare = app.add_subcommand("compare", "paired amgpf / gpf trials over scenarios and seeds");
  add_common(compare, compare_opts);
  std::vector<std::string> scenario_files;
  std::vector<std::uint64_t> seeds;
  std::string worlds_dir = AME_WORLDS_DIR;
  compare->add_option("--scenario", scenario_files, "world file, repeatable (default: shipped corridors)");
  compare->add_option("--seeds", seeds, "seed list")->delimiter(',');
  compare->add_option("--worlds-dir", worlds_dir, "directory holding the shipped corridors");

  auto* frame = app.add_subcommand("debug-frame", "dump every pipeline stage for one tick at a pose");
  add_common(frame, frame_opts);
  std::optional<double> px, py, ptheta;
  frame->add_option("--x", px, "robot x [m]");
  frame->add_option("--y", py, "robot y [m]");
  frame->add_option("--theta", ptheta, "robot heading [rad]");

  auto* validate = app.add_subcommand("validate", "check a config (and its world) and print the resolved config");
  add_common(validate, validate_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), kExitConfig);
  }
  spdlog::set_default_logger(spdlog::stderr_color_st("ame"));
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*run) return cmd_run(run_opts);
    if (*compare) return cmd_compare(compare_opts, scenario_files, seeds, worlds_dir);
    if (*frame) return cmd_debug_frame(frame_opts, px, py, ptheta);
    if (*validate) return cmd_validate(validate_opts);
  } catch (const ConfigError& e) {
    return fail("config", e.what(), kExitConfig);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), kExitRuntime);
  }
  return kExitRuntime;
}
