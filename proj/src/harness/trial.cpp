#include "ame/harness/trial.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include <json.hpp>
#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

namespace ame::harness {

TrialMetrics compute_metrics(std::span<const TickRecord> log, sim::Vec2 start, double dt, double debounce) {
  if (log.empty()) {
    throw std::invalid_argument("compute_metrics: empty tick log");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("compute_metrics: dt must be > 0");
  }
  TrialMetrics m;
  m.completion_time = static_cast<double>(log.size()) * dt;

  const auto debounce_ticks = static_cast<std::int64_t>(std::ceil(debounce / dt - 1e-9));
  sim::Vec2 prev = start;
  double force_sum = 0.0;
  std::int64_t free_run = 0;
  bool any_collision = false;
  for (const auto& rec : log) {
    m.total_displacement += std::hypot(rec.state.x - prev.x, rec.state.y - prev.y);
    prev = rec.state.position();
    force_sum += rec.force.norm();
    if (rec.collision) {
      if (!any_collision || free_run >= debounce_ticks) {
        ++m.collisions;
      }
      any_collision = true;
      free_run = 0;
    } else {
      ++free_run;
    }
  }
  m.average_speed = m.total_displacement / m.completion_time;
  m.average_feedback_force = force_sum / static_cast<double>(log.size());
  return m;
}

TrialResult run_trial(const Scenario& scenario, Method method, const OperatorModel& op, const PipelineConfig& config,
                      std::uint64_t seed, const TickObserver& observer) {
  scenario.validate();
  TickLoop loop(scenario.world, config, method);
  ScriptedOperator driver(scenario.route, op, config.limits, seed);
  while (!loop.finished()) {
    loop.step(driver);
    if (observer) observer(loop);
  }
  TrialResult result;
  result.scenario = scenario.name;
  result.method = method;
  result.seed = seed;
  result.completed = loop.completed();
  result.ticks = loop.log();
  result.metrics = compute_metrics(result.ticks, scenario.world.start_pose.position(), config.dt(),
                                   config.collision_debounce);
  if (!result.completed) {
    spdlog::warn("trial {} / {} / seed {} did not finish within {} s", scenario.name, to_string(method), seed,
                 config.max_duration);
  }
  return result;
}

const MethodSummary* ComparisonReport::find(std::string_view scenario, Method method) const {
  for (const auto& s : summaries) {
    if (s.scenario == scenario && s.method == method) return &s;
  }
  return nullptr;
}

namespace {

constexpr std::string_view kPooled = "pooled";

MethodSummary summarize_trials(std::string_view scenario, Method method, const std::vector<const TrialResult*>& trials) {
  MethodSummary s;
  s.scenario = std::string(scenario);
  s.method = method;
  for (const auto* t : trials) {
    ++s.trials;
    s.dnf += t->completed ? 0 : 1;
    s.mean.completion_time += t->metrics.completion_time;
    s.mean.total_displacement += t->metrics.total_displacement;
    s.mean.average_speed += t->metrics.average_speed;
    s.mean_collisions += t->metrics.collisions;
    s.mean.average_feedback_force += t->metrics.average_feedback_force;
  }
  if (s.trials > 0) {
    const double n = s.trials;
    s.mean.completion_time /= n;
    s.mean.total_displacement /= n;
    s.mean.average_speed /= n;
    s.mean_collisions /= n;
    s.mean.average_feedback_force /= n;
  }
  return s;
}

double pct(double delta, double base) { return base != 0.0 ? 100.0 * delta / base : 0.0; }

PairedDelta paired_delta(std::string_view scenario, const std::vector<std::pair<const TrialResult*, const TrialResult*>>& pairs) {
  PairedDelta d;
  d.scenario = std::string(scenario);
  if (pairs.empty()) return d;
  double base_time = 0.0, base_disp = 0.0, base_speed = 0.0, base_coll = 0.0, base_force = 0.0;
  for (const auto& [a, g] : pairs) {
    d.completion_time += a->metrics.completion_time - g->metrics.completion_time;
    d.total_displacement += a->metrics.total_displacement - g->metrics.total_displacement;
    d.average_speed += a->metrics.average_speed - g->metrics.average_speed;
    d.collisions += a->metrics.collisions - g->metrics.collisions;
    d.average_feedback_force += a->metrics.average_feedback_force - g->metrics.average_feedback_force;
    base_time += g->metrics.completion_time;
    base_disp += g->metrics.total_displacement;
    base_speed += g->metrics.average_speed;
    base_coll += g->metrics.collisions;
    base_force += g->metrics.average_feedback_force;
  }
  const double n = static_cast<double>(pairs.size());
  d.completion_time /= n;
  d.total_displacement /= n;
  d.average_speed /= n;
  d.collisions /= n;
  d.average_feedback_force /= n;
  d.completion_time_pct = pct(d.completion_time, base_time / n);
  d.total_displacement_pct = pct(d.total_displacement, base_disp / n);
  d.average_speed_pct = pct(d.average_speed, base_speed / n);
  d.collisions_pct = pct(d.collisions, base_coll / n);
  d.average_feedback_force_pct = pct(d.average_feedback_force, base_force / n);
  return d;
}

}  // namespace

void summarize(ComparisonReport& report) {
  report.summaries.clear();
  report.deltas.clear();
  std::vector<std::string> scenarios;
  for (const auto& t : report.trials) {
    if (std::find(scenarios.begin(), scenarios.end(), t.scenario) == scenarios.end()) {
      scenarios.push_back(t.scenario);
    }
  }

  auto collect = [&](std::string_view scenario, Method method) {
    std::vector<const TrialResult*> out;
    for (const auto& t : report.trials) {
      if (t.method == method && (scenario == kPooled || t.scenario == scenario)) out.push_back(&t);
    }
    return out;
  };
  auto pairs_for = [&](std::string_view scenario) {
    std::vector<std::pair<const TrialResult*, const TrialResult*>> out;
    for (const auto& a : report.trials) {
      if (a.method != Method::Amgpf || (scenario != kPooled && a.scenario != scenario)) continue;
      for (const auto& g : report.trials) {
        if (g.method == Method::Gpf && g.scenario == a.scenario && g.seed == a.seed) {
          out.emplace_back(&a, &g);
          break;
        }
      }
    }
    return out;
  };

  std::vector<std::string> rows = scenarios;
  if (scenarios.size() > 1) rows.emplace_back(kPooled);
  for (const auto& row : rows) {
    for (Method method : {Method::Amgpf, Method::Gpf}) {
      const auto trials = collect(row, method);
      if (!trials.empty()) report.summaries.push_back(summarize_trials(row, method, trials));
    }
    report.deltas.push_back(paired_delta(row, pairs_for(row)));
  }
}

ComparisonReport compare_methods(std::span<const Scenario> scenarios, const OperatorModel& op,
                                 const PipelineConfig& config, const CompareOptions& options) {
  if (scenarios.empty()) {
    throw std::invalid_argument("compare_methods: at least one scenario required");
  }
  if (options.seeds.empty()) {
    throw std::invalid_argument("compare_methods: at least one seed required");
  }
  ComparisonReport report;
  for (const auto& scenario : scenarios) {
    for (std::uint64_t seed : options.seeds) {
      for (Method method : {Method::Amgpf, Method::Gpf}) {
        if (options.cancel != nullptr && options.cancel->load()) {
          report.interrupted = true;
          summarize(report);
          return report;
        }
        TrialResult result = run_trial(scenario, method, op, config, seed);
        result.ticks.clear();
        result.ticks.shrink_to_fit();
        if (options.on_trial) options.on_trial(result);
        report.trials.push_back(std::move(result));
      }
    }
  }
  summarize(report);
  return report;
}

void write_ticks_csv(std::ostream& out, std::span<const TickRecord> ticks) {
  out << "tick,time,x,y,theta,v,omega,axis_forward,axis_angular,cmd_forward,cmd_angular,"
         "force_forward,force_lateral,force_norm,r_total,r_total_baseline,collision,visible_cells,"
         "map_mean,map_max,dwells_done,obstacles\n";
  for (const auto& r : ticks) {
    std::string obstacles;
    for (const auto& o : r.force.per_obstacle) {
      if (!obstacles.empty()) obstacles += ';';
      obstacles += fmt::format("{}:{}:{}:{}:{}:{}:{}", o.obstacle_id, o.distance, o.closing_speed, o.repulsion,
                               o.attentiveness, o.attn_repulsion, o.weight);
    }
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.tick, r.time,
                       r.state.x, r.state.y, r.state.theta, r.state.v, r.state.omega, r.axes.forward,
                       r.axes.angular, r.command.forward, r.command.angular, r.force.forward, r.force.lateral,
                       r.force.norm(), r.force.magnitude, r.baseline_magnitude, r.collision ? 1 : 0,
                       r.visible_cells, r.map_mean, r.map_max, r.dwells_done, obstacles);
  }
}

std::string metrics_json(const TrialResult& result) {
  nlohmann::json j;
  j["scenario"] = result.scenario;
  j["method"] = std::string(to_string(result.method));
  j["seed"] = result.seed;
  j["completed"] = result.completed;
  j["ticks"] = result.ticks.size();
  j["metrics"] = {
      {"completion_time", result.metrics.completion_time},
      {"total_displacement", result.metrics.total_displacement},
      {"average_speed", result.metrics.average_speed},
      {"collisions", result.metrics.collisions},
      {"average_feedback_force", result.metrics.average_feedback_force},
  };
  return j.dump(2) + "\n";
}

void write_report_csv(std::ostream& out, const ComparisonReport& report) {
  out << "scenario,method,trials,dnf,completion_time,total_displacement,average_speed,collisions,"
         "average_feedback_force\n";
  for (const auto& s : report.summaries) {
    out << fmt::format("{},{},{},{},{},{},{},{},{}\n", s.scenario, to_string(s.method), s.trials, s.dnf,
                       s.mean.completion_time, s.mean.total_displacement, s.mean.average_speed, s.mean_collisions,
                       s.mean.average_feedback_force);
  }
}

void write_trials_header(std::ostream& out) {
  out << "scenario,method,seed,completed,completion_time,total_displacement,average_speed,collisions,"
         "average_feedback_force\n";
}

void write_trial_row(std::ostream& out, const TrialResult& t) {
  out << fmt::format("{},{},{},{},{},{},{},{},{}\n", t.scenario, to_string(t.method), t.seed, t.completed ? 1 : 0,
                     t.metrics.completion_time, t.metrics.total_displacement, t.metrics.average_speed,
                     t.metrics.collisions, t.metrics.average_feedback_force);
}

void write_trials_csv(std::ostream& out, const ComparisonReport& report) {
  write_trials_header(out);
  for (const auto& t : report.trials) write_trial_row(out, t);
}

std::string summary_text(const ComparisonReport& report) {
  std::string out;
  out += fmt::format("trials: {}{}\n\n", report.trials.size(), report.interrupted ? " (interrupted, partial)" : "");
  out += fmt::format("{:<24} {:<6} {:>6} {:>4} {:>10} {:>10} {:>8} {:>8} {:>9}\n", "scenario", "method", "trials",
                     "dnf", "time[s]", "dist[m]", "v[m/s]", "coll", "force[N]");
  for (const auto& s : report.summaries) {
    out += fmt::format("{:<24} {:<6} {:>6} {:>4} {:>10.3f} {:>10.3f} {:>8.3f} {:>8.3f} {:>9.3f}\n", s.scenario,
                       to_string(s.method), s.trials, s.dnf, s.mean.completion_time, s.mean.total_displacement,
                       s.mean.average_speed, s.mean_collisions, s.mean.average_feedback_force);
  }
  out += "\npaired deltas (amgpf - gpf, percent of gpf mean)\n";
  for (const auto& d : report.deltas) {
    out += fmt::format(
        "{:<24} time {:+.3f} s ({:+.1f}%)  dist {:+.3f} m ({:+.1f}%)  speed {:+.3f} m/s ({:+.1f}%)  "
        "coll {:+.3f} ({:+.1f}%)  force {:+.3f} N ({:+.1f}%)\n",
        d.scenario, d.completion_time, d.completion_time_pct, d.total_displacement, d.total_displacement_pct,
        d.average_speed, d.average_speed_pct, d.collisions, d.collisions_pct, d.average_feedback_force,
        d.average_feedback_force_pct);
  }
  return out;
}

}  // namespace ame::harness
