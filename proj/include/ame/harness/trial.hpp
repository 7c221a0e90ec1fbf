#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ame/harness/operator.hpp"
#include "ame/harness/pipeline.hpp"
#include "ame/harness/scenario.hpp"

namespace ame::harness {

struct TrialMetrics {
  double completion_time = 0.0;       ///< [s]
  double total_displacement = 0.0;    ///< [m]
  double average_speed = 0.0;         ///< [m/s]
  int collisions = 0;                 ///< debounced events
  double average_feedback_force = 0.0;  ///< [N]

  friend bool operator==(const TrialMetrics&, const TrialMetrics&) = default;
};

/// Metrics of a tick log that started at `start`. A new collision event needs
/// at least `debounce` seconds of collision-free ticks since the previous one.
/// Throws std::invalid_argument on an empty log.
[[nodiscard]] TrialMetrics compute_metrics(std::span<const TickRecord> log, sim::Vec2 start, double dt,
                                           double debounce);

struct TrialResult {
  std::string scenario;
  Method method = Method::Amgpf;
  std::uint64_t seed = 0;
  bool completed = false;  ///< false means DNF (timed out); metrics cover the run up to the timeout
  TrialMetrics metrics;
  std::vector<TickRecord> ticks;
};

/// Called every `snapshot_every` ticks with the live loop (optional).
using TickObserver = std::function<void(const TickLoop&)>;

[[nodiscard]] TrialResult run_trial(const Scenario& scenario, Method method, const OperatorModel& op,
                                    const PipelineConfig& config, std::uint64_t seed,
                                    const TickObserver& observer = {});

struct MethodSummary {
  std::string scenario;  ///< "pooled" for the cross-scenario row
  Method method = Method::Amgpf;
  int trials = 0;
  int dnf = 0;
  TrialMetrics mean;  ///< collisions mean is in `mean_collisions`
  double mean_collisions = 0.0;
};

struct PairedDelta {
  std::string scenario;
  double completion_time = 0.0;  ///< mean of (amgpf - gpf) over paired trials
  double total_displacement = 0.0;
  double average_speed = 0.0;
  double collisions = 0.0;
  double average_feedback_force = 0.0;
  double completion_time_pct = 0.0;  ///< 100 * delta / gpf mean
  double total_displacement_pct = 0.0;
  double average_speed_pct = 0.0;
  double collisions_pct = 0.0;
  double average_feedback_force_pct = 0.0;
};

struct ComparisonReport {
  std::vector<TrialResult> trials;     ///< tick logs dropped; metrics only
  std::vector<MethodSummary> summaries;  ///< per scenario, then pooled when more than one scenario
  std::vector<PairedDelta> deltas;     ///< same order as the scenario rows, pooled last
  bool interrupted = false;

  [[nodiscard]] const MethodSummary* find(std::string_view scenario, Method method) const;
};

struct CompareOptions {
  std::vector<std::uint64_t> seeds{1, 2, 3};
  const std::atomic<bool>* cancel = nullptr;  ///< checked between trials
  std::function<void(const TrialResult&)> on_trial;
};

/// Paired A/B over every (scenario, seed): amgpf then gpf with the same seed and operator.
[[nodiscard]] ComparisonReport compare_methods(std::span<const Scenario> scenarios, const OperatorModel& op,
                                               const PipelineConfig& config, const CompareOptions& options);

/// Summaries and deltas recomputed from trial metrics (used for partial reports too).
void summarize(ComparisonReport& report);

void write_ticks_csv(std::ostream& out, std::span<const TickRecord> ticks);
[[nodiscard]] std::string metrics_json(const TrialResult& result);
void write_report_csv(std::ostream& out, const ComparisonReport& report);
void write_trials_header(std::ostream& out);
void write_trial_row(std::ostream& out, const TrialResult& trial);
void write_trials_csv(std::ostream& out, const ComparisonReport& report);
[[nodiscard]] std::string summary_text(const ComparisonReport& report);

}  // namespace ame::harness
