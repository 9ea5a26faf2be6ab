#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ntree/dataset.hpp"
#include "ntree/growth_control.hpp"
#include "ntree/perceptron.hpp"
#include "ntree/tree.hpp"

namespace ntree {

enum class Mode { kBaseline, kCriterion, kCriterionHeuristic };

std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view text);

struct RunResult {
  std::string dataset;
  Mode mode = Mode::kBaseline;
  std::size_t partition = 0;
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  std::size_t units = 0;
  double generalization = 0.0;
  std::optional<double> epsilon_target;
  std::vector<TraceRecord> jc_trace;
  double wall_time = 0.0;  // seconds
};

/// A run plus the classifier it produced.
struct RunOutcome {
  RunResult result;
  NeuralTree tree;
  GrowthState state;
};

/// Grows to exhaustion on `train`, records J_c per level, tests on `test`.
RunOutcome run_baseline(const Dataset& train, const Dataset& test, const PocketConfig& pocket);

/// Grows level by level under the growth controller and reports the
/// best-merit snapshot. `growth.c_max` must already match the training size.
RunOutcome run_criterion(const Dataset& train, const Dataset& test, const PocketConfig& pocket,
                         const GrowthConfig& growth);

/// Stratified seeded split of `train` into (grow, validation) parts.
std::pair<Dataset, Dataset> validation_split(const Dataset& train, double fraction,
                                             std::uint64_t seed);

struct ExperimentReport {
  std::string dataset;
  Mode mode = Mode::kBaseline;
  std::optional<double> epsilon_target;
  double mean_units = 0.0;
  double std_units = 0.0;
  double mean_generalization_pct = 0.0;
  double std_generalization_pct = 0.0;
  std::size_t run_count = 0;
};

struct Experiment {
  ExperimentReport report;
  std::vector<RunResult> runs;  // ordered by (partition, repeat)
};

struct ExperimentOptions {
  Mode mode = Mode::kBaseline;
  PocketConfig pocket;               // seed is replaced per job
  std::optional<GrowthConfig> growth;  // c_max is recomputed per job
  std::size_t workers = 1;
};

Experiment run_experiment(const Dataset& data, const CvPlan& plan, const ExperimentOptions& options);

/// Means and sample (n - 1) standard deviations; std is 0 for a single run.
ExperimentReport aggregate(const std::vector<RunResult>& results);

struct Tables {
  std::string markdown;
  std::string csv;
};

Tables emit_tables(const std::vector<ExperimentReport>& reports);

std::string runs_csv(const std::vector<RunResult>& runs);
std::string trace_csv(const std::vector<TraceRecord>& trace);
std::string trace_file_name(const RunResult& run);

}  // namespace ntree
