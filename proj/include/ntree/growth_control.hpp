#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ntree/dataset.hpp"

namespace ntree {

/// Patterns grouped by (predicted class, true class).
struct ConfusionGroups {
  std::size_t dimension = 0;
  /// points[predicted][truth] holds the feature vectors of that group.
  std::array<std::array<std::vector<std::vector<double>>, 2>, 2> points;
  std::array<std::array<std::optional<std::vector<double>>, 2>, 2> centroids;

  std::size_t count(Label predicted, Label truth) const {
    return points[predicted][truth].size();
  }
};

inline constexpr double kDefaultDistanceFloor = 1e-9;

ConfusionGroups confusion_groups(const Dataset& data, std::span<const Label> predictions);

/// J_k for predicted side k: mean over the patterns predicted as k of the
/// summed inverse per-component distance to the centroid of the other true
/// class within that side. Zero when either centroid is missing.
double j_component(const ConfusionGroups& groups, Label k, double floor = kDefaultDistanceFloor);

/// J_c = J_0 + J_1.
double j_c(const Dataset& data, std::span<const Label> predictions,
           double floor = kDefaultDistanceFloor);
double j_c(const ConfusionGroups& groups, double floor = kDefaultDistanceFloor);

/// Reference value of J_c before training, from the true-class centroids.
/// Throws Error("one-class") when a class is absent.
double j_initial(const Dataset& data, double floor = kDefaultDistanceFloor);

/// Complexity budget from the "about W/eps examples" lower bound: p eps / (d + 1).
double c_max_lower(double p, double epsilon, std::size_t dimension);

/// Budget corrected by one round of the upper bound
/// p' = C (d + 1) / eps * log(C / eps), i.e. C0 * log(C0 / eps).
/// Throws Error("degenerate-bound") when C0 / eps <= 1.
double c_max_heuristic(double p, double epsilon, std::size_t dimension, double log_base = 10.0);

/// Peak threshold multiplier: C_max - c while c <= C_max, 0 afterwards.
double lambda_schedule(double complexity, double c_max);

/// Merit of a network with generalization g and complexity c.
double merit(double g, double complexity, double g_max, double c_max);

struct GrowthConfig {
  double epsilon = 0.1;
  double g_max = 0.9;
  double c_max = 1.0;
  bool use_heuristic = false;
  double log_base = 10.0;
  double distance_floor = kDefaultDistanceFloor;
  double validation_fraction = 0.1;
  /// Measure G on the test part during growth instead of a validation split.
  bool g_on_test = false;

  /// Sets g_max = 1 - epsilon and c_max from p and d.
  static GrowthConfig make(double epsilon, double p, std::size_t dimension, bool use_heuristic,
                           double log_base = 10.0);
  /// Recomputes c_max for a training part of p patterns.
  GrowthConfig with_training_size(double p, std::size_t dimension) const;
  void validate() const;
};

struct TraceRecord {
  std::size_t level = 0;
  std::size_t units = 0;
  double j_c = 0.0;
  std::optional<double> lambda;
  std::optional<double> threshold;
  std::optional<double> g;
  std::optional<double> merit;
  bool peak = false;
  bool stopped = false;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct GrowthState {
  double j_initial = 0.0;
  std::vector<TraceRecord> trace;
  std::optional<double> best_merit;
  std::optional<std::size_t> best_level;
  bool stopped = false;
  std::optional<std::size_t> stop_level;
};

/// What the caller should do after an observation.
enum class GrowthDecision {
  kContinue,
  kContinueNewBest,  // a peak improved the merit; snapshot this level
  kStop,             // roll back to state.stop_level
};

/// Records one completed level and applies the peak / merit rule.
GrowthDecision controller_observe(GrowthState& state, const GrowthConfig& config,
                                  std::size_t level, std::size_t complexity, double jc, double g);

}  // namespace ntree
