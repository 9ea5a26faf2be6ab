#include "ntree/growth_control.hpp"

#include <cmath>

#include "ntree/error.hpp"
#include "ntree/exact_sum.hpp"

namespace ntree {

ConfusionGroups confusion_groups(const Dataset& data, std::span<const Label> predictions) {
  if (predictions.size() != data.size()) {
    throw Error("length-mismatch", std::to_string(predictions.size()) + " predictions for " +
                                       std::to_string(data.size()) + " patterns");
  }
  ConfusionGroups groups;
  groups.dimension = data.dimension();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Label predicted = predictions[i];
    if (predicted != 0 && predicted != 1) throw Error("invalid-label", "prediction must be 0 or 1");
    groups.points[predicted][data[i].label].push_back(data[i].features);
  }
  for (Label k = 0; k < 2; ++k) {
    for (Label l = 0; l < 2; ++l) {
      const auto& pts = groups.points[k][l];
      if (pts.empty()) continue;
      groups.centroids[k][l] = centroid(std::span<const std::vector<double>>(pts));
    }
  }
  return groups;
}

namespace {

// Per-pattern terms are summed exactly so that the mean does not depend on
// pattern order or repetition.
void add_inverse_distances(ExactSum& total, const std::vector<std::vector<double>>& points,
                           const std::vector<double>& centre, double floor) {
  for (const auto& x : points) {
    double term = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) term += 1.0 / std::max(std::abs(x[j] - centre[j]), floor);
    total.add(term);
  }
}

}  // namespace

double j_component(const ConfusionGroups& groups, Label k, double floor) {
  const Label other = 1 - k;
  const auto& right = groups.centroids[k][k];
  const auto& wrong = groups.centroids[k][other];
  if (!right || !wrong) return 0.0;
  ExactSum total;
  add_inverse_distances(total, groups.points[k][other], *right, floor);
  add_inverse_distances(total, groups.points[k][k], *wrong, floor);
  return total.mean(groups.count(k, 0) + groups.count(k, 1));
}

double j_c(const ConfusionGroups& groups, double floor) {
  return j_component(groups, 0, floor) + j_component(groups, 1, floor);
}

double j_c(const Dataset& data, std::span<const Label> predictions, double floor) {
  return j_c(confusion_groups(data, predictions), floor);
}

double j_initial(const Dataset& data, double floor) {
  std::array<std::vector<std::size_t>, 2> members;
  for (std::size_t i = 0; i < data.size(); ++i) members[data[i].label].push_back(i);
  if (members[0].empty() || members[1].empty()) {
    throw Error("one-class", "the growth criterion needs both classes in the training set");
  }
  const std::array<std::vector<double>, 2> centres{centroid(data, members[0]),
                                                   centroid(data, members[1])};
  ExactSum total;
  for (Label l = 0; l < 2; ++l) {
    const auto& c = centres[1 - l];
    for (std::size_t i : members[l]) {
      const auto& x = data[i].features;
      double term = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) term += 1.0 / std::max(std::abs(x[j] - c[j]), floor);
      total.add(term);
    }
  }
  return total.mean(data.size());
}

double c_max_lower(double p, double epsilon, std::size_t dimension) {
  if (!(p >= 1.0)) throw Error("invalid", "pattern count must be at least 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error("invalid", "epsilon must lie in (0, 1)");
  if (dimension < 1) throw Error("invalid", "dimension must be at least 1");
  return p * epsilon / static_cast<double>(dimension + 1);
}

double c_max_heuristic(double p, double epsilon, std::size_t dimension, double log_base) {
  if (!(log_base > 1.0)) throw Error("invalid", "logarithm base must exceed 1");
  const double c0 = c_max_lower(p, epsilon, dimension);
  const double ratio = c0 / epsilon;
  if (!(ratio > 1.0)) {
    throw Error("degenerate-bound", "C_max / epsilon = " + std::to_string(ratio) +
                                        " leaves no positive logarithm");
  }
  const double d1 = static_cast<double>(dimension + 1);
  const double p_upper = c0 * d1 / epsilon * (std::log(ratio) / std::log(log_base));
  return p_upper * epsilon / d1;
}

double lambda_schedule(double complexity, double c_max) {
  if (!(c_max > 0.0)) throw Error("invalid", "C_max must be positive");
  if (complexity < 0.0) throw Error("invalid", "complexity must be non-negative");
  return complexity <= c_max ? c_max * (1.0 - complexity / c_max) : 0.0;
}

double merit(double g, double complexity, double g_max, double c_max) {
  if (!(g >= 0.0 && g <= 1.0)) throw Error("invalid", "generalization must lie in [0, 1]");
  if (!(g_max > 0.0 && g_max < 1.0)) throw Error("invalid", "G_max must lie in (0, 1)");
  if (!(c_max > 0.0)) throw Error("invalid", "C_max must be positive");
  if (complexity < 0.0) throw Error("invalid", "complexity must be non-negative");
  const double penalty = 1.0 / (1.0 + complexity / c_max);
  if (g > g_max) return g * g * penalty;
  const double shortfall = (g - g_max) / g_max;
  const double damped = g / (1.0 + shortfall * shortfall);
  return damped * damped * penalty;
}

// ---------------------------------------------------------------------------

GrowthConfig GrowthConfig::make(double epsilon, double p, std::size_t dimension, bool use_heuristic,
                                double log_base) {
  GrowthConfig cfg;
  cfg.epsilon = epsilon;
  cfg.g_max = 1.0 - epsilon;
  cfg.use_heuristic = use_heuristic;
  cfg.log_base = log_base;
  return cfg.with_training_size(p, dimension);
}

GrowthConfig GrowthConfig::with_training_size(double p, std::size_t dimension) const {
  GrowthConfig cfg = *this;
  cfg.g_max = 1.0 - epsilon;
  cfg.c_max = use_heuristic ? c_max_heuristic(p, epsilon, dimension, log_base)
                            : c_max_lower(p, epsilon, dimension);
  cfg.validate();
  return cfg;
}

void GrowthConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error("invalid", "epsilon must lie in (0, 1)");
  if (g_max != 1.0 - epsilon) throw Error("invalid", "G_max must equal 1 - epsilon");
  if (!(c_max > 0.0)) throw Error("invalid", "C_max must be positive");
  if (!(distance_floor > 0.0)) throw Error("invalid", "distance floor must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw Error("invalid", "validation fraction must lie in (0, 1)");
  }
  if (!(log_base > 1.0)) throw Error("invalid", "logarithm base must exceed 1");
}

GrowthDecision controller_observe(GrowthState& state, const GrowthConfig& config,
                                  std::size_t level, std::size_t complexity, double jc, double g) {
  if (state.stopped) throw Error("invalid-state", "controller already stopped");
  if (!state.trace.empty() && level <= state.trace.back().level) {
    throw Error("invalid-state", "trace levels must increase");
  }

  TraceRecord rec;
  rec.level = level;
  rec.units = complexity;
  rec.j_c = jc;
  rec.lambda = lambda_schedule(static_cast<double>(complexity), config.c_max);
  rec.threshold = *rec.lambda * state.j_initial;
  rec.g = g;
  rec.peak = jc > *rec.threshold;

  GrowthDecision decision = GrowthDecision::kContinue;
  if (rec.peak) {
    const double value = merit(g, static_cast<double>(complexity), config.g_max, config.c_max);
    rec.merit = value;
    if (!state.best_merit || value > *state.best_merit) {
      state.best_merit = value;
      state.best_level = level;
      decision = GrowthDecision::kContinueNewBest;
    } else {
      state.stopped = true;
      state.stop_level = state.best_level;
      rec.stopped = true;
      decision = GrowthDecision::kStop;
    }
  }
  state.trace.push_back(rec);
  return decision;
}

}  // namespace ntree
