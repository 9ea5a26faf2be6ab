#include "ntree/perceptron.hpp"

#include <array>
#include <numeric>
#include <optional>

#include "ntree/error.hpp"
#include "ntree/random.hpp"

namespace ntree {

void PocketConfig::validate() const {
  if (max_updates < 1) throw Error("invalid", "pocket budget must allow at least one update");
}

double activation(const PerceptronUnit& unit, std::span<const double> features) {
  if (features.size() != unit.weights.size()) {
    throw Error("dimension-mismatch", "pattern has " + std::to_string(features.size()) +
                                          " features, unit expects " +
                                          std::to_string(unit.weights.size()));
  }
  return std::inner_product(unit.weights.begin(), unit.weights.end(), features.begin(), unit.bias);
}

Label side(const PerceptronUnit& unit, std::span<const double> features) {
  return activation(unit, features) > 0.0 ? 1 : 0;
}

Label side(const PerceptronUnit& unit, const Pattern& pattern) {
  return side(unit, pattern.features);
}

PerceptronUnit perceptron_update(PerceptronUnit unit, const Pattern& pattern) {
  if (side(unit, pattern) == pattern.label) return unit;
  const double s = pattern.label == 1 ? 1.0 : -1.0;
  for (std::size_t j = 0; j < unit.weights.size(); ++j) unit.weights[j] += s * pattern.features[j];
  unit.bias += s;
  return unit;
}

namespace {

struct SplitScore {
  std::size_t correct = 0;
  std::array<std::size_t, 2> side_counts{};
};

SplitScore score(const PerceptronUnit& unit, const Dataset& data,
                 std::span<const std::size_t> indices) {
  SplitScore s;
  for (std::size_t i : indices) {
    const Pattern& p = data[i];
    const Label sd = side(unit, p);
    ++s.side_counts[sd];
    if (sd == p.label) ++s.correct;
  }
  return s;
}

}  // namespace

PerceptronUnit train_pocket_ratchet(const Dataset& data, std::span<const std::size_t> indices,
                                    const PocketConfig& config, PocketStats* stats) {
  config.validate();
  const std::size_t n = indices.size();
  std::array<std::size_t, 2> classes{};
  for (std::size_t i : indices) ++classes[data[i].label];
  if (n < 2 || classes[0] == 0 || classes[1] == 0) {
    throw Error("precondition", "pocket training needs at least one pattern of each class");
  }

  PocketStats local;
  PocketStats& st = stats ? *stats : local;
  st = PocketStats{};

  PerceptronUnit current{std::vector<double>(data.dimension(), 0.0), 0.0, 0.0};
  std::optional<PerceptronUnit> pocket;
  std::size_t pocket_correct = 0;
  std::size_t pocket_run = 0;
  std::size_t run = 0;
  bool current_evaluated = false;

  Rng rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  while (st.updates < config.max_updates) {
    const Pattern& p = data[indices[pick(rng)]];
    ++st.presentations;
    if (side(current, p) != p.label) {
      current = perceptron_update(std::move(current), p);
      ++st.updates;
      run = 0;
      current_evaluated = false;
      continue;
    }
    ++run;
    if (run <= pocket_run || current_evaluated) continue;

    current_evaluated = true;
    ++st.evaluations;
    const SplitScore s = score(current, data, indices);
    const bool both_sides = s.side_counts[0] > 0 && s.side_counts[1] > 0;
    if (both_sides && (!pocket || s.correct > pocket_correct)) {
      pocket = current;
      pocket_correct = s.correct;
      pocket_run = run;
      st.accepted_accuracies.push_back(static_cast<double>(s.correct) / static_cast<double>(n));
      if (s.correct == n) break;
    }
  }

  if (!pocket) {
    throw Error("cannot-split", "no weight vector split the training set into two non-empty sides");
  }
  pocket->train_accuracy = static_cast<double>(pocket_correct) / static_cast<double>(n);
  return *pocket;
}

PerceptronUnit train_pocket_ratchet(const Dataset& training, const PocketConfig& config,
                                    PocketStats* stats) {
  std::vector<std::size_t> all(training.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return train_pocket_ratchet(training, all, config, stats);
}

}  // namespace ntree
