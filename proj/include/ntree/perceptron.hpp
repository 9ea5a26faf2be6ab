#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ntree/dataset.hpp"

namespace ntree {

/// One separating hyperplane: side 1 iff weights . x + bias > 0.
struct PerceptronUnit {
  std::vector<double> weights;
  double bias = 0.0;
  double train_accuracy = 0.0;

  friend bool operator==(const PerceptronUnit&, const PerceptronUnit&) = default;
};

struct PocketConfig {
  std::size_t max_updates = 10000;  // weight updates, not presentations
  std::uint64_t seed = 0;

  void validate() const;
};

/// Diagnostics of one pocket run.
struct PocketStats {
  std::size_t updates = 0;
  std::size_t presentations = 0;
  std::size_t evaluations = 0;
  /// Training accuracy of every vector that entered the pocket, in order.
  std::vector<double> accepted_accuracies;
};

double activation(const PerceptronUnit& unit, std::span<const double> features);

/// 1 if the pattern lies strictly on the positive side, else 0.
Label side(const PerceptronUnit& unit, std::span<const double> features);
Label side(const PerceptronUnit& unit, const Pattern& pattern);

/// One perceptron-rule step; unchanged when the pattern is already correct.
PerceptronUnit perceptron_update(PerceptronUnit unit, const Pattern& pattern);

/// Pocket algorithm with the ratchet: a candidate enters the pocket only if
/// it leaves both sides of its hyperplane non-empty on the training set and
/// its accuracy strictly beats the pocketed one. Candidates are examined
/// whenever the current run of consecutive correct classifications exceeds
/// the pocket's run. Throws Error("cannot-split") if nothing was pocketed.
PerceptronUnit train_pocket_ratchet(const Dataset& training, const PocketConfig& config,
                                    PocketStats* stats = nullptr);

/// Same, restricted to the patterns at `indices`.
PerceptronUnit train_pocket_ratchet(const Dataset& data, std::span<const std::size_t> indices,
                                    const PocketConfig& config, PocketStats* stats = nullptr);

}  // namespace ntree
