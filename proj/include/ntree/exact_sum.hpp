#pragma once

#include <array>
#include <cstdint>

namespace ntree {

/// Exact accumulator for finite doubles: a two's-complement fixed-point
/// integer whose least significant bit weighs 2^-1074.
///
/// mean() rounds the exact quotient once, so the mean of a sequence repeated
/// m times is bit-identical to the mean of the sequence itself.
class ExactSum {
 public:
  /// Throws Error("non-finite") for NaN or infinity.
  void add(double x);

  /// Correctly rounded (to nearest, ties to even) value of sum / count.
  double mean(std::uint64_t count) const;

  /// Correctly rounded sum.
  double value() const { return mean(1); }

 private:
  static constexpr int kLimbs = 36;  // 2304 bits: 2098 for the double range plus headroom
  std::array<std::uint64_t, kLimbs> limbs_{};
};

}  // namespace ntree
