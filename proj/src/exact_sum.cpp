#include "ntree/exact_sum.hpp"

#include <cmath>

#include "ntree/error.hpp"

namespace ntree {

namespace {

using Limbs = std::array<std::uint64_t, 36>;
__extension__ typedef unsigned __int128 Wide;

void add_at(Limbs& limbs, std::size_t index, std::uint64_t v) {
  for (std::size_t i = index; i < limbs.size() && v != 0; ++i) {
    const std::uint64_t before = limbs[i];
    limbs[i] += v;
    v = limbs[i] < before ? 1 : 0;
  }
}

void sub_at(Limbs& limbs, std::size_t index, std::uint64_t v) {
  for (std::size_t i = index; i < limbs.size() && v != 0; ++i) {
    const std::uint64_t before = limbs[i];
    limbs[i] -= v;
    v = limbs[i] > before ? 1 : 0;
  }
}

bool bit(const Limbs& limbs, std::size_t i) { return (limbs[i / 64] >> (i % 64)) & 1u; }

bool any_below(const Limbs& limbs, std::size_t i) {
  for (std::size_t l = 0; l < i / 64; ++l)
    if (limbs[l] != 0) return true;
  const std::size_t r = i % 64;
  return r != 0 && (limbs[i / 64] & ((std::uint64_t{1} << r) - 1)) != 0;
}

}  // namespace

void ExactSum::add(double x) {
  if (!std::isfinite(x)) throw Error("non-finite", "exact sum of a non-finite value");
  if (x == 0.0) return;
  int exp = 0;
  const double m = std::frexp(std::abs(x), &exp);
  auto mantissa = static_cast<std::uint64_t>(std::ldexp(m, 53));
  int offset = exp - 53 + 1074;
  if (offset < 0) {  // subnormal: the dropped bits are zero
    mantissa >>= -offset;
    offset = 0;
  }
  const auto q = static_cast<std::size_t>(offset / 64);
  const int r = offset % 64;
  const std::uint64_t lo = mantissa << r;
  const std::uint64_t hi = r == 0 ? 0 : mantissa >> (64 - r);
  if (x > 0) {
    add_at(limbs_, q, lo);
    add_at(limbs_, q + 1, hi);
  } else {
    sub_at(limbs_, q, lo);
    sub_at(limbs_, q + 1, hi);
  }
}

double ExactSum::mean(std::uint64_t count) const {
  if (count == 0) throw Error("invalid", "mean of zero items");
  Limbs mag = limbs_;
  const bool negative = (mag.back() >> 63) != 0;
  if (negative) {
    for (auto& l : mag) l = ~l;
    add_at(mag, 0, 1);
  }

  Limbs q{};
  Wide rem = 0;
  for (std::size_t i = mag.size(); i-- > 0;) {
    const Wide cur = (rem << 64) | mag[i];
    q[i] = static_cast<std::uint64_t>(cur / count);
    rem = cur % count;
  }

  std::size_t top = q.size();
  while (top > 0 && q[top - 1] == 0) --top;
  std::size_t length = 0;
  if (top > 0) length = 64 * (top - 1) + (64 - static_cast<std::size_t>(__builtin_clzll(q[top - 1])));

  double result = 0.0;
  if (length <= 53) {
    std::uint64_t v = q[0];
    const Wide twice = rem * 2;
    if (twice > count || (twice == count && (v & 1u))) ++v;
    result = std::ldexp(static_cast<double>(v), -1074);
  } else {
    std::size_t shift = length - 53;
    std::uint64_t v = 0;
    for (std::size_t b = 0; b < 53; ++b) v |= static_cast<std::uint64_t>(bit(q, shift + b)) << b;
    const bool round = bit(q, shift - 1);
    const bool sticky = rem != 0 || any_below(q, shift - 1);
    if (round && (sticky || (v & 1u))) ++v;
    if (v == (std::uint64_t{1} << 53)) {
      v >>= 1;
      ++shift;
    }
    result = std::ldexp(static_cast<double>(v), static_cast<int>(shift) - 1074);
  }
  return negative ? -result : result;
}

}  // namespace ntree
