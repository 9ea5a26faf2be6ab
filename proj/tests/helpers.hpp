#pragma once

#include <initializer_list>
#include <random>
#include <vector>

#include "ntree/dataset.hpp"
#include "oracles.hpp"

namespace testing {

inline ntree::Dataset make_dataset(std::initializer_list<std::pair<std::vector<double>, int>> rows,
                                   std::string name = "test") {
  const std::size_t d = rows.begin()->first.size();
  ntree::Dataset data(std::move(name), d);
  for (const auto& [x, y] : rows) data.add(ntree::Pattern{x, y});
  return data;
}

inline std::vector<oracle::Point> to_points(const ntree::Dataset& data) {
  std::vector<oracle::Point> out;
  for (const auto& p : data) out.push_back({p.features, p.label});
  return out;
}

inline ntree::Dataset xor_dataset() {
  return make_dataset({{{0, 0}, 0}, {{1, 1}, 0}, {{0, 1}, 1}, {{1, 0}, 1}}, "xor");
}

/// Random 2-D points labelled by a random line, keeping only points at
/// least `margin` away from it.
inline ntree::Dataset separable_dataset(std::mt19937_64& rng, std::size_t n, double margin) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double angle = u(rng) * 3.141592653589793;
  const double wx = std::cos(angle), wy = std::sin(angle), b = 0.3 * u(rng);
  ntree::Dataset data("separable", 2);
  std::size_t count[2] = {0, 0};
  while (data.size() < n) {
    const double x = u(rng), y = u(rng);
    const double a = wx * x + wy * y + b;
    if (std::abs(a) < margin) continue;
    const int label = a > 0 ? 1 : 0;
    // Keep both classes represented.
    if (count[label] >= n - 1) continue;
    ++count[label];
    data.add({{x, y}, label});
  }
  return data;
}

}  // namespace testing
