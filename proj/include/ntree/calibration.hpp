#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ntree/dataset.hpp"

namespace ntree {

/// Generator parameters for the builtin datasets, read from the key=value
/// calibration file (data/calibration.txt).
struct Calibration {
  int version = 0;
  double gauss_sigma0 = 1.0;
  std::map<std::size_t, double> gauss_sigma1;  // by dimension
  double rectangular_overlap = 0.0;
  std::size_t rectangular_n0 = 0;
  std::size_t rectangular_n1 = 0;
  std::vector<IsoGaussian> clouds_class0;
  IsoGaussian clouds_class1;
};

Calibration parse_calibration(const std::string& text);
Calibration load_calibration(const std::filesystem::path& path);

/// The calibration compiled into the library from data/calibration.txt.
const Calibration& default_calibration();

/// gauss2, gauss4, gauss6, gauss8, rectangular, clouds.
const std::vector<std::string>& builtin_dataset_names();
bool is_builtin_dataset(const std::string& name);

/// Bayes-error targets the calibration was tuned to.
double builtin_bayes_target(const std::string& name);

/// Generator spec of a builtin dataset with every class count divided by
/// `scale_divisor` (1 = the full-size dataset, 5 = desk scale).
GeneratorSpec builtin_spec(const std::string& name, std::size_t scale_divisor, std::uint64_t seed,
                           const Calibration& calibration = default_calibration());

}  // namespace ntree
