#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ntree {

using Label = int;  // 0 or 1

struct Pattern {
  std::vector<double> features;
  Label label = 0;
};

/// An ordered, labelled set of patterns sharing one dimension.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::string name, std::size_t dimension);
  Dataset(std::string name, std::size_t dimension, std::vector<Pattern> patterns);

  /// Appends a pattern, validating dimension, finiteness and label.
  void add(Pattern pattern);

  const std::string& name() const noexcept { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return patterns_.size(); }
  bool empty() const noexcept { return patterns_.empty(); }

  const Pattern& operator[](std::size_t i) const { return patterns_[i]; }
  const std::vector<Pattern>& patterns() const noexcept { return patterns_; }
  auto begin() const noexcept { return patterns_.begin(); }
  auto end() const noexcept { return patterns_.end(); }

  /// {N_0, N_1}.
  std::array<std::size_t, 2> class_counts() const noexcept;

  /// Copies the patterns at `indices`, in that order.
  Dataset subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::string name_;
  std::size_t dimension_ = 0;
  std::vector<Pattern> patterns_;
};

bool operator==(const Pattern& a, const Pattern& b);

/// Component-wise mean. Throws Error("empty-group") on empty input.
std::vector<double> centroid(std::span<const Pattern> patterns);
std::vector<double> centroid(const Dataset& data, std::span<const std::size_t> indices);
std::vector<double> centroid(std::span<const std::vector<double>> points);

// ---------------------------------------------------------------------------
// Generator specifications

struct GaussSpec {
  std::size_t dimension = 2;
  std::size_t n_per_class = 0;
  double sigma0 = 1.0;
  double sigma1 = 2.0;
  std::vector<double> mean;  // empty means the origin
  std::uint64_t seed = 0;

  void validate() const;
};

struct RectangularSpec {
  std::size_t n_class0 = 0;
  std::size_t n_class1 = 0;
  /// Weight of the shared uniform background, in [0, 1]. Bayes error is overlap / 2.
  double overlap = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct IsoGaussian {
  std::vector<double> mean;
  double sigma = 1.0;
  double weight = 1.0;
};

/// Each class is a weighted mixture of isotropic gaussians.
struct MixtureSpec {
  std::size_t dimension = 1;
  std::array<std::vector<IsoGaussian>, 2> classes;
  std::array<std::size_t, 2> counts{};
  std::uint64_t seed = 0;

  void validate() const;
};

struct CloudsSpec {
  std::size_t n_per_class = 0;
  std::vector<IsoGaussian> class0;
  IsoGaussian class1;
  std::uint64_t seed = 0;

  MixtureSpec to_mixture() const;
};

/// Data that comes from a file and has no analytic density.
struct CsvSource {
  std::filesystem::path path;
};

using GeneratorSpec = std::variant<GaussSpec, RectangularSpec, CloudsSpec, MixtureSpec, CsvSource>;

MixtureSpec to_mixture(const GaussSpec& spec);

Dataset generate_gauss(const GaussSpec& spec);
Dataset generate_rectangular(std::size_t n_class0, std::size_t n_class1, double overlap,
                             std::uint64_t seed);
Dataset generate_rectangular(const RectangularSpec& spec);
/// Uses the clouds component parameters of the default calibration.
Dataset generate_clouds(std::size_t n_per_class, std::uint64_t seed);
Dataset generate_clouds(const CloudsSpec& spec);
Dataset generate_mixture(const MixtureSpec& spec);
Dataset generate(const GeneratorSpec& spec);

/// Monte-Carlo Bayes error: samples the joint distribution (class priors
/// proportional to the generator's class counts, equal when both are zero) and
/// counts points whose larger-posterior class differs from the true one.
/// Ties go to class 0. Throws Error("no-density") for CsvSource.
double estimate_bayes_error(const GeneratorSpec& spec, std::size_t n_samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// CSV

/// Reads `x_1,...,x_d,label` rows. A non-numeric first row is treated as a
/// header. Errors: "empty-file", "ragged-rows", "parse" (message names the
/// 1-based data row).
Dataset load_csv(const std::filesystem::path& path);
Dataset parse_csv(const std::string& text, std::string name);
void write_csv(const Dataset& data, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Cross-validation

struct CvPlan {
  std::size_t k = 10;
  std::size_t repeats = 6;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CvJob {
  std::size_t partition = 0;
  std::size_t repeat = 0;
  std::uint64_t seed = 0;  // presentation-order seed of this job
  Dataset train;
  Dataset test;
};

/// Index sets of the k parts after a seeded shuffle.
std::vector<std::vector<std::size_t>> cv_parts(std::size_t n, const CvPlan& plan);

/// k x repeats jobs ordered by (partition, repeat). Throws
/// Error("too-few-patterns") when the dataset has fewer than k patterns.
std::vector<CvJob> partition_cv(const Dataset& data, const CvPlan& plan);

std::uint64_t job_seed(std::uint64_t plan_seed, std::size_t partition, std::size_t repeat);

}  // namespace ntree
