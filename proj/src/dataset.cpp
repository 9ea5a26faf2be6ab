#include "ntree/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "ntree/calibration.hpp"
#include "ntree/error.hpp"
#include "ntree/exact_sum.hpp"
#include "ntree/random.hpp"

namespace ntree {

Dataset::Dataset(std::string name, std::size_t dimension)
    : name_(std::move(name)), dimension_(dimension) {
  if (dimension_ == 0) throw Error("invalid", "dataset dimension must be at least 1");
}

Dataset::Dataset(std::string name, std::size_t dimension, std::vector<Pattern> patterns)
    : Dataset(std::move(name), dimension) {
  patterns_.reserve(patterns.size());
  for (auto& p : patterns) add(std::move(p));
}

void Dataset::add(Pattern pattern) {
  if (pattern.features.size() != dimension_) {
    throw Error("dimension-mismatch", "pattern has " + std::to_string(pattern.features.size()) +
                                          " features, dataset dimension is " +
                                          std::to_string(dimension_));
  }
  if (pattern.label != 0 && pattern.label != 1) {
    throw Error("invalid-label", "label must be 0 or 1");
  }
  for (double v : pattern.features) {
    if (!std::isfinite(v)) throw Error("non-finite", "pattern feature is not finite");
  }
  patterns_.push_back(std::move(pattern));
}

std::array<std::size_t, 2> Dataset::class_counts() const noexcept {
  std::array<std::size_t, 2> counts{};
  for (const auto& p : patterns_) ++counts[p.label];
  return counts;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.name_ = name_;
  out.dimension_ = dimension_;
  out.patterns_.reserve(indices.size());
  for (std::size_t i : indices) out.patterns_.push_back(patterns_.at(i));
  return out;
}

bool operator==(const Pattern& a, const Pattern& b) {
  return a.label == b.label && a.features == b.features;
}

namespace {

template <typename Get>
std::vector<double> mean_of(std::size_t n, Get&& get) {
  if (n == 0) throw Error("empty-group", "centroid of an empty group");
  const std::size_t d = get(0).size();
  std::vector<ExactSum> sum(d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& x = get(i);
    if (x.size() != d) throw Error("dimension-mismatch", "centroid inputs differ in dimension");
    for (std::size_t j = 0; j < d; ++j) sum[j].add(x[j]);
  }
  std::vector<double> out(d);
  for (std::size_t j = 0; j < d; ++j) out[j] = sum[j].mean(n);
  return out;
}

}  // namespace

std::vector<double> centroid(std::span<const Pattern> patterns) {
  return mean_of(patterns.size(),
                 [&](std::size_t i) -> const std::vector<double>& { return patterns[i].features; });
}

std::vector<double> centroid(std::span<const std::vector<double>> points) {
  return mean_of(points.size(), [&](std::size_t i) -> const std::vector<double>& { return points[i]; });
}

std::vector<double> centroid(const Dataset& data, std::span<const std::size_t> indices) {
  return mean_of(indices.size(), [&](std::size_t i) -> const std::vector<double>& {
    return data[indices[i]].features;
  });
}

// ---------------------------------------------------------------------------
// Generators

void GaussSpec::validate() const {
  if (dimension == 0) throw Error("invalid", "gauss dimension must be positive");
  if (!(sigma0 > 0.0) || !(sigma1 > 0.0)) throw Error("invalid", "gauss sigmas must be positive");
  if (sigma0 == sigma1) throw Error("invalid", "gauss classes must differ in variance");
  if (!mean.empty() && mean.size() != dimension) {
    throw Error("invalid", "gauss mean length differs from dimension");
  }
}

void RectangularSpec::validate() const {
  if (!(overlap >= 0.0 && overlap <= 1.0)) {
    throw Error("invalid", "rectangular overlap must lie in [0, 1]");
  }
}

void MixtureSpec::validate() const {
  if (dimension == 0) throw Error("invalid", "mixture dimension must be positive");
  for (Label c = 0; c < 2; ++c) {
    if (counts[c] > 0 && classes[c].empty()) {
      throw Error("invalid", "mixture class with samples has no components");
    }
    for (const auto& g : classes[c]) {
      if (g.mean.size() != dimension) throw Error("invalid", "mixture component mean length");
      if (!(g.sigma > 0.0) || !(g.weight > 0.0)) {
        throw Error("invalid", "mixture component sigma and weight must be positive");
      }
    }
  }
}

MixtureSpec CloudsSpec::to_mixture() const {
  MixtureSpec m;
  m.dimension = class1.mean.size();
  m.classes[0] = class0;
  m.classes[1] = {class1};
  m.counts = {n_per_class, n_per_class};
  m.seed = seed;
  return m;
}

MixtureSpec to_mixture(const GaussSpec& spec) {
  spec.validate();
  std::vector<double> mean = spec.mean.empty() ? std::vector<double>(spec.dimension, 0.0) : spec.mean;
  MixtureSpec m;
  m.dimension = spec.dimension;
  m.classes[0] = {IsoGaussian{mean, spec.sigma0, 1.0}};
  m.classes[1] = {IsoGaussian{mean, spec.sigma1, 1.0}};
  m.counts = {spec.n_per_class, spec.n_per_class};
  m.seed = spec.seed;
  return m;
}

namespace {

std::size_t pick_component(const std::vector<IsoGaussian>& comps, Rng& rng) {
  if (comps.size() == 1) return 0;
  double total = 0.0;
  for (const auto& g : comps) total += g.weight;
  double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (u < comps[i].weight) return i;
    u -= comps[i].weight;
  }
  return comps.size() - 1;
}

std::vector<double> sample_mixture(const std::vector<IsoGaussian>& comps, Rng& rng) {
  const auto& g = comps[pick_component(comps, rng)];
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(g.mean.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = g.mean[j] + g.sigma * normal(rng);
  return x;
}

double log_mixture_density(const std::vector<IsoGaussian>& comps, std::span<const double> x) {
  double total_weight = 0.0;
  for (const auto& g : comps) total_weight += g.weight;
  std::vector<double> terms;
  terms.reserve(comps.size());
  const double d = static_cast<double>(x.size());
  for (const auto& g : comps) {
    double r2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double z = (x[j] - g.mean[j]) / g.sigma;
      r2 += z * z;
    }
    terms.push_back(std::log(g.weight / total_weight) - 0.5 * r2 - d * std::log(g.sigma) -
                    0.5 * d * std::log(2.0 * std::numbers::pi));
  }
  const double top = *std::max_element(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += std::exp(t - top);
  return top + std::log(s);
}

// Rectangular layout: 2x2 checkerboard on the unit square. Class 0 owns the
// diagonal quadrants (x < .5, y < .5) and (x >= .5, y >= .5).
bool in_class0_quadrant(double x, double y) { return (x < 0.5) == (y < 0.5); }

std::vector<double> sample_rectangular(Label label, double overlap, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool background = unit(rng) < overlap;
  double x = unit(rng);
  double y = unit(rng);
  if (!background) {
    // Fold into one of the two quadrants owned by this class.
    const bool diagonal = label == 0;
    x *= 0.5;
    y *= 0.5;
    const bool upper = unit(rng) < 0.5;
    if (upper) {
      x += 0.5;
      if (diagonal) y += 0.5;
    } else if (!diagonal) {
      y += 0.5;
    }
  }
  return {x, y};
}

// Density of a rectangular class, up to the shared factor of the unit square.
double rectangular_density(Label label, double overlap, double x, double y) {
  const bool own = in_class0_quadrant(x, y) == (label == 0);
  return overlap + (own ? 2.0 * (1.0 - overlap) : 0.0);
}

}  // namespace

Dataset generate_mixture(const MixtureSpec& spec) {
  spec.validate();
  Dataset out("mixture", spec.dimension);
  Rng rng(spec.seed);
  for (Label c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < spec.counts[c]; ++i) {
      out.add(Pattern{sample_mixture(spec.classes[c], rng), c});
    }
  }
  return out;
}

Dataset generate_gauss(const GaussSpec& spec) {
  Dataset out = generate_mixture(to_mixture(spec));
  out.set_name("gauss" + std::to_string(spec.dimension));
  return out;
}

Dataset generate_rectangular(const RectangularSpec& spec) {
  spec.validate();
  Dataset out("rectangular", 2);
  Rng rng(spec.seed);
  const std::array<std::size_t, 2> counts{spec.n_class0, spec.n_class1};
  for (Label c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < counts[c]; ++i) {
      out.add(Pattern{sample_rectangular(c, spec.overlap, rng), c});
    }
  }
  return out;
}

Dataset generate_rectangular(std::size_t n_class0, std::size_t n_class1, double overlap,
                             std::uint64_t seed) {
  return generate_rectangular(RectangularSpec{n_class0, n_class1, overlap, seed});
}

Dataset generate_clouds(const CloudsSpec& spec) {
  Dataset out = generate_mixture(spec.to_mixture());
  out.set_name("clouds");
  return out;
}

Dataset generate_clouds(std::size_t n_per_class, std::uint64_t seed) {
  const auto& cal = default_calibration();
  return generate_clouds(CloudsSpec{n_per_class, cal.clouds_class0, cal.clouds_class1, seed});
}

Dataset generate(const GeneratorSpec& spec) {
  return std::visit(
      [](const auto& s) -> Dataset {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussSpec>) return generate_gauss(s);
        else if constexpr (std::is_same_v<T, RectangularSpec>) return generate_rectangular(s);
        else if constexpr (std::is_same_v<T, CloudsSpec>) return generate_clouds(s);
        else if constexpr (std::is_same_v<T, MixtureSpec>) return generate_mixture(s);
        else return load_csv(s.path);
      },
      spec);
}

namespace {

std::array<double, 2> priors_from_counts(std::size_t n0, std::size_t n1) {
  if (n0 + n1 == 0) return {0.5, 0.5};
  const double total = static_cast<double>(n0 + n1);
  return {static_cast<double>(n0) / total, static_cast<double>(n1) / total};
}

double mixture_bayes_error(const MixtureSpec& spec, std::size_t n_samples, std::uint64_t seed) {
  spec.validate();
  const auto priors = priors_from_counts(spec.counts[0], spec.counts[1]);
  for (Label c = 0; c < 2; ++c) {
    if (priors[c] > 0.0 && spec.classes[c].empty()) {
      throw Error("invalid", "mixture class has a prior but no components");
    }
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t errors = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Label truth = unit(rng) < priors[0] ? 0 : 1;
    const auto x = sample_mixture(spec.classes[truth], rng);
    std::array<double, 2> score{};
    for (Label c = 0; c < 2; ++c) {
      score[c] = priors[c] > 0.0 ? std::log(priors[c]) + log_mixture_density(spec.classes[c], x)
                                 : -std::numeric_limits<double>::infinity();
    }
    const Label decided = score[1] > score[0] ? 1 : 0;
    if (decided != truth) ++errors;
  }
  return n_samples == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(n_samples);
}

double rectangular_bayes_error(const RectangularSpec& spec, std::size_t n_samples,
                               std::uint64_t seed) {
  spec.validate();
  const auto priors = priors_from_counts(spec.n_class0, spec.n_class1);
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t errors = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Label truth = unit(rng) < priors[0] ? 0 : 1;
    const auto x = sample_rectangular(truth, spec.overlap, rng);
    const double s0 = priors[0] * rectangular_density(0, spec.overlap, x[0], x[1]);
    const double s1 = priors[1] * rectangular_density(1, spec.overlap, x[0], x[1]);
    const Label decided = s1 > s0 ? 1 : 0;
    if (decided != truth) ++errors;
  }
  return n_samples == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(n_samples);
}

}  // namespace

double estimate_bayes_error(const GeneratorSpec& spec, std::size_t n_samples, std::uint64_t seed) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussSpec>) {
          return mixture_bayes_error(to_mixture(s), n_samples, seed);
        } else if constexpr (std::is_same_v<T, RectangularSpec>) {
          return rectangular_bayes_error(s, n_samples, seed);
        } else if constexpr (std::is_same_v<T, CloudsSpec>) {
          return mixture_bayes_error(s.to_mixture(), n_samples, seed);
        } else if constexpr (std::is_same_v<T, MixtureSpec>) {
          return mixture_bayes_error(s, n_samples, seed);
        } else {
          throw Error("no-density", "no analytic density for CSV data: " + s.path.string());
        }
      },
      spec);
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool none_numeric(const std::vector<std::string_view>& fields) {
  double v = 0.0;
  return std::none_of(fields.begin(), fields.end(), [&](auto f) { return parse_double(f, v); });
}

}  // namespace

Dataset parse_csv(const std::string& text, std::string name) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) lines.push_back(line);
  }
  if (lines.empty()) throw Error("empty-file", "CSV file '" + name + "' has no rows");

  std::size_t first = 0;
  if (none_numeric(split_fields(lines[0]))) first = 1;  // header
  if (first == lines.size()) throw Error("empty-file", "CSV file '" + name + "' has no data rows");

  const std::size_t width = split_fields(lines[first]).size();
  if (width < 2) {
    throw Error("parse", "row 1: need at least one feature and a label");
  }
  Dataset out(std::move(name), width - 1);
  for (std::size_t r = first; r < lines.size(); ++r) {
    const std::size_t row = r - first + 1;
    const auto fields = split_fields(lines[r]);
    if (fields.size() != width) {
      throw Error("ragged-rows", "row " + std::to_string(row) + " has " +
                                     std::to_string(fields.size()) + " fields, expected " +
                                     std::to_string(width));
    }
    Pattern p;
    p.features.resize(width - 1);
    for (std::size_t j = 0; j + 1 < width; ++j) {
      if (!parse_double(fields[j], p.features[j])) {
        throw Error("parse", "row " + std::to_string(row) + ": field " + std::to_string(j + 1) +
                                 " '" + std::string(fields[j]) + "' is not a number");
      }
    }
    const auto label = fields.back();
    if (label == "0") p.label = 0;
    else if (label == "1") p.label = 1;
    else {
      throw Error("parse", "row " + std::to_string(row) + ": label '" + std::string(label) +
                               "' is not 0 or 1");
    }
    out.add(std::move(p));
  }
  return out;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path.stem().string());
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + path.string());
  for (std::size_t j = 0; j < data.dimension(); ++j) out << 'x' << (j + 1) << ',';
  out << "label\n";
  char buf[32];
  for (const auto& p : data) {
    for (double v : p.features) {
      const auto res = std::to_chars(buf, buf + sizeof buf, v);
      out.write(buf, res.ptr - buf);
      out << ',';
    }
    out << p.label << '\n';
  }
  if (!out) throw Error("io", "failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Cross-validation

void CvPlan::validate() const {
  if (k < 2) throw Error("invalid", "cross-validation needs k >= 2");
  if (repeats < 1) throw Error("invalid", "cross-validation needs repeats >= 1");
}

std::vector<std::vector<std::size_t>> cv_parts(std::size_t n, const CvPlan& plan) {
  plan.validate();
  if (n < plan.k) {
    throw Error("too-few-patterns", std::to_string(n) + " patterns cannot fill " +
                                        std::to_string(plan.k) + " parts");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(plan.seed, stream::kPartition));
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<std::vector<std::size_t>> parts(plan.k);
  const std::size_t base = n / plan.k;
  const std::size_t extra = n % plan.k;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < plan.k; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    parts[i].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                    perm.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return parts;
}

std::uint64_t job_seed(std::uint64_t plan_seed, std::size_t partition, std::size_t repeat) {
  return derive_seed(derive_seed(plan_seed, stream::kJob), (partition << 20) ^ repeat);
}

std::vector<CvJob> partition_cv(const Dataset& data, const CvPlan& plan) {
  const auto parts = cv_parts(data.size(), plan);
  std::vector<CvJob> jobs;
  jobs.reserve(plan.k * plan.repeats);
  for (std::size_t i = 0; i < plan.k; ++i) {
    std::vector<std::size_t> train_idx;
    train_idx.reserve(data.size() - parts[i].size());
    for (std::size_t other = 0; other < plan.k; ++other) {
      if (other != i) train_idx.insert(train_idx.end(), parts[other].begin(), parts[other].end());
    }
    Dataset train = data.subset(train_idx);
    Dataset test = data.subset(parts[i]);
    for (std::size_t r = 0; r < plan.repeats; ++r) {
      jobs.push_back(CvJob{i, r, job_seed(plan.seed, i, r), train, test});
    }
  }
  return jobs;
}

}  // namespace ntree
