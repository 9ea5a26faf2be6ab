#include "ntree/calibration.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "calibration_text.hpp"
#include "ntree/error.hpp"

namespace ntree {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw Error("calibration", "calibration key '" + key + "': bad number '" + value + "'");
  }
  return out;
}

std::vector<double> to_vector(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  return out;
}

IsoGaussian& component(std::vector<IsoGaussian>& comps, std::size_t index) {
  if (comps.size() <= index) comps.resize(index + 1);
  return comps[index];
}

}  // namespace

Calibration parse_calibration(const std::string& text) {
  Calibration cal;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("calibration", "calibration line " + std::to_string(line_no) + " has no '='");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "version") {
      cal.version = static_cast<int>(to_double(key, value));
    } else if (key == "gauss.sigma0") {
      cal.gauss_sigma0 = to_double(key, value);
    } else if (key.starts_with("gauss") && key.ends_with(".sigma1")) {
      const auto dim = key.substr(5, key.size() - 5 - 7);
      cal.gauss_sigma1[static_cast<std::size_t>(to_double(key, dim))] = to_double(key, value);
    } else if (key == "rectangular.overlap") {
      cal.rectangular_overlap = to_double(key, value);
    } else if (key == "rectangular.n_class0") {
      cal.rectangular_n0 = static_cast<std::size_t>(to_double(key, value));
    } else if (key == "rectangular.n_class1") {
      cal.rectangular_n1 = static_cast<std::size_t>(to_double(key, value));
    } else if (key.starts_with("clouds.class0.")) {
      // clouds.class0.<index>.<field>
      const auto rest = key.substr(14);
      const auto dot = rest.find('.');
      if (dot == std::string::npos) throw Error("calibration", "bad key '" + key + "'");
      auto& g = component(cal.clouds_class0,
                          static_cast<std::size_t>(to_double(key, rest.substr(0, dot))));
      const auto field = rest.substr(dot + 1);
      if (field == "mean") g.mean = to_vector(key, value);
      else if (field == "sigma") g.sigma = to_double(key, value);
      else if (field == "weight") g.weight = to_double(key, value);
      else throw Error("calibration", "unknown calibration key '" + key + "'");
    } else if (key == "clouds.class1.mean") {
      cal.clouds_class1.mean = to_vector(key, value);
    } else if (key == "clouds.class1.sigma") {
      cal.clouds_class1.sigma = to_double(key, value);
    } else {
      throw Error("calibration", "unknown calibration key '" + key + "'");
    }
  }
  return cal;
}

Calibration load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_calibration(buf.str());
}

const Calibration& default_calibration() {
  static const Calibration cal = parse_calibration(detail::kCalibrationText);
  return cal;
}

const std::vector<std::string>& builtin_dataset_names() {
  static const std::vector<std::string> names{"gauss2", "gauss4",      "gauss6",
                                              "gauss8", "rectangular", "clouds"};
  return names;
}

bool is_builtin_dataset(const std::string& name) {
  const auto& names = builtin_dataset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

double builtin_bayes_target(const std::string& name) {
  if (name == "gauss2") return 0.2637;
  if (name == "gauss4") return 0.1764;
  if (name == "gauss6") return 0.1244;
  if (name == "gauss8") return 0.0900;
  if (name == "rectangular") return 0.1551;
  if (name == "clouds") return 0.0966;
  throw Error("unknown-dataset", "unknown builtin dataset '" + name + "'");
}

GeneratorSpec builtin_spec(const std::string& name, std::size_t scale_divisor, std::uint64_t seed,
                           const Calibration& cal) {
  if (scale_divisor == 0) throw Error("invalid", "scale divisor must be positive");
  const auto scaled = [&](std::size_t n) {
    return (n + scale_divisor / 2) / scale_divisor;  // rounded
  };
  if (name.starts_with("gauss") && is_builtin_dataset(name)) {
    const std::size_t d = static_cast<std::size_t>(name[5] - '0');
    const auto it = cal.gauss_sigma1.find(d);
    if (it == cal.gauss_sigma1.end()) {
      throw Error("calibration", "no calibrated sigma1 for " + name);
    }
    GaussSpec spec;
    spec.dimension = d;
    spec.n_per_class = scaled(2500);
    spec.sigma0 = cal.gauss_sigma0;
    spec.sigma1 = it->second;
    spec.seed = seed;
    return spec;
  }
  if (name == "rectangular") {
    return RectangularSpec{scaled(cal.rectangular_n0), scaled(cal.rectangular_n1),
                           cal.rectangular_overlap, seed};
  }
  if (name == "clouds") {
    return CloudsSpec{scaled(2500), cal.clouds_class0, cal.clouds_class1, seed};
  }
  std::string valid;
  for (const auto& n : builtin_dataset_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw Error("unknown-dataset", "unknown builtin dataset '" + name + "' (valid: " + valid + ")");
}

}  // namespace ntree
