#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ntree::cli {

struct CliConfig {
  std::string command;
  std::vector<std::string> datasets;  // builtin names
  std::vector<std::string> csvs;      // CSV paths
  std::vector<std::string> modes;
  std::vector<double> epsilons;
  std::size_t k = 10;
  std::size_t repeats = 6;
  std::optional<std::size_t> pocket_updates;
  std::uint64_t seed = 1;
  std::string scale;  // "desk" | "paper"; empty picks the command default
  std::filesystem::path out;
  std::size_t workers = 1;
  double validation_fraction = 0.1;
  double log_base = 10.0;
  double distance_floor = 1e-9;
  bool g_on_test = false;
  std::size_t partition = 0;  // trace only
  std::size_t repeat = 0;     // trace only
};

/// Full-size datasets are divided by this factor at desk scale.
inline constexpr std::size_t kDeskScaleDivisor = 5;
inline constexpr std::size_t kDeskPocketUpdates = 2000;
inline constexpr std::size_t kPaperPocketUpdates = 10000;

/// Writes a builtin dataset as CSV and prints its Monte-Carlo Bayes error.
/// Defaults to full scale.
int cmd_generate(const CliConfig& config, std::ostream& out, std::ostream& err);

/// Runs every (dataset, mode, epsilon) experiment and writes tables.md,
/// tables.csv, runs.csv and traces/ under config.out.
int cmd_run(const CliConfig& config, std::ostream& out, std::ostream& err);

/// Runs one job (config.partition, config.repeat) and writes trace.csv and
/// tree.txt under config.out.
int cmd_trace(const CliConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ntree::cli
