#include "ntree/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <thread>

#include "ntree/calibration.hpp"
#include "ntree/dataset.hpp"
#include "ntree/error.hpp"
#include "ntree/evaluation.hpp"
#include "ntree/random.hpp"

namespace ntree::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kBayesSamples = 100000;

bool paper_scale(const CliConfig& config, bool default_paper) {
  if (config.scale.empty()) return default_paper;
  if (config.scale == "paper") return true;
  if (config.scale == "desk") return false;
  throw Error("usage", "--scale must be 'desk' or 'paper'");
}

std::string builtin_list() {
  std::string s;
  for (const auto& n : builtin_dataset_names()) s += (s.empty() ? "" : ", ") + n;
  return s;
}

Dataset builtin_dataset(const std::string& name, bool paper, std::uint64_t seed) {
  if (!is_builtin_dataset(name)) {
    throw Error("usage", "unknown dataset '" + name + "' (valid: " + builtin_list() + ")");
  }
  Dataset data =
      generate(builtin_spec(name, paper ? 1 : kDeskScaleDivisor, derive_seed(seed, stream::kData)));
  data.set_name(name);
  return data;
}

std::vector<Dataset> load_datasets(const CliConfig& config, bool paper) {
  std::vector<Dataset> out;
  for (const auto& name : config.datasets) out.push_back(builtin_dataset(name, paper, config.seed));
  for (const auto& path : config.csvs) {
    if (!fs::exists(path)) throw Error("io", "CSV file not found: " + path);
    out.push_back(load_csv(path));
  }
  if (out.empty()) throw Error("usage", "select data with --dataset or --csv");
  return out;
}

std::vector<Mode> resolve_modes(const CliConfig& config) {
  if (config.modes.empty()) throw Error("usage", "--mode is required");
  std::vector<Mode> modes;
  bool any_criterion = false;
  for (const auto& m : config.modes) {
    try {
      modes.push_back(parse_mode(m));
    } catch (const Error& e) {
      throw Error("usage", e.what());
    }
    any_criterion |= modes.back() != Mode::kBaseline;
  }
  if (any_criterion && config.epsilons.empty()) {
    throw Error("usage", "criterion modes need at least one --epsilon");
  }
  if (!any_criterion && !config.epsilons.empty()) {
    throw Error("usage", "--epsilon is not used by baseline mode");
  }
  for (double e : config.epsilons) {
    if (!(e > 0.0 && e < 1.0)) throw Error("usage", "--epsilon values must lie in (0, 1)");
  }
  return modes;
}

PocketConfig pocket_config(const CliConfig& config, bool paper) {
  PocketConfig pocket;
  pocket.max_updates =
      config.pocket_updates.value_or(paper ? kPaperPocketUpdates : kDeskPocketUpdates);
  pocket.seed = config.seed;
  pocket.validate();
  return pocket;
}

GrowthConfig growth_template(const CliConfig& config, double epsilon, Mode mode) {
  GrowthConfig g;
  g.epsilon = epsilon;
  g.g_max = 1.0 - epsilon;
  g.use_heuristic = mode == Mode::kCriterionHeuristic;
  g.log_base = config.log_base;
  g.distance_floor = config.distance_floor;
  g.validation_fraction = config.validation_fraction;
  g.g_on_test = config.g_on_test;
  return g;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw Error("io", "failed writing " + path.string());
}

/// Removes what a failed command wrote.
class OutputGuard {
 public:
  explicit OutputGuard(fs::path dir) : dir_(std::move(dir)), created_(!fs::exists(dir_)) {
    fs::create_directories(dir_);
  }
  OutputGuard(const OutputGuard&) = delete;
  OutputGuard& operator=(const OutputGuard&) = delete;
  ~OutputGuard() {
    if (committed_) return;
    std::error_code ec;
    if (created_) {
      fs::remove_all(dir_, ec);
    } else {
      for (const auto& f : written_) fs::remove_all(f, ec);
    }
  }

  fs::path track(const fs::path& p) {
    written_.push_back(p);
    return p;
  }
  void commit() { committed_ = true; }

 private:
  fs::path dir_;
  bool created_;
  bool committed_ = false;
  std::vector<fs::path> written_;
};

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == "usage" ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int cmd_generate(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (config.datasets.size() != 1) throw Error("usage", "generate takes exactly one --dataset");
    if (config.out.empty()) throw Error("usage", "generate needs --out <file.csv>");
    const auto& name = config.datasets.front();
    if (!is_builtin_dataset(name)) {
      throw Error("usage", "unknown dataset '" + name + "' (valid: " + builtin_list() + ")");
    }
    const bool paper = paper_scale(config, true);
    const auto spec = builtin_spec(name, paper ? 1 : kDeskScaleDivisor,
                                   derive_seed(config.seed, stream::kData));
    Dataset data = generate(spec);
    data.set_name(name);
    if (config.out.has_parent_path()) fs::create_directories(config.out.parent_path());
    write_csv(data, config.out);
    const double bayes =
        estimate_bayes_error(spec, kBayesSamples, derive_seed(config.seed, stream::kBayes));
    const auto counts = data.class_counts();
    out << name << ": " << data.size() << " patterns (" << counts[0] << " class 0, " << counts[1]
        << " class 1), d=" << data.dimension() << " -> " << config.out.string() << '\n';
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f%% (target %.2f%%)", 100.0 * bayes,
                  100.0 * builtin_bayes_target(name));
    out << "Monte-Carlo Bayes error: " << buf << '\n';
    return 0;
  });
}

int cmd_run(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (config.out.empty()) throw Error("usage", "run needs --out <directory>");
    const bool paper = paper_scale(config, false);
    const auto modes = resolve_modes(config);
    const auto datasets = load_datasets(config, paper);
    const CvPlan plan{config.k, config.repeats, config.seed};
    plan.validate();

    OutputGuard guard(config.out);
    const fs::path traces = guard.track(config.out / "traces");
    fs::create_directories(traces);

    std::vector<ExperimentReport> reports;
    std::vector<RunResult> all_runs;
    for (const auto& data : datasets) {
      for (Mode mode : modes) {
        std::vector<std::optional<double>> eps_list;
        if (mode == Mode::kBaseline) eps_list.push_back(std::nullopt);
        else eps_list.assign(config.epsilons.begin(), config.epsilons.end());
        for (const auto& eps : eps_list) {
          ExperimentOptions options;
          options.mode = mode;
          options.pocket = pocket_config(config, paper);
          options.workers = config.workers;
          if (eps) options.growth = growth_template(config, *eps, mode);

          const auto start = std::chrono::steady_clock::now();
          Experiment exp = run_experiment(data, plan, options);
          const double secs =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

          for (const auto& r : exp.runs) {
            write_file(traces / trace_file_name(r), trace_csv(r.jc_trace));
          }
          const auto& rep = exp.report;
          char buf[160];
          std::snprintf(buf, sizeof buf, "%s %s%s: %zu runs, units %.2f +- %.2f, gen %.2f%% +- %.2f (%.1fs)",
                        data.name().c_str(), std::string(mode_name(mode)).c_str(),
                        eps ? (" eps=" + std::to_string(*eps)).c_str() : "", rep.run_count,
                        rep.mean_units, rep.std_units, rep.mean_generalization_pct,
                        rep.std_generalization_pct, secs);
          err << buf << '\n';
          reports.push_back(rep);
          all_runs.insert(all_runs.end(), exp.runs.begin(), exp.runs.end());
        }
      }
    }

    const Tables tables = emit_tables(reports);
    write_file(guard.track(config.out / "tables.md"), tables.markdown);
    write_file(guard.track(config.out / "tables.csv"), tables.csv);
    write_file(guard.track(config.out / "runs.csv"), runs_csv(all_runs));
    guard.commit();
    out << tables.markdown;
    return 0;
  });
}

int cmd_trace(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (config.out.empty()) throw Error("usage", "trace needs --out <directory>");
    const bool paper = paper_scale(config, false);
    const auto modes = resolve_modes(config);
    if (modes.size() != 1) throw Error("usage", "trace takes exactly one --mode");
    if (modes.front() != Mode::kBaseline && config.epsilons.size() != 1) {
      throw Error("usage", "trace takes exactly one --epsilon");
    }
    if (config.datasets.size() + config.csvs.size() != 1) {
      throw Error("usage", "trace takes exactly one --dataset or --csv");
    }
    const Dataset data = load_datasets(config, paper).front();
    const CvPlan plan{config.k, config.repeats, config.seed};
    if (config.partition >= plan.k || config.repeat >= plan.repeats) {
      throw Error("usage", "--partition/--repeat outside the cross-validation plan");
    }
    const auto jobs = partition_cv(data, plan);
    const CvJob& job = jobs.at(config.partition * plan.repeats + config.repeat);

    PocketConfig pocket = pocket_config(config, paper);
    pocket.seed = job.seed;
    RunOutcome outcome;
    if (modes.front() == Mode::kBaseline) {
      outcome = run_baseline(job.train, job.test, pocket);
    } else {
      const auto growth = growth_template(config, config.epsilons.front(), modes.front())
                              .with_training_size(static_cast<double>(job.train.size()),
                                                  data.dimension());
      outcome = run_criterion(job.train, job.test, pocket, growth);
      out << "c_max=" << growth.c_max << '\n';
    }
    OutputGuard guard(config.out);
    write_file(guard.track(config.out / "trace.csv"), trace_csv(outcome.result.jc_trace));
    outcome.tree.release_assignments();
    write_file(guard.track(config.out / "tree.txt"), outcome.tree.serialize());
    guard.commit();

    out << "j_initial=" << j_initial(job.train, config.distance_floor) << '\n'
        << "levels=" << outcome.result.jc_trace.size() << " units=" << outcome.result.units
        << " generalization=" << outcome.result.generalization << '\n';
    return 0;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliConfig config;
  CLI::App app{"Neural tree classifier with growth control"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value file; command-line flags take precedence");

  auto* generate_cmd = app.add_subcommand("generate", "write a builtin dataset as CSV");
  auto* run_cmd = app.add_subcommand("run", "cross-validated experiments and tables");
  auto* trace_cmd = app.add_subcommand("trace", "per-level J_c trace of one run");

  app.add_option("--dataset", config.datasets, "builtin dataset (repeatable): " + builtin_list());
  app.add_option("--csv", config.csvs, "CSV dataset path (repeatable)");
  app.add_option("--mode", config.modes, "baseline | criterion | criterion-heuristic (repeatable)");
  app.add_option("--epsilon", config.epsilons, "target generalization error (repeatable)");
  app.add_option("--k", config.k, "cross-validation parts")->capture_default_str();
  app.add_option("--repeats", config.repeats, "repeats per partition")->capture_default_str();
  app.add_option("--pocket-updates", config.pocket_updates,
                 "weight updates per unit (default 2000 desk, 10000 paper)");
  app.add_option("--seed", config.seed, "master seed")->capture_default_str();
  app.add_option("--scale", config.scale, "desk | paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  app.add_option("--out", config.out, "output directory (generate: CSV file)");
  app.add_option("--workers", config.workers, "concurrent jobs")->capture_default_str();
  app.add_option("--validation-fraction", config.validation_fraction,
                 "share of the training part used to measure G")
      ->capture_default_str();
  app.add_option("--log-base", config.log_base, "logarithm base of the heuristic bound")
      ->capture_default_str();
  app.add_option("--distance-floor", config.distance_floor, "lower clamp on |x - c|")
      ->capture_default_str();
  app.add_flag("--g-on-test", config.g_on_test, "measure G on the test part during growth");
  app.add_option("--partition", config.partition, "trace: partition index")->capture_default_str();
  app.add_option("--repeat", config.repeat, "trace: repeat index")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  if (generate_cmd->parsed()) config.command = "generate";
  else if (run_cmd->parsed()) config.command = "run";
  else if (trace_cmd->parsed()) config.command = "trace";

  if (config.command == "generate") return cmd_generate(config, out, err);
  if (config.command == "run") return cmd_run(config, out, err);
  return cmd_trace(config, out, err);
}

}  // namespace ntree::cli
