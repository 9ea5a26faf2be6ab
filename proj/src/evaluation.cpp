#include "ntree/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>
#include <thread>

#include "ntree/error.hpp"
#include "ntree/random.hpp"

namespace ntree {

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::kBaseline: return "baseline";
    case Mode::kCriterion: return "criterion";
    case Mode::kCriterionHeuristic: return "criterion-heuristic";
  }
  return "unknown";
}

Mode parse_mode(std::string_view text) {
  if (text == "baseline") return Mode::kBaseline;
  if (text == "criterion") return Mode::kCriterion;
  if (text == "criterion-heuristic") return Mode::kCriterionHeuristic;
  throw Error("unknown-mode", "unknown mode '" + std::string(text) +
                                  "' (valid: baseline, criterion, criterion-heuristic)");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::pair<Dataset, Dataset> validation_split(const Dataset& train, double fraction,
                                             std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error("invalid", "validation fraction must lie in (0, 1)");
  }
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < train.size(); ++i) by_class[train[i].label].push_back(i);

  Rng rng(seed);
  std::vector<std::size_t> grow_idx;
  std::vector<std::size_t> val_idx;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    auto take = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(members.size())));
    // Keep at least one pattern of the class on the growing side.
    if (take >= members.size() && !members.empty()) take = members.size() - 1;
    val_idx.insert(val_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
    grow_idx.insert(grow_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(take), members.end());
  }
  std::sort(grow_idx.begin(), grow_idx.end());
  std::sort(val_idx.begin(), val_idx.end());
  return {train.subset(grow_idx), train.subset(val_idx)};
}

RunOutcome run_baseline(const Dataset& train, const Dataset& test, const PocketConfig& pocket) {
  const auto start = Clock::now();
  RunOutcome out;
  out.tree = NeuralTree::create(train);
  while (true) {
    TraceRecord rec;
    rec.level = out.tree.levels_built();
    rec.units = out.tree.complexity();
    rec.j_c = j_c(train, out.tree.predict_all(train));
    out.state.trace.push_back(rec);
    if (!out.tree.grow_level(train, pocket)) break;
  }
  out.result.dataset = train.name();
  out.result.mode = Mode::kBaseline;
  out.result.seed = pocket.seed;
  out.result.units = out.tree.complexity();
  out.result.generalization = out.tree.accuracy(test);
  out.result.jc_trace = out.state.trace;
  out.result.wall_time = seconds_since(start);
  return out;
}

RunOutcome run_criterion(const Dataset& train, const Dataset& test, const PocketConfig& pocket,
                         const GrowthConfig& growth) {
  growth.validate();
  const auto start = Clock::now();

  Dataset grow;
  Dataset scoring;
  if (growth.g_on_test) {
    grow = train;
    scoring = test;
  } else {
    auto [g, v] = validation_split(train, growth.validation_fraction,
                                   derive_seed(pocket.seed, stream::kValidation));
    grow = std::move(g);
    scoring = std::move(v);
  }

  RunOutcome out;
  out.state.j_initial = j_initial(train, growth.distance_floor);
  out.tree = NeuralTree::create(grow);
  NeuralTree best = out.tree;

  while (true) {
    const std::size_t level = out.tree.levels_built();
    const double jc = j_c(train, out.tree.predict_all(train), growth.distance_floor);
    const double g = out.tree.accuracy(scoring);
    const auto decision = controller_observe(out.state, growth, level, out.tree.complexity(), jc, g);
    if (decision == GrowthDecision::kContinueNewBest) best = out.tree;
    if (decision == GrowthDecision::kStop) {
      out.tree = std::move(best);
      break;
    }
    if (growth.c_max < 1.0) {
      // Not even one unit fits in the budget.
      out.state.stopped = true;
      out.state.stop_level = level;
      out.state.trace.back().stopped = true;
      break;
    }
    if (!out.tree.grow_level(grow, pocket)) break;
  }

  out.result.dataset = train.name();
  out.result.mode = growth.use_heuristic ? Mode::kCriterionHeuristic : Mode::kCriterion;
  out.result.seed = pocket.seed;
  out.result.units = out.tree.complexity();
  out.result.generalization = out.tree.accuracy(test);
  out.result.epsilon_target = growth.epsilon;
  out.result.jc_trace = out.state.trace;
  out.result.wall_time = seconds_since(start);
  return out;
}

Experiment run_experiment(const Dataset& data, const CvPlan& plan, const ExperimentOptions& options) {
  if (options.mode != Mode::kBaseline && !options.growth) {
    throw Error("invalid", "criterion modes need a growth configuration");
  }
  const auto jobs = partition_cv(data, plan);
  std::vector<RunResult> results(jobs.size());
  std::vector<std::exception_ptr> failures(jobs.size());

  const auto run_job = [&](std::size_t j) {
    const CvJob& job = jobs[j];
    try {
      PocketConfig pocket = options.pocket;
      pocket.seed = job.seed;
      RunOutcome outcome;
      if (options.mode == Mode::kBaseline) {
        outcome = run_baseline(job.train, job.test, pocket);
      } else {
        GrowthConfig growth = *options.growth;
        growth.use_heuristic = options.mode == Mode::kCriterionHeuristic;
        growth = growth.with_training_size(static_cast<double>(job.train.size()), data.dimension());
        outcome = run_criterion(job.train, job.test, pocket, growth);
      }
      outcome.result.dataset = data.name();
      outcome.result.partition = job.partition;
      outcome.result.repeat = job.repeat;
      results[j] = std::move(outcome.result);
    } catch (...) {
      failures[j] = std::current_exception();
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, jobs.size()));
  if (workers == 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) run_job(j);
      });
    }
  }

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!failures[j]) continue;
    const std::string id = "job (partition " + std::to_string(jobs[j].partition) + ", repeat " +
                           std::to_string(jobs[j].repeat) + ")";
    try {
      std::rethrow_exception(failures[j]);
    } catch (const std::exception& e) {
      throw Error("job-failed", id + " failed: " + e.what());
    }
  }
  return Experiment{aggregate(results), std::move(results)};
}

ExperimentReport aggregate(const std::vector<RunResult>& results) {
  if (results.empty()) throw Error("empty", "cannot aggregate an empty run list");
  const auto& first = results.front();
  for (const auto& r : results) {
    if (r.dataset != first.dataset || r.mode != first.mode ||
        r.epsilon_target != first.epsilon_target) {
      throw Error("mixed-groups", "runs differ in dataset, mode or epsilon");
    }
  }
  const auto stats = [&](auto&& value) {
    double sum = 0.0;
    for (const auto& r : results) sum += value(r);
    const double n = static_cast<double>(results.size());
    const double mean = sum / n;
    if (results.size() < 2) return std::pair{mean, 0.0};
    double ss = 0.0;
    for (const auto& r : results) ss += (value(r) - mean) * (value(r) - mean);
    return std::pair{mean, std::sqrt(ss / (n - 1.0))};
  };

  ExperimentReport rep;
  rep.dataset = first.dataset;
  rep.mode = first.mode;
  rep.epsilon_target = first.epsilon_target;
  rep.run_count = results.size();
  std::tie(rep.mean_units, rep.std_units) =
      stats([](const RunResult& r) { return static_cast<double>(r.units); });
  std::tie(rep.mean_generalization_pct, rep.std_generalization_pct) =
      stats([](const RunResult& r) { return 100.0 * r.generalization; });
  return rep;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string optional_number(const std::optional<double>& v) { return v ? shortest(*v) : ""; }

}  // namespace

Tables emit_tables(const std::vector<ExperimentReport>& reports) {
  std::ostringstream md;
  std::ostringstream csv;
  md << "| Problem | Mode | Number of units | Std. dev. | Generalization (%) | Std. dev. | "
        "Error (%) | Runs |\n"
     << "|---|---|---:|---:|---:|---:|---:|---:|\n";
  csv << "problem,mode,units_mean,units_std,generalization_pct_mean,generalization_pct_std,"
         "error_pct,runs\n";
  for (const auto& r : reports) {
    const std::string error = r.epsilon_target ? fixed2(100.0 * *r.epsilon_target) : "";
    md << "| " << r.dataset << " | " << mode_name(r.mode) << " | " << fixed2(r.mean_units) << " | "
       << fixed2(r.std_units) << " | " << fixed2(r.mean_generalization_pct) << " | "
       << fixed2(r.std_generalization_pct) << " | " << (error.empty() ? "-" : error) << " | "
       << r.run_count << " |\n";
    csv << r.dataset << ',' << mode_name(r.mode) << ',' << fixed2(r.mean_units) << ','
        << fixed2(r.std_units) << ',' << fixed2(r.mean_generalization_pct) << ','
        << fixed2(r.std_generalization_pct) << ',' << error << ',' << r.run_count << '\n';
  }
  return {md.str(), csv.str()};
}

std::string runs_csv(const std::vector<RunResult>& runs) {
  std::ostringstream out;
  out << "dataset,mode,epsilon,partition,repeat,seed,units,generalization\n";
  for (const auto& r : runs) {
    out << r.dataset << ',' << mode_name(r.mode) << ',' << optional_number(r.epsilon_target) << ','
        << r.partition << ',' << r.repeat << ',' << r.seed << ',' << r.units << ','
        << shortest(r.generalization) << '\n';
  }
  return out.str();
}

std::string trace_csv(const std::vector<TraceRecord>& trace) {
  std::ostringstream out;
  out << "level,units,j_c,lambda,threshold,g_validation,merit,peak_fired,stopped\n";
  for (const auto& t : trace) {
    out << t.level << ',' << t.units << ',' << shortest(t.j_c) << ',' << optional_number(t.lambda)
        << ',' << optional_number(t.threshold) << ',' << optional_number(t.g) << ','
        << optional_number(t.merit) << ',' << (t.peak ? 1 : 0) << ',' << (t.stopped ? 1 : 0)
        << '\n';
  }
  return out.str();
}

std::string trace_file_name(const RunResult& run) {
  std::string name = run.dataset + "_" + std::string(mode_name(run.mode));
  if (run.epsilon_target) name += "_eps" + shortest(*run.epsilon_target);
  name += "_p" + std::to_string(run.partition) + "_r" + std::to_string(run.repeat) + ".csv";
  return name;
}

}  // namespace ntree
