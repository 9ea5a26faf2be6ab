#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "ntree/error.hpp"
#include "ntree/evaluation.hpp"
#include "ntree/random.hpp"

using namespace ntree;
using testing::make_dataset;

namespace {

RunResult run_with(std::size_t units, double g, Mode mode = Mode::kBaseline,
                   std::optional<double> eps = std::nullopt) {
  RunResult r;
  r.dataset = "d";
  r.mode = mode;
  r.units = units;
  r.generalization = g;
  r.epsilon_target = eps;
  return r;
}

std::string code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

Dataset noisy_gauss(std::uint64_t seed, std::size_t n) {
  GaussSpec spec;
  spec.dimension = 2;
  spec.n_per_class = n;
  spec.sigma0 = 1.0;
  spec.sigma1 = 2.0;
  spec.seed = seed;
  return generate_gauss(spec);
}

}  // namespace

TEST_CASE("mode names") {
  CHECK(mode_name(Mode::kCriterionHeuristic) == "criterion-heuristic");
  CHECK(parse_mode("criterion") == Mode::kCriterion);
  CHECK(code_of([] { parse_mode("greedy"); }) == "unknown-mode");
}

TEST_CASE("aggregate") {
  SUBCASE("two runs") {
    const auto rep = aggregate({run_with(10, 0.80), run_with(20, 0.90)});
    CHECK(rep.mean_units == 15.0);
    CHECK(rep.std_units == doctest::Approx(7.0710678118654755).epsilon(1e-12));
    CHECK(rep.mean_generalization_pct == doctest::Approx(85.0));
    CHECK(rep.std_generalization_pct == doctest::Approx(7.0710678118654755).epsilon(1e-9));
    CHECK(rep.run_count == 2);
  }
  SUBCASE("a single run has zero spread") {
    const auto rep = aggregate({run_with(4, 0.5)});
    CHECK(rep.std_units == 0.0);
    CHECK(rep.std_generalization_pct == 0.0);
  }
  SUBCASE("matches the oracle sample std") {
    std::vector<RunResult> runs;
    std::vector<double> units;
    for (std::size_t i = 0; i < 60; ++i) {
      runs.push_back(run_with((i * 37) % 23, 0.5));
      units.push_back(static_cast<double>((i * 37) % 23));
    }
    CHECK(aggregate(runs).std_units == doctest::Approx(oracle::sample_std(units)).epsilon(1e-12));
  }
  SUBCASE("errors") {
    CHECK(code_of([] { aggregate({}); }) == "empty");
    CHECK(code_of([] {
            aggregate({run_with(1, 0.5), run_with(1, 0.5, Mode::kCriterion, 0.1)});
          }) == "mixed-groups");
    CHECK(code_of([] {
            aggregate({run_with(1, 0.5, Mode::kCriterion, 0.1),
                       run_with(1, 0.5, Mode::kCriterion, 0.15)});
          }) == "mixed-groups");
  }
}

TEST_CASE("emit_tables") {
  SUBCASE("baseline row") {
    ExperimentReport rep;
    rep.dataset = "gauss2";
    rep.mean_units = 515.1;
    rep.std_units = 13.689;
    rep.mean_generalization_pct = 66.2;
    rep.std_generalization_pct = 1.234;
    rep.run_count = 10;
    const auto t = emit_tables({rep});
    CHECK(t.csv ==
          "problem,mode,units_mean,units_std,generalization_pct_mean,generalization_pct_std,"
          "error_pct,runs\ngauss2,baseline,515.10,13.69,66.20,1.23,,10\n");
    CHECK(t.markdown.find("| gauss2 | baseline | 515.10 | 13.69 | 66.20 | 1.23 | - | 10 |") !=
          std::string::npos);
  }
  SUBCASE("three phoneme rows keep their order") {
    std::vector<ExperimentReport> reps(3);
    reps[0].dataset = reps[1].dataset = reps[2].dataset = "phoneme";
    reps[1].mode = reps[2].mode = Mode::kCriterion;
    reps[1].epsilon_target = 0.15;
    reps[2].epsilon_target = 0.10;
    const auto t = emit_tables(reps);
    const auto first = t.csv.find("phoneme,baseline");
    const auto second = t.csv.find("phoneme,criterion,0.00,0.00,0.00,0.00,15.00,0");
    const auto third = t.csv.find("phoneme,criterion,0.00,0.00,0.00,0.00,10.00,0");
    REQUIRE(first != std::string::npos);
    REQUIRE(second != std::string::npos);
    REQUIRE(third != std::string::npos);
    CHECK(first < second);
    CHECK(second < third);
  }
  SUBCASE("header only") {
    const auto t = emit_tables({});
    CHECK(std::count(t.csv.begin(), t.csv.end(), '\n') == 1);
    CHECK(std::count(t.markdown.begin(), t.markdown.end(), '\n') == 2);
  }
}

TEST_CASE("csv renderers") {
  auto r = run_with(3, 0.625, Mode::kCriterion, 0.15);
  r.partition = 2;
  r.repeat = 1;
  r.seed = 99;
  CHECK(runs_csv({r}) ==
        "dataset,mode,epsilon,partition,repeat,seed,units,generalization\n"
        "d,criterion,0.15,2,1,99,3,0.625\n");
  CHECK(trace_file_name(r) == "d_criterion_eps0.15_p2_r1.csv");
  CHECK(trace_file_name(run_with(1, 0.5)) == "d_baseline_p0_r0.csv");

  TraceRecord t;
  t.level = 1;
  t.units = 1;
  t.j_c = 0.5;
  t.lambda = 2.0;
  t.threshold = 1.0;
  CHECK(trace_csv({t}) ==
        "level,units,j_c,lambda,threshold,g_validation,merit,peak_fired,stopped\n"
        "1,1,0.5,2,1,,,0,0\n");
}

TEST_CASE("validation_split") {
  const auto data = noisy_gauss(3, 50);
  const auto [grow, val] = validation_split(data, 0.1, 7);
  CHECK(grow.size() + val.size() == data.size());
  CHECK(val.size() == 10);
  CHECK(val.class_counts() == std::array<std::size_t, 2>{5, 5});
  const auto again = validation_split(data, 0.1, 7);
  CHECK(again.first == grow);
  CHECK(again.second == val);

  // Tiny classes keep one pattern in the growing set.
  const auto tiny = make_dataset({{{0}, 0}, {{1}, 1}, {{2}, 1}});
  const auto [tg, tv] = validation_split(tiny, 0.9, 1);
  CHECK(tg.class_counts()[0] == 1);
  CHECK(tg.class_counts()[1] >= 1);
  CHECK(code_of([&] { validation_split(tiny, 1.0, 1); }) == "invalid");
}

TEST_CASE("run_baseline") {
  const auto train = noisy_gauss(1, 60);
  const auto test = noisy_gauss(2, 40);
  const auto out = run_baseline(train, test, PocketConfig{500, 4});
  CHECK(out.result.units == out.tree.complexity());
  CHECK(out.result.generalization == out.tree.accuracy(test));
  REQUIRE(out.result.jc_trace.size() == out.tree.levels_built() + 1);
  // Growth ends only when every impure leaf has been given up on.
  CHECK(out.tree.expandable_leaves(train).empty());
  for (const auto& node : out.tree.nodes()) {
    if (!node.is_leaf()) continue;
    std::array<int, 2> c{};
    for (std::size_t i : node.assigned) ++c[train[i].label];
    if (c[0] > 0 && c[1] > 0) CHECK(std::get<LeafNode>(node.kind).unsplittable);
  }
  if (out.tree.accuracy(train) == 1.0) CHECK(out.result.jc_trace.back().j_c == 0.0);
  for (const auto& rec : out.result.jc_trace) CHECK_FALSE(rec.lambda.has_value());
}

TEST_CASE("run_criterion") {
  const auto train = noisy_gauss(1, 60);
  const auto test = noisy_gauss(2, 40);
  const PocketConfig pocket{500, 4};

  SUBCASE("a budget below one unit keeps the single leaf") {
    // p eps / (d + 1) = 120 * 0.02 / 3 = 0.8
    const auto growth = GrowthConfig::make(0.02, 120, 2, false);
    REQUIRE(growth.c_max < 1.0);
    const auto out = run_criterion(train, test, pocket, growth);
    CHECK(out.result.units == 0);
    CHECK(out.state.stopped);
    CHECK(out.state.trace.size() == 1);
  }
  SUBCASE("separable data stays within the budget") {
    std::mt19937_64 rng(12);
    const auto sep = testing::separable_dataset(rng, 120, 0.1);
    const auto sep_test = testing::separable_dataset(rng, 40, 0.1);
    const auto growth = GrowthConfig::make(0.1, 120, 2, false);
    const auto out = run_criterion(sep, sep_test, pocket, growth);
    CHECK(static_cast<double>(out.result.units) <= growth.c_max);
  }
  SUBCASE("the test part does not influence growth") {
    const auto growth = GrowthConfig::make(0.3, 120, 2, false);
    const auto a = run_criterion(train, test, pocket, growth);
    const auto b = run_criterion(train, noisy_gauss(9, 5), pocket, growth);
    CHECK(a.tree == b.tree);
    CHECK(a.state.trace == b.state.trace);
  }
  SUBCASE("reported units match the kept tree and the trace") {
    const auto growth = GrowthConfig::make(0.3, 120, 2, false);
    const auto out = run_criterion(train, test, pocket, growth);
    CHECK(out.result.units == out.tree.complexity());
    CHECK(out.result.epsilon_target == 0.3);
    if (out.state.stopped) {
      REQUIRE(out.state.stop_level.has_value());
      bool found = false;
      for (const auto& rec : out.state.trace)
        if (rec.level == *out.state.stop_level) found = rec.units == out.result.units;
      CHECK(found);
      const auto base = run_baseline(validation_split(train, 0.1, derive_seed(4, stream::kValidation)).first,
                                     test, pocket);
      CHECK(out.result.units <= base.result.units);
    }
  }
  SUBCASE("one-class training is rejected") {
    const auto one = make_dataset({{{0, 0}, 1}, {{1, 1}, 1}});
    CHECK(code_of([&] { run_criterion(one, one, pocket, GrowthConfig::make(0.3, 100, 2, false)); }) ==
          "one-class");
  }
}

TEST_CASE("run_experiment") {
  SUBCASE("k=2 repeats=1 on a tiny set") {
    Dataset data("tiny", 1);
    for (int i = 0; i < 20; ++i) data.add({{double(i)}, i % 3 == 0 ? 1 : 0});
    ExperimentOptions opt;
    opt.pocket = PocketConfig{200, 0};
    const auto exp = run_experiment(data, CvPlan{2, 1, 5}, opt);
    REQUIRE(exp.runs.size() == 2);
    CHECK(exp.runs[0].partition == 0);
    CHECK(exp.runs[1].partition == 1);
    CHECK(exp.report.run_count == 2);
    CHECK(exp.report.dataset == "tiny");
  }
  SUBCASE("deterministic and independent of the worker count") {
    const auto data = noisy_gauss(6, 60);
    ExperimentOptions opt;
    opt.mode = Mode::kCriterion;
    opt.pocket = PocketConfig{300, 0};
    opt.growth = GrowthConfig::make(0.3, 100, 2, false);
    const CvPlan plan{3, 2, 11};
    const auto a = run_experiment(data, plan, opt);
    const auto b = run_experiment(data, plan, opt);
    opt.workers = 4;
    const auto c = run_experiment(data, plan, opt);
    CHECK(runs_csv(a.runs) == runs_csv(b.runs));
    CHECK(runs_csv(a.runs) == runs_csv(c.runs));
    for (std::size_t i = 0; i < a.runs.size(); ++i) CHECK(a.runs[i].jc_trace == c.runs[i].jc_trace);
  }
  SUBCASE("criterion needs a growth configuration") {
    CHECK(code_of([] {
            ExperimentOptions o;
            o.mode = Mode::kCriterion;
            run_experiment(noisy_gauss(1, 10), CvPlan{2, 1, 1}, o);
          }) == "invalid");
  }
  SUBCASE("job failures name the job") {
    Dataset data("dup", 1);
    for (int i = 0; i < 10; ++i) data.add({{0.0}, 1});
    data.add({{0.0}, 0});  // the fold holding it leaves a one-class training part
    ExperimentOptions opt;
    opt.mode = Mode::kCriterion;
    opt.growth = GrowthConfig::make(0.3, 100, 1, false);
    try {
      run_experiment(data, CvPlan{2, 1, 1}, opt);
      FAIL("expected a failure");
    } catch (const Error& e) {
      CHECK(e.code() == "job-failed");
      CHECK(std::string(e.what()).find("partition") != std::string::npos);
    }
  }
}
