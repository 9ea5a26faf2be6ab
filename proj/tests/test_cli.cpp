#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ntree/cli.hpp"
#include "ntree/dataset.hpp"
#include "ntree/tree.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ntree");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = ntree::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ntree_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// A small two-class CSV that keeps the run commands fast.
fs::path small_csv() {
  const auto path = fs::temp_directory_path() / "ntree_cli_small.csv";
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  ntree::Dataset data("small", 2);
  for (int i = 0; i < 80; ++i) {
    const double s = i % 2 == 0 ? 1.0 : 2.0;
    data.add({{s * n(rng), s * n(rng)}, i % 2});
  }
  ntree::write_csv(data, path);
  return path;
}

}  // namespace

TEST_CASE("generate") {
  const auto dir = fresh_dir("generate");
  for (const std::string name : {"gauss2", "clouds"}) {
    const auto path = dir / (name + ".csv");
    const auto r = cli({"generate", "--dataset", name, "--out", path.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("Monte-Carlo Bayes error") != std::string::npos);
    const auto data = ntree::load_csv(path);
    CHECK(data.size() == 5000);
    CHECK(data.dimension() == 2);
  }
  const auto desk = cli({"generate", "--dataset", "gauss4", "--scale", "desk", "--out",
                         (dir / "g4.csv").string()});
  REQUIRE(desk.code == 0);
  CHECK(ntree::load_csv(dir / "g4.csv").size() == 1000);

  const auto bad = cli({"generate", "--dataset", "gauss3", "--out", (dir / "x.csv").string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("gauss2") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "x.csv"));
}

TEST_CASE("run writes tables, runs and traces") {
  const auto dir = fresh_dir("run");
  const auto csv = small_csv();
  const auto r = cli({"run", "--csv", csv.string(), "--mode", "baseline", "--mode", "criterion",
                      "--epsilon", "0.3", "--k", "2", "--repeats", "2", "--pocket-updates", "300",
                      "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("| Problem | Mode |") != std::string::npos);
  CHECK(fs::exists(dir / "tables.md"));
  const auto tables = lines_of(slurp(dir / "tables.csv"));
  REQUIRE(tables.size() == 3);
  CHECK(tables[1].rfind("ntree_cli_small,baseline,", 0) == 0);
  CHECK(tables[2].rfind("ntree_cli_small,criterion,", 0) == 0);
  const auto runs = lines_of(slurp(dir / "runs.csv"));
  CHECK(runs.size() == 1 + 2 * 4);
  std::size_t traces = 0;
  for (const auto& e : fs::directory_iterator(dir / "traces")) {
    (void)e;
    ++traces;
  }
  CHECK(traces == 8);
  CHECK(fs::exists(dir / "traces" / "ntree_cli_small_criterion_eps0.3_p1_r1.csv"));

  SUBCASE("runs.csv is reproducible, also with more workers") {
    const auto dir2 = fresh_dir("run2");
    const auto again = cli({"run", "--csv", csv.string(), "--mode", "baseline", "--mode",
                            "criterion", "--epsilon", "0.3", "--k", "2", "--repeats", "2",
                            "--pocket-updates", "300", "--workers", "3", "--out", dir2.string()});
    REQUIRE(again.code == 0);
    CHECK(slurp(dir / "runs.csv") == slurp(dir2 / "runs.csv"));
    CHECK(slurp(dir / "tables.csv") == slurp(dir2 / "tables.csv"));
  }
}

TEST_CASE("run failures") {
  const auto dir = fresh_dir("fail");
  SUBCASE("missing csv names the path") {
    const auto r = cli({"run", "--csv", "/nonexistent/phoneme.csv", "--mode", "baseline", "--out",
                        dir.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("/nonexistent/phoneme.csv") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "runs.csv"));
  }
  SUBCASE("unknown flag") {
    const auto r = cli({"run", "--bogus", "1"});
    CHECK(r.code == 2);
  }
  SUBCASE("criterion without epsilon") {
    const auto r = cli({"run", "--dataset", "gauss2", "--mode", "criterion", "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("--epsilon") != std::string::npos);
  }
  SUBCASE("baseline with epsilon") {
    const auto r = cli({"run", "--dataset", "gauss2", "--mode", "baseline", "--epsilon", "0.2",
                        "--out", dir.string()});
    CHECK(r.code == 2);
  }
  SUBCASE("unknown mode") {
    const auto r = cli({"run", "--dataset", "gauss2", "--mode", "greedy", "--out", dir.string()});
    CHECK(r.code == 2);
  }
  SUBCASE("no subcommand") { CHECK(cli({}).code == 2); }
}

TEST_CASE("help lists the flags") {
  const auto r = cli({"--help"});
  CHECK(r.code == 0);
  for (const char* flag : {"--dataset", "--csv", "--mode", "--epsilon", "--k", "--repeats",
                           "--pocket-updates", "--seed", "--scale", "--out", "--workers",
                           "--validation-fraction", "--log-base", "--distance-floor",
                           "--g-on-test", "--config"}) {
    CHECK_MESSAGE(r.out.find(flag) != std::string::npos, flag);
  }
}

TEST_CASE("config file with command-line precedence") {
  const auto dir = fresh_dir("config");
  fs::create_directories(dir);
  const auto csv = small_csv();
  const auto cfg = dir / "run.ini";
  {
    std::ofstream f(cfg);
    f << "csv=" << csv.string() << "\nmode=baseline\nk=2\nrepeats=3\npocket-updates=200\n";
  }
  const auto out_dir = dir / "out";
  const auto r = cli({"run", "--config", cfg.string(), "--repeats", "1", "--out", out_dir.string()});
  REQUIRE(r.code == 0);
  // k=2 from the file, repeats=1 from the command line.
  CHECK(lines_of(slurp(out_dir / "runs.csv")).size() == 1 + 2);
}

TEST_CASE("trace") {
  const auto dir = fresh_dir("trace");
  const auto csv = small_csv();
  const auto r = cli({"trace", "--csv", csv.string(), "--mode", "criterion", "--epsilon", "0.3",
                      "--k", "2", "--repeats", "1", "--pocket-updates", "300", "--partition", "1",
                      "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("c_max=") != std::string::npos);
  CHECK(r.out.find("j_initial=") != std::string::npos);
  const auto rows = lines_of(slurp(dir / "trace.csv"));
  REQUIRE(rows.size() >= 2);
  CHECK(rows[0] == "level,units,j_c,lambda,threshold,g_validation,merit,peak_fired,stopped");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::count(rows[i].begin(), rows[i].end(), ',') == 8);
    CHECK(rows[i].rfind(std::to_string(i - 1) + ",", 0) == 0);
  }
  const auto tree = ntree::NeuralTree::deserialize(slurp(dir / "tree.txt"));
  CHECK(tree.dimension() == 2);

  const auto bad = cli({"trace", "--csv", csv.string(), "--mode", "baseline", "--k", "2",
                        "--repeats", "1", "--partition", "5", "--out", dir.string()});
  CHECK(bad.code == 2);
}
