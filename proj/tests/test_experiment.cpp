#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bbopt/bench.hpp"
#include "bbopt/experiment.hpp"

using namespace bbopt;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kConfigs = BBOPT_CONFIG_DIR;

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("bbopt_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

json smoke_json() {
  return json::parse(R"({
    "name": "smoke",
    "objective": {"objective": "sphere", "dim": 3, "noise_sigma": 0.01},
    "schedules": {"a0": 0.1, "c0": 0.05},
    "optimizer": {"budget_evaluations": 40},
    "run": {"repeats": 2, "base_seed": 3, "initial": {"theta": [0.5, -0.5, 0.25]}},
    "algorithms": [
      {"name": "AdamSPSA", "estimator": {"estimator": "spsa"}},
      {"name": "FDSA", "update_rule": "sgd", "estimator": {"estimator": "fdsa"}}
    ]
  })");
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BBOPT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, BenchmarkConfigParses) {
  const auto cfg = load_experiment_config(kConfigs / "benchmark_20d.json");
  EXPECT_EQ(cfg.objective, LossKind::lx);
  EXPECT_EQ(cfg.dim(), 20u);
  EXPECT_EQ(cfg.budget, 480u);
  EXPECT_EQ(cfg.repeats, 5u);
  EXPECT_EQ(cfg.objective_cfg.shots, 1000u);
  ASSERT_EQ(cfg.algorithms.size(), 6u);
  for (const auto& a : cfg.algorithms) {
    EXPECT_DOUBLE_EQ(a.schedules.a0, 0.032);
    EXPECT_DOUBLE_EQ(a.schedules.c0, 0.016);
    if (a.estimator.kind == EstimatorKind::rsgf) {
      EXPECT_EQ(a.estimator.n_samples, 2u);
    }
  }
  const auto x0 = cfg.initial.resolve(20);
  for (double x : x0) {
    EXPECT_GE(x, -0.1);
    EXPECT_LE(x, 0.1);
  }
  EXPECT_EQ(x0, cfg.initial.resolve(20));
}

TEST(Config, LandscapeConfigParses) {
  const json j = load_json(kConfigs / "landscape_2d.json");
  const auto cfg = experiment_from_json(j);
  EXPECT_EQ(cfg.dim(), 2u);
  EXPECT_EQ(cfg.objective_cfg.active_dims, (std::vector<std::size_t>{0, 10}));
  const auto scan = scan_from_json(j.at("scan"));
  EXPECT_EQ(scan.first.points, 81u);
}

TEST(Config, Defaults) {
  const auto cfg = experiment_from_json(json::object());
  ASSERT_EQ(cfg.algorithms.size(), 1u);
  EXPECT_EQ(cfg.algorithms[0].name, "adam-spsa");
  EXPECT_EQ(cfg.budget, 480u);
  EXPECT_TRUE(cfg.exact_monitor);
}

TEST(Config, Errors) {
  auto expect_error = [](json j) { EXPECT_THROW(experiment_from_json(j), ConfigError) << j.dump(); };
  expect_error(json::parse(R"({"bogus": 1})"));
  expect_error(json::parse(R"({"schedules": {"a0": -1}})"));
  expect_error(json::parse(R"({"schedules": {"a0": "big"}})"));
  expect_error(json::parse(R"({"optimizer": {"update_rule": "rmsprop"}})"));
  expect_error(json::parse(R"({"estimator": {"estimator": "spsa", "n_samples": 0}})"));
  expect_error(json::parse(R"({"run": {"repeats": 0}})"));
  expect_error(json::parse(R"({"run": {"monitor": "sometimes"}})"));
  expect_error(json::parse(R"({"run": {"initial": {"uniform": [1, 0]}}})"));
  expect_error(json::parse(R"({"run": {"initial": {"theta": [1, 0]}}})"));
  expect_error(json::parse(R"({"algorithms": [{"name": "a"}, {"name": "a"}]})"));
  expect_error(json::parse(R"({"algorithms": []})"));
  expect_error(json::parse(R"({"name": "../escape"})"));
  expect_error(json::parse(R"({"objective": {"objective": "lz"}})"));
  expect_error(json::parse(R"({"objective": {"k_list": [2, 1]}})"));
  expect_error(json::parse(R"({"optimizer": {"clip_box": {"low": 1, "high": 0}}})"));
}

TEST(Config, FileErrorsAndComments) {
  TempDir dir;
  EXPECT_THROW(load_experiment_config(dir.path() / "missing.json"), ConfigError);
  std::ofstream(dir.path() / "bad.json") << "{ \"name\": ";
  EXPECT_THROW(load_experiment_config(dir.path() / "bad.json"), ConfigError);
  std::ofstream(dir.path() / "commented.json") << "{\n  // pinned for the smoke run\n  \"name\": \"c\"\n}\n";
  EXPECT_EQ(load_experiment_config(dir.path() / "commented.json").name, "c");
}

TEST(Experiment, WritesOneCsvPerRun) {
  TempDir dir;
  auto cfg = load_experiment_config(kConfigs / "benchmark_20d.json");
  cfg.output_dir = dir.path();
  const auto res = run_experiment(cfg);
  EXPECT_TRUE(res.warnings.empty());
  const fs::path out = dir.path() / cfg.name;
  std::size_t csvs = 0;
  for (const auto& e : fs::directory_iterator(out)) csvs += e.path().extension() == ".csv";
  EXPECT_EQ(csvs, 30u);
  EXPECT_TRUE(fs::exists(out / "summary.jsonl"));
  EXPECT_TRUE(fs::exists(out / "final_stats.json"));
  // 480 evaluations: 12 FDSA updates, 240 SPSA or RSGF(N=2) updates, plus header and row 0.
  EXPECT_EQ(count_lines(slurp(out / "FDSA_r0.csv")), 14u);
  EXPECT_EQ(count_lines(slurp(out / "AdamSPSA_r4.csv")), 242u);
  EXPECT_EQ(count_lines(slurp(out / "AdamRSGF_r2.csv")), 242u);

  const json stats = json::parse(slurp(out / "final_stats.json"));
  EXPECT_EQ(stats.at("algorithms").size(), 6u);
  EXPECT_TRUE(stats.at("failed_runs").empty());
}

TEST(Experiment, CsvLayout) {
  TempDir dir;
  auto cfg = experiment_from_json(smoke_json());
  cfg.output_dir = dir.path();
  run_experiment(cfg);
  const std::string text = slurp(dir.path() / "smoke" / "AdamSPSA_r0.csv");
  std::istringstream in(text);
  std::string header, row0, row1;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row1);
  EXPECT_EQ(header, "run_id,iteration,n_evals,loss,a_t,c_t,beta_t,theta_0,theta_1,theta_2");
  EXPECT_EQ(row0.rfind("AdamSPSA_r0,0,0,", 0), 0u);
  EXPECT_NE(row0.find(",0,0,0,0.5,-0.5,0.25"), std::string::npos);
  EXPECT_EQ(row1.rfind("AdamSPSA_r0,1,2,", 0), 0u);
}

TEST(Experiment, ByteIdenticalReruns) {
  TempDir a, b;
  auto cfg = experiment_from_json(smoke_json());
  cfg.output_dir = a.path();
  run_experiment(cfg);
  cfg.output_dir = b.path();
  run_experiment(cfg);
  for (const char* f : {"AdamSPSA_r0.csv", "AdamSPSA_r1.csv", "FDSA_r1.csv", "summary.jsonl", "final_stats.json"})
    EXPECT_EQ(slurp(a.path() / "smoke" / f), slurp(b.path() / "smoke" / f)) << f;
  EXPECT_NE(slurp(a.path() / "smoke" / "AdamSPSA_r0.csv").substr(20),
            slurp(a.path() / "smoke" / "AdamSPSA_r1.csv").substr(20));
}

TEST(Experiment, SummaryRoundTrip) {
  TempDir dir;
  auto cfg = experiment_from_json(smoke_json());
  cfg.output_dir = dir.path();
  const auto res = run_experiment(cfg);
  for (const auto& s : res.summaries) {
    std::vector<Trajectory> back;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
      const auto csv = read_trajectory_csv(dir.path() / "smoke" / (run_id(s.algorithm, r) + ".csv"));
      EXPECT_EQ(csv.run_id, run_id(s.algorithm, r));
      back.push_back(to_trajectory(csv));
    }
    std::vector<const Trajectory*> ptrs;
    for (const auto& t : back) ptrs.push_back(&t);
    const auto rows = summarize(ptrs);
    ASSERT_EQ(rows.size(), s.rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      EXPECT_EQ(rows[i].n_evals, s.rows[i].n_evals);
      EXPECT_EQ(rows[i].loss_mean, s.rows[i].loss_mean);
      EXPECT_EQ(rows[i].loss_std, s.rows[i].loss_std);
    }
  }
  std::istringstream in(slurp(dir.path() / "smoke" / "summary.jsonl"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind(R"({"algorithm":"AdamSPSA","n_evals":0,"loss_mean":)", 0), 0u);
}

TEST(Experiment, SummaryStatistics) {
  Trajectory a, b;
  a.initial_loss = 1.0;
  b.initial_loss = 3.0;
  a.records.push_back({1, 2, {}, 0.5, 0, 0, 0});
  b.records.push_back({1, 2, {}, 1.5, 0, 0, 0});
  b.records.push_back({2, 4, {}, 1.0, 0, 0, 0});
  const auto rows = summarize({&a, &b});
  ASSERT_EQ(rows.size(), 2u);  // n_evals 4 is not in every run
  EXPECT_DOUBLE_EQ(rows[0].loss_mean, 2.0);
  EXPECT_DOUBLE_EQ(rows[0].loss_std, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(rows[1].loss_mean, 1.0);
  EXPECT_EQ(rows[1].n_runs, 2u);
  const auto fs_ = final_stats({&a, &b});
  EXPECT_EQ(fs_.n_completed, 2u);
  EXPECT_DOUBLE_EQ(fs_.median, 0.75);
}

TEST(Experiment, ZeroBudget) {
  TempDir dir;
  json j = smoke_json();
  j["optimizer"]["budget_evaluations"] = 0;
  auto cfg = experiment_from_json(j);
  cfg.output_dir = dir.path();
  const auto res = run_experiment(cfg);
  EXPECT_EQ(count_lines(slurp(dir.path() / "smoke" / "FDSA_r0.csv")), 2u);
  for (const auto& s : res.summaries) {
    ASSERT_EQ(s.rows.size(), 1u);
    EXPECT_EQ(s.rows[0].n_evals, 0u);
    EXPECT_DOUBLE_EQ(s.final_stats.median, 0.5625);
  }
}

TEST(Scan, SmallGrids) {
  ObjectiveConfig cfg;
  cfg.active_dims = {0, 10};
  ScanSpec spec{{0.0, 0.5, 2}, {-0.1, 0.1, 2}};
  const auto s = landscape_scan(spec, LossKind::l_combined, cfg);
  EXPECT_EQ(s.first_values, (std::vector<double>{0.0, 0.5}));
  EXPECT_EQ(s.second_values, (std::vector<double>{-0.1, 0.1}));
  ASSERT_EQ(s.loss.size(), 2u);
  ASSERT_EQ(s.loss[0].size(), 2u);
  EXPECT_LT(s.loss[0][1], s.loss[0][0]);  // A1 = 0.5 is near X90

  const auto one = landscape_scan({{0.0, 0.0, 1}, {0.0, 0.0, 1}}, LossKind::l_combined, cfg);
  ASSERT_EQ(one.loss.size(), 1u);
  EXPECT_NEAR(one.loss[0][0], 0.125, 1e-12);
  const std::string csv = scan_csv(one);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "second\\first,0");
}

TEST(Scan, Errors) {
  ObjectiveConfig cfg;
  cfg.active_dims = {0, 10};
  ScanSpec big{{0, 1, 1000}, {0, 1, 1000}};
  EXPECT_THROW(landscape_scan(big, LossKind::lx, cfg), std::invalid_argument);
  cfg.active_dims = {0};
  EXPECT_THROW(landscape_scan({{0, 1, 2}, {0, 1, 2}}, LossKind::lx, cfg), std::invalid_argument);
  EXPECT_THROW(scan_from_json(json::parse(R"({"first": [0, 1]})")), ConfigError);
  EXPECT_THROW(scan_from_json(json::parse(R"({"first": [0, 1, 2], "second": [0, 1, 2], "third": 1})")), ConfigError);
}

TEST(Tuneup, BestIterateTiesToEarliest) {
  Trajectory t;
  t.initial_loss = 1.0;
  for (double l : {0.5, 0.3, 0.3, 0.4}) t.records.push_back({t.records.size() + 1, 0, {}, l, 0, 0, 0});
  EXPECT_EQ(best_iterate(t), 2u);
  t.initial_loss = 0.1;
  EXPECT_EQ(best_iterate(t), 0u);
}

TEST(Tuneup, ConfigDefaults) {
  const auto cfg = tuneup_from_json(json::object(), 4);
  EXPECT_EQ(cfg.seed, 4u);
  EXPECT_EQ(cfg.rough.algorithm.name, "AdamRSGF");
  EXPECT_EQ(cfg.rough.algorithm.estimator.n_samples, 2u);
  EXPECT_EQ(cfg.rough.budget, 400u);
  EXPECT_DOUBLE_EQ(cfg.fine.algorithm.schedules.a0, 0.004);
  EXPECT_DOUBLE_EQ(cfg.fine.algorithm.schedules.lambda, 0.1);
  const auto spsa = tuneup_from_json(json::parse(R"({"tuneup": {"estimator": "spsa"}})"), 0);
  EXPECT_DOUBLE_EQ(spsa.fine.algorithm.schedules.c0, 0.002);
  EXPECT_THROW(tuneup_from_json(json::parse(R"({"tuneup": {"stages": 3}})"), 0), ConfigError);
  EXPECT_THROW(tuneup_from_json(json::parse(R"({"tuneup": {"rough_result": [0.1]}})"), 0), ConfigError);
}

TEST(Tuneup, ShortPipeline) {
  TuneupConfig cfg = tuneup_from_json(json::parse(R"({
    "simulator": {"rb_lengths": [0, 1, 4, 16, 64], "rb_sequences": 2},
    "tuneup": {"rough": {"budget_evaluations": 20}, "fine": {"budget_evaluations": 4}, "irb_sequences": 3}
  })"), 1);
  const auto r = two_stage_tuneup(cfg);
  ASSERT_FALSE(r.failure) << *r.failure;
  ASSERT_TRUE(r.rough && r.fine);
  EXPECT_EQ(r.rough->trajectory.records.size(), 10u);
  EXPECT_EQ(r.fine->trajectory.records.size(), 2u);
  EXPECT_LE(r.rough->best_loss, r.rough->trajectory.initial_loss);
  ASSERT_TRUE(r.reference_fit && r.interleaved_fit);
  EXPECT_GT(r.direct_fidelity, 0.0);
  EXPECT_LE(r.direct_fidelity, 1.0);
  const auto report = tuneup_report(r);
  EXPECT_TRUE(report.contains("irb_fidelity"));
  EXPECT_TRUE(report.contains("direct_fidelity"));
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  const std::string out = " --out " + dir.path().string();
  EXPECT_EQ(run_cli("version"), 0);
  EXPECT_EQ(run_cli("validate"), 0);
  EXPECT_EQ(run_cli("validate --config " + (kConfigs / "benchmark_20d.json").string()), 0);
  EXPECT_EQ(run_cli("run --config " + (kConfigs / "sphere_smoke.json").string() + out), 0);
  EXPECT_TRUE(fs::exists(dir.path() / "sphere_smoke" / "summary.jsonl"));

  std::ofstream(dir.path() / "bad.json") << R"({"schedules": {"a0": -1}})";
  EXPECT_EQ(run_cli("run --config " + (dir.path() / "bad.json").string() + out), 1);
  std::ofstream(dir.path() / "broken.json") << "{";
  EXPECT_EQ(run_cli("run --config " + (dir.path() / "broken.json").string() + out), 1);
  EXPECT_EQ(run_cli("run --config " + (dir.path() / "missing.json").string()), 1);
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("run --repeats 0 --config " + (kConfigs / "sphere_smoke.json").string() + out), 1);
  EXPECT_EQ(run_cli("scan --config " + (kConfigs / "sphere_smoke.json").string() + out), 1);
}

TEST(Cli, ScanWritesMatrix) {
  TempDir dir;
  std::ofstream(dir.path() / "scan.json") << R"({
    "name": "tiny",
    "objective": {"objective": "l_combined", "active_dims": [0, 10]},
    "scan": {"first": [0, 0.5, 3], "second": [-0.1, 0.1, 2]}
  })";
  ASSERT_EQ(run_cli("scan --config " + (dir.path() / "scan.json").string() + " --out " + dir.path().string()), 0);
  const std::string csv = slurp(dir.path() / "tiny" / "scan.csv");
  EXPECT_EQ(count_lines(csv), 3u);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "second\\first,0,0.25,0.5");
}
