#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "cfc/bench.hpp"
#include "cfc/config.hpp"
#include "cfc/error.hpp"
#include "cfc/io.hpp"
#include "cfc/validation.hpp"

using namespace cfc;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / ("cfc_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                                    "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
  fs::create_directories(dir);
  return dir;
}

std::string expect_config_error(const Overrides& ov) {
  try {
    apply_overrides(RunConfig{}, ov);
  } catch (const ConfigError& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected ConfigError";
  return "";
}

TrialRecord record(std::uint64_t seed, bool success, double pos, double angle) {
  TrialRecord r;
  r.seed = seed;
  if (success) r.success_step = 10;
  r.final_position_error = pos;
  r.final_angle_error = angle;
  r.final_quat_error = std::pow(std::sin(angle / 2), 2);
  TrialStep s;
  s.solve_seconds = 0.002;
  r.steps.push_back(s);
  return r;
}

SceneParams cubes(int n) {
  SceneParams p;
  p.n_cube = n;
  return p;
}

}  // namespace

TEST(Config, EmptyFileKeepsDefaults) {
  const Overrides file = parse_config_text("# nothing here\n\n");
  const RunConfig c = apply_overrides(RunConfig{}, file);
  const RunConfig d;
  EXPECT_EQ(c.scene, d.scene);
  EXPECT_EQ(c.steps, d.steps);
  EXPECT_EQ(c.mpc.horizon, 4);
  const RunConfig s = apply_overrides(c, parse_flag_overrides({"--scene", "sliding_cube"}));
  EXPECT_EQ(s.scene, "sliding_cube");
  EXPECT_NO_THROW(s.validate());
}

TEST(Config, FlagsOverrideFile) {
  Overrides ov = parse_config_text("mpc.horizon = 4  # file value\nscene = fingertips_box\n");
  const Overrides flags = parse_flag_overrides({"--mpc.horizon", "8", "--mpc.k=0.1"});
  ov.insert(ov.end(), flags.begin(), flags.end());
  const RunConfig c = apply_overrides(RunConfig{}, ov);
  EXPECT_EQ(c.mpc.horizon, 8);
  EXPECT_EQ(c.mpc.k, 0.1);
  EXPECT_EQ(c.scene, "fingertips_box");
}

TEST(Config, UnknownKeyNamed) {
  const std::string msg = expect_config_error(parse_config_text("mpc.horizn = 4"));
  EXPECT_NE(msg.find("mpc.horizn"), std::string::npos);
}

TEST(Config, TypeMismatchNamesKeyAndType) {
  const std::string msg = expect_config_error({{"mpc.horizon", "four"}});
  EXPECT_NE(msg.find("mpc.horizon"), std::string::npos);
  EXPECT_NE(msg.find("integer"), std::string::npos);
  EXPECT_NE(expect_config_error({{"mpc.k", "1.0x"}}).find("number"), std::string::npos);
  EXPECT_NE(expect_config_error({{"stepper", "rk4"}}).find("stepper"), std::string::npos);
}

TEST(Config, MalformedLine) {
  EXPECT_THROW(parse_config_text("mpc.horizon 4"), ConfigError);
  EXPECT_THROW(parse_flag_overrides({"--steps"}), ConfigError);
  EXPECT_THROW(parse_flag_overrides({"steps", "3"}), ConfigError);
}

TEST(Config, SeedLists) {
  EXPECT_EQ(parse_seed_list("0-3,7"), (std::vector<std::uint64_t>{0, 1, 2, 3, 7}));
  EXPECT_EQ(parse_seed_list("5"), (std::vector<std::uint64_t>{5}));
  EXPECT_THROW(parse_seed_list("3-1"), InvalidArgument);
  EXPECT_THROW(parse_seed_list(""), InvalidArgument);
  EXPECT_THROW(parse_seed_list("a"), InvalidArgument);
}

TEST(Config, ValidateRejectsEmptySeeds) {
  RunConfig c;
  c.seeds.clear();
  EXPECT_THROW(c.validate(), ConfigError);
  RunConfig b;
  b.bench_repetitions = 1;
  EXPECT_THROW(b.validate(), ConfigError);
}

TEST(Config, ReadFileErrors) {
  EXPECT_THROW(read_config_file("/nonexistent/cfc.cfg"), IoError);
  const fs::path dir = temp_dir();
  std::ofstream(dir / "run.cfg") << "command = mpc\nseeds = 0-2\nbench.steppers = cf, qp\n";
  const RunConfig c = apply_overrides(RunConfig{}, read_config_file((dir / "run.cfg").string()));
  EXPECT_EQ(c.command, Command::kMpc);
  EXPECT_EQ(c.seeds.size(), 3u);
  EXPECT_EQ(c.bench_steppers.size(), 2u);
  fs::remove_all(dir);
}

TEST(Config, EveryKeyAccepted) {
  for (const auto& [key, type] : config_keys()) {
    EXPECT_FALSE(type.empty()) << key;
  }
  EXPECT_TRUE(config_keys().count("mpc.horizon"));
  EXPECT_TRUE(config_keys().count("scene.n_cube"));
}

TEST(Trajectory, ZeroStepsHeaderOnly) {
  const fs::path dir = temp_dir();
  const Scene s = build_scene("sliding_cube");
  const Trajectory t = run_simulation(s, StepperKind::kCf, 0);
  const std::string path = (dir / "t.csv").string();
  emit_trajectory(make_table(s.layout, s.h, t), path);
  const CsvData csv = read_csv(path);
  EXPECT_TRUE(csv.rows.empty());
  ASSERT_EQ(csv.header.size(), 2u + 7u + 0u + 1u);
  EXPECT_EQ(csv.header.front(), "step");
  EXPECT_EQ(csv.header[1], "time_s");
  EXPECT_EQ(csv.header.back(), "solve_ms");
  fs::remove_all(dir);
}

TEST(Trajectory, RoundTripAndColumnCount) {
  const fs::path dir = temp_dir();
  const Scene s = build_scene("push_boxes", cubes(3), 2);
  const Trajectory t = run_simulation(s, StepperKind::kCf, 12);
  const TrajectoryTable table = make_table(s.layout, s.h, t);
  const std::string path = (dir / "t.csv").string();
  emit_trajectory(table, path);
  const CsvData csv = read_csv(path);
  const std::size_t cols = 2 + s.layout.nq() + s.layout.nu() + 1;
  ASSERT_EQ(csv.header.size(), cols);
  ASSERT_EQ(csv.rows.size(), 12u);
  for (std::size_t k = 0; k < csv.rows.size(); ++k) {
    ASSERT_EQ(csv.rows[k].size(), cols);
    EXPECT_EQ(csv.rows[k][0], static_cast<double>(k));
    EXPECT_NEAR(csv.rows[k][1], (k + 1) * s.h, 1e-9 * (k + 1) * s.h);
    for (int i = 0; i < s.layout.nq(); ++i) {
      const double x = table.q[k](i);
      EXPECT_LE(std::abs(csv.rows[k][2 + i] - x), 5e-9 * std::abs(x));
    }
    EXPECT_NEAR(csv.rows[k][2 + s.layout.nq()], -0.001, 1e-12);
  }
  fs::remove_all(dir);
}

TEST(Trajectory, UnwritablePath) {
  const Scene s = build_scene("sliding_cube");
  const Trajectory t = run_simulation(s, StepperKind::kCf, 1);
  try {
    emit_trajectory(make_table(s.layout, s.h, t), "/nonexistent/dir/t.csv");
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/t.csv"), std::string::npos);
  }
}

TEST(Metrics, AllSuccessful) {
  const MetricsSummary m = summarize({record(0, true, 0.01, 0.1), record(1, true, 0.02, 0.2)});
  EXPECT_EQ(m.success_rate, 1.0);
  EXPECT_TRUE(m.failed_seeds.empty());
  EXPECT_NEAR(m.position_error.mean, 0.015, 1e-15);
  EXPECT_NEAR(m.position_error.std, 0.005, 1e-15);
}

TEST(Metrics, SingleTrialZeroStd) {
  const MetricsSummary m = summarize({record(4, false, 0.03, 0.5)});
  EXPECT_EQ(m.success_rate, 0.0);
  EXPECT_EQ(m.position_error.std, 0.0);
  EXPECT_EQ(m.angle_error_deg.std, 0.0);
  EXPECT_EQ(m.quaternion_error.std, 0.0);
  EXPECT_EQ(m.failed_seeds, (std::vector<std::uint64_t>{4}));
  EXPECT_NEAR(m.mean_solve_ms, 2.0, 1e-12);
}

TEST(Metrics, DegreesAndJson) {
  const fs::path dir = temp_dir();
  const double angle = 0.3;
  const std::string path = (dir / "metrics.json").string();
  emit_metrics({record(0, true, 0.01, angle), record(1, false, 0.05, angle)}, path);
  std::ifstream in(path);
  const nlohmann::json doc = nlohmann::json::parse(in);
  EXPECT_NEAR(doc["final_angle_error_deg"]["mean"].get<double>(), angle * 180.0 / std::numbers::pi, 1e-12);
  EXPECT_EQ(doc["success_rate"].get<double>(), 0.5);
  EXPECT_EQ(doc["trials"].size(), 2u);
  EXPECT_EQ(doc["failed_seeds"][0].get<int>(), 1);
  EXPECT_TRUE(doc.contains("final_position_error"));
  EXPECT_TRUE(doc.contains("final_quaternion_error"));
  EXPECT_TRUE(doc.contains("mpc_solving_time_ms"));
  EXPECT_THROW(summarize({}), InvalidArgument);
  fs::remove_all(dir);
}

TEST(Bench, RatioAndContext) {
  SceneParams p;
  p.n_cube = 3;
  const Scene s = build_scene("push_boxes", p, 1);
  const BenchReport r = bench(s, {StepperKind::kCf, StepperKind::kQp}, 10, 2, 3);
  ASSERT_EQ(r.timings.size(), 2u);
  EXPECT_EQ(r.n_cube, 3);
  EXPECT_EQ(r.contacts.size(), 10u);
  EXPECT_EQ(r.timings[0].samples, 20);
  ASSERT_TRUE(r.cf_qp_ratio.has_value());
  EXPECT_GT(*r.cf_qp_ratio, 0.0);
  const fs::path dir = temp_dir();
  emit_bench(r, (dir / "bench.json").string());
  std::ifstream in(dir / "bench.json");
  const nlohmann::json doc = nlohmann::json::parse(in);
  EXPECT_EQ(doc["n_cube"].get<int>(), 3);
  EXPECT_EQ(doc["contacts_per_step"].size(), 10u);
  EXPECT_TRUE(doc.contains("cf_qp_speed_ratio"));
  fs::remove_all(dir);
}

TEST(Bench, SingleStepperHasNoRatio) {
  const Scene s = build_scene("push_boxes", cubes(2), 1);
  const BenchReport r = bench(s, {StepperKind::kCf}, 5, 2, 2);
  EXPECT_FALSE(r.cf_qp_ratio.has_value());
  const fs::path dir = temp_dir();
  emit_bench(r, (dir / "bench.json").string());
  std::ifstream in(dir / "bench.json");
  EXPECT_FALSE(nlohmann::json::parse(in).contains("cf_qp_speed_ratio"));
  fs::remove_all(dir);
}

TEST(Bench, NeedsTwoRepetitions) {
  const Scene s = build_scene("push_boxes", cubes(2), 1);
  EXPECT_THROW(bench(s, {StepperKind::kCf}, 5, 1, 2), InvalidArgument);
}

TEST(Validation, FreshBuildPasses) {
  const ValidationReport r = run_validation();
  EXPECT_TRUE(r.passed()) << format_report(r);
  for (const PropertyResult& p : r.properties) EXPECT_LE(p.worst, p.tolerance) << p.name;
  EXPECT_EQ(r.properties.size(), 8u);
}

TEST(Validation, SignErrorFailsDualExactness) {
  ValidationOptions opts;
  opts.dual_exactness_instances = 200;
  opts.cf_stepper = [](const LinearizedSystem& s, const ContactSystem& c, const CfParams& p) {
    StepResult r = cf_step(s, c, p);
    const VectorXd arg = c.j_tilde * s.q_mat.llt().solve(s.b_vec) + c.phi_tilde;
    r.beta_plus = s.h * p.k_diag.cwiseProduct(arg).cwiseMax(0.0);
    return r;
  };
  const PropertyResult r = check_dual_exactness(opts);
  EXPECT_FALSE(r.passed);
  EXPECT_GT(r.worst, r.tolerance);
}
