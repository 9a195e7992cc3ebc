// cfc: simulate, mpc, bench and validate front end.
// Exit codes: 0 ok, 1 failure (failing seeds listed), 2 bad invocation.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "cfc/bench.hpp"
#include "cfc/config.hpp"
#include "cfc/error.hpp"
#include "cfc/io.hpp"
#include "cfc/scenarios.hpp"
#include "cfc/validation.hpp"

namespace fs = std::filesystem;
using namespace cfc;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kBadInvocation = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string config;
  std::string scene;
  std::string stepper;
  std::string steps;
  std::string seeds;
  std::string out;
};

void add_common_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "key = value config file; flags override it");
  sub->add_option("--scene", f.scene, "scene preset");
  sub->add_option("--stepper", f.stepper, "cf, cf_extended or qp");
  sub->add_option("--steps", f.steps, "steps to run (rollout cap for mpc)");
  sub->add_option("--seeds", f.seeds, "seed list such as 0,1,2 or 0-9");
  sub->add_option("--out", f.out, "output directory");
  sub->allow_extras();
}

RunConfig resolve(Command command, const Flags& f, const std::vector<std::string>& extras) {
  Overrides ov;
  if (!f.config.empty()) {
    try {
      ov = read_config_file(f.config);
    } catch (const IoError& e) {
      throw UsageError(e.what());
    }
  }
  auto push = [&](const char* key, const std::string& value) {
    if (!value.empty()) ov.emplace_back(key, value);
  };
  push("scene", f.scene);
  push("stepper", f.stepper);
  push(command == Command::kMpc ? "mpc.rollout_cap" : "steps", f.steps);
  push("seeds", f.seeds);
  push("out", f.out);
  const Overrides extra = parse_flag_overrides(extras);
  ov.insert(ov.end(), extra.begin(), extra.end());

  RunConfig base;
  base.command = command;
  if (command == Command::kMpc) base.scene = "fingertips_box";
  if (command == Command::kBench) base.scene = "push_boxes";
  RunConfig cfg = apply_overrides(base, ov);
  cfg.command = command;
  cfg.validate();

  const auto names = scene_names();
  if (std::find(names.begin(), names.end(), cfg.scene) == names.end()) {
    std::string list;
    for (const std::string& n : names) list += (list.empty() ? "" : ", ") + n;
    throw UsageError("unknown scene '" + cfg.scene + "' (available: " + list + ")");
  }
  return cfg;
}

void prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("output directory '" + dir + "' is not writable");
}

std::string seed_list(const std::vector<std::uint64_t>& seeds) {
  std::string s;
  for (std::uint64_t x : seeds) s += (s.empty() ? "" : ",") + std::to_string(x);
  return s;
}

int report_failures(const char* what, const std::vector<std::uint64_t>& failed, std::size_t total) {
  if (failed.empty()) return kOk;
  std::fprintf(stderr, "%s: %zu of %zu seeds failed: %s\n", what, failed.size(), total, seed_list(failed).c_str());
  return kFailure;
}

int run_simulate(const RunConfig& cfg) {
  prepare_out_dir(cfg.out_dir);
  std::vector<std::uint64_t> failed;
  for (std::uint64_t seed : cfg.seeds) {
    const Scene scene = build_scene(cfg.scene, cfg.scene_params, seed);
    const std::string path = (fs::path(cfg.out_dir) / (cfg.scene + "_" + stepper_name(cfg.stepper) + "_seed" +
                                                        std::to_string(seed) + ".csv")).string();
    try {
      const Trajectory traj = run_simulation(scene, cfg.stepper, cfg.steps);
      emit_trajectory(make_table(scene.layout, scene.h, traj), path);
      std::printf("seed %llu: %d steps -> %s\n", static_cast<unsigned long long>(seed), cfg.steps, path.c_str());
    } catch (const std::exception& e) {
      std::fprintf(stderr, "seed %llu: %s\n", static_cast<unsigned long long>(seed), e.what());
      failed.push_back(seed);
    }
  }
  return report_failures("simulate", failed, cfg.seeds.size());
}

int run_mpc(const RunConfig& cfg) {
  const Scene scene = build_scene(cfg.scene, cfg.scene_params, 0);
  if (scene.object < 0 || scene.fingertips.empty()) {
    throw UsageError("scene '" + cfg.scene + "' has no actuated fingertips; mpc needs fingertips_box");
  }
  prepare_out_dir(cfg.out_dir);
  std::vector<TrialRecord> records;
  std::vector<std::uint64_t> errored;
  for (std::uint64_t seed : cfg.seeds) {
    try {
      const TaskSample sample = sample_task(cfg.task, seed);
      TrialRecord rec = run_mpc_trial(scene, sample, cfg.mpc, seed);
      const std::string path =
          (fs::path(cfg.out_dir) / ("trial_seed" + std::to_string(seed) + ".csv")).string();
      emit_trajectory(make_table(scene.layout, scene.h, rec), path);
      std::printf("seed %llu: %s steps=%zu pos_err=%.4f m quat_err=%.4f angle=%.1f deg solve=%.2f ms\n",
                  static_cast<unsigned long long>(seed), rec.success() ? "success" : "fail", rec.steps.size(),
                  rec.final_position_error, rec.final_quat_error, rec.final_angle_error * 180.0 / M_PI,
                  rec.mean_solve_seconds() * 1e3);
      std::fflush(stdout);
      records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      std::fprintf(stderr, "seed %llu: %s\n", static_cast<unsigned long long>(seed), e.what());
      errored.push_back(seed);
    }
  }
  std::vector<std::uint64_t> failed = errored;
  if (!records.empty()) {
    const std::string path = (fs::path(cfg.out_dir) / "metrics.json").string();
    emit_metrics(records, path);
    const MetricsSummary m = summarize(records);
    std::printf("success_rate=%.3f pos_err=%.4f+-%.4f m angle=%.1f+-%.1f deg solve=%.2f ms -> %s\n",
                m.success_rate, m.position_error.mean, m.position_error.std, m.angle_error_deg.mean,
                m.angle_error_deg.std, m.mean_solve_ms, path.c_str());
    failed.insert(failed.end(), m.failed_seeds.begin(), m.failed_seeds.end());
  }
  std::sort(failed.begin(), failed.end());
  return report_failures("mpc", failed, cfg.seeds.size());
}

int run_bench(const RunConfig& cfg) {
  prepare_out_dir(cfg.out_dir);
  const std::uint64_t seed = cfg.seeds.front();
  const Scene scene = build_scene(cfg.scene, cfg.scene_params, seed);
  const int n_cube = cfg.scene == "push_boxes" ? cfg.scene_params.n_cube : 0;
  const BenchReport report = bench(scene, cfg.bench_steppers, std::max(cfg.steps, 1), cfg.bench_repetitions, n_cube);
  const std::string path = (fs::path(cfg.out_dir) / "bench.json").string();
  emit_bench(report, path);
  double contacts = 0.0;
  for (int c : report.contacts) contacts += c;
  std::printf("%s seed %llu: %d states x %d repetitions, %.1f contacts per state\n", report.scene.c_str(),
              static_cast<unsigned long long>(seed), report.steps, report.repetitions,
              contacts / std::max<std::size_t>(report.contacts.size(), 1));
  for (const StepperTiming& t : report.timings) {
    std::printf("  %-12s mean %.4f ms  min %.4f ms\n", stepper_name(t.stepper), 1e3 * t.mean_seconds,
                1e3 * t.min_seconds);
  }
  if (report.cf_qp_ratio) std::printf("  cf:qp speed ratio %.2f\n", *report.cf_qp_ratio);
  std::printf("-> %s\n", path.c_str());
  return kOk;
}

int run_validate() {
  const ValidationReport report = run_validation();
  std::printf("%s", format_report(report).c_str());
  return report.passed() ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-form contact model: simulation, MPC, timing and validation"};
  app.require_subcommand(1);
  Flags flags;
  CLI::App* simulate = app.add_subcommand("simulate", "run a scene and write its trajectory CSV per seed");
  CLI::App* mpc = app.add_subcommand("mpc", "run MPC trials and write per-seed CSVs plus metrics.json");
  CLI::App* bench_cmd = app.add_subcommand("bench", "time one-step prediction per stepper, write bench.json");
  CLI::App* validate = app.add_subcommand("validate", "run the property suites");
  for (CLI::App* sub : {simulate, mpc, bench_cmd, validate}) add_common_flags(sub, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInvocation;
  }

  CLI::App* sub = app.get_subcommands().front();
  const Command command = parse_command(sub->get_name());
  RunConfig cfg;
  try {
    cfg = resolve(command, flags, sub->remaining());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadInvocation;
  }

  try {
    switch (command) {
      case Command::kSimulate: return run_simulate(cfg);
      case Command::kMpc: return run_mpc(cfg);
      case Command::kBench: return run_bench(cfg);
      case Command::kValidate: return run_validate();
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadInvocation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kFailure;
}
