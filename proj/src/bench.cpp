#include "cfc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "cfc/error.hpp"

namespace cfc {

namespace {

struct Frame {
  LinearizedSystem sys;
  ContactSystem cs;
  CfParams cf;
  VectorXd v;
};

LinearizedSystem assemble(const Scene& scene, const VectorXd& q, const VectorXd& v) {
  if (scene.dynamics == Dynamics::kQuasiDynamic) return assemble_quasi_dynamic(scene.layout, q, scene.u0, scene.quasi);
  DynamicParams dp;
  dp.h = scene.h;
  dp.gravity = scene.gravity;
  dp.external = scene.external;
  return assemble_full_dynamic(scene.layout, q, v, dp);
}

StepResult solve(StepperKind kind, const Scene& scene, const Frame& f) {
  switch (kind) {
    case StepperKind::kCf: return cf_step(f.sys, f.cs, f.cf);
    case StepperKind::kCfExtended:
      return cf_step_extended(f.sys, f.v, f.cs, f.cf, VectorXd::Constant(f.cs.rows(), scene.d));
    case StepperKind::kQp: return qp_step(f.sys, f.cs);
  }
  throw InvalidArgument("unknown stepper");
}

}  // namespace

BenchReport bench(const Scene& scene, const std::vector<StepperKind>& steppers, int steps, int repetitions,
                  int n_cube) {
  if (repetitions < 2) throw InvalidArgument("bench needs at least 2 repetitions");
  if (steps < 1) throw InvalidArgument("bench needs at least 1 step");
  if (steppers.empty()) throw InvalidArgument("bench needs at least one stepper");

  BenchReport report;
  report.scene = scene.name;
  report.n_cube = n_cube;
  report.steps = steps;
  report.repetitions = repetitions;

  std::vector<Frame> frames;
  VectorXd q = scene.q0;
  VectorXd v = scene.v0;
  VectorXd q_next;
  for (int k = 0; k < steps; ++k) {
    const auto contacts = detect_contacts(make_snapshot(scene.layout, q, scene.friction), scene.geometry);
    Frame f;
    f.cs = build_contact_system(contacts, q, scene.layout);
    f.sys = assemble(scene, q, v);
    f.cf = scene_cf_params(scene, f.sys, f.cs);
    f.v = v;
    report.contacts.push_back(static_cast<int>(contacts.size()));
    v = engine_step(scene, StepperKind::kQp, q, v, scene.u0, q_next).v_plus;
    q = q_next;
    frames.push_back(std::move(f));
  }

  for (StepperKind kind : steppers) {
    StepperTiming t;
    t.stepper = kind;
    t.min_seconds = std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (int rep = 0; rep < repetitions; ++rep) {
      for (const Frame& f : frames) {
        const auto start = std::chrono::steady_clock::now();
        const StepResult r = solve(kind, scene, f);
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (r.v_plus.size() == 0) throw InvalidArgument("empty step result");
        total += dt;
        t.min_seconds = std::min(t.min_seconds, dt);
        ++t.samples;
      }
    }
    t.mean_seconds = total / t.samples;
    report.timings.push_back(t);
  }

  auto find = [&](StepperKind kind) -> const StepperTiming* {
    for (const StepperTiming& t : report.timings) {
      if (t.stepper == kind) return &t;
    }
    return nullptr;
  };
  const StepperTiming* cf = find(StepperKind::kCf);
  const StepperTiming* qp = find(StepperKind::kQp);
  if (cf && qp && cf->mean_seconds > 0.0) report.cf_qp_ratio = qp->mean_seconds / cf->mean_seconds;
  return report;
}

void emit_bench(const BenchReport& report, const std::string& path) {
  nlohmann::json doc;
  doc["scene"] = report.scene;
  doc["n_cube"] = report.n_cube;
  doc["steps"] = report.steps;
  doc["repetitions"] = report.repetitions;
  doc["contacts_per_step"] = report.contacts;
  doc["steppers"] = nlohmann::json::array();
  for (const StepperTiming& t : report.timings) {
    doc["steppers"].push_back({{"stepper", stepper_name(t.stepper)},
                               {"mean_ms", 1e3 * t.mean_seconds},
                               {"min_ms", 1e3 * t.min_seconds},
                               {"samples", t.samples}});
  }
  if (report.cf_qp_ratio) doc["cf_qp_speed_ratio"] = *report.cf_qp_ratio;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed while writing " + path);
}

}  // namespace cfc
