#include "cfc/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "cfc/error.hpp"

namespace cfc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCubeHalf = 0.03;
constexpr double kDynamicMargin = 1e-4;
constexpr double kCubeMass = 0.01;
constexpr double kCubeInertia = 6e-6;

Body ground() {
  Body b;
  b.name = "ground";
  b.joint = Joint::kFixed;
  b.shape = Shape::plane();
  return b;
}

Body cube(const std::string& name, const Posed& pose) {
  Body b;
  b.name = name;
  b.joint = Joint::kFree;
  b.shape = Shape::box(Vector3d::Constant(kCubeHalf));
  b.reference = pose;
  b.mass = kCubeMass;
  b.inertia = kCubeInertia * Eigen::Matrix3d::Identity();
  return b;
}

Posed at(double x, double y, double z, const Eigen::Quaterniond& q = Eigen::Quaterniond::Identity()) {
  Posed p;
  p.position = Vector3d(x, y, z);
  p.orientation = q;
  return p;
}

// Quasi-dynamic tau: gravity on every unactuated body with dofs.
VectorXd quasi_gravity(const SystemLayout& layout, const Vector3d& g) {
  VectorXd tau = VectorXd::Zero(layout.nv());
  for (int id = 0; id < layout.num_bodies(); ++id) {
    const Body& b = layout.body(id);
    if (b.actuated) continue;
    const int o = layout.v_offset(id);
    switch (b.joint) {
      case Joint::kFree:
      case Joint::kTranslation:
        tau.segment<3>(o) = b.mass * g;
        break;
      case Joint::kPrismatic:
        tau(o) = b.mass * b.axis.dot(g);
        break;
      case Joint::kFixed:
        break;
    }
  }
  return tau;
}

Scene push_boxes(const SceneParams& params, std::uint64_t seed) {
  if (params.n_cube < 1) throw InvalidArgument("push_boxes needs n_cube >= 1");
  Scene s;
  s.name = "push_boxes";
  s.dynamics = Dynamics::kQuasiDynamic;
  s.h = 0.02;
  s.k = 1.0;

  std::vector<Body> bodies{ground()};
  Body bar;
  bar.name = "bar";
  bar.joint = Joint::kPrismatic;
  bar.axis = Vector3d::UnitX();
  bar.shape = Shape::box(Vector3d(0.01, 0.3, 0.025));
  bar.reference = at(0.0, 0.0, 0.04);
  bar.mass = 1.0;
  bar.actuated = true;
  bodies.push_back(bar);

  // Cubes scattered in front of the bar (it moves toward -x), non-overlapping.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-0.45, -0.06);
  std::uniform_real_distribution<double> uy(-0.22, 0.22);
  std::uniform_real_distribution<double> uyaw(-kPi, kPi);
  std::vector<Vector3d> placed;
  for (int i = 0; i < params.n_cube; ++i) {
    Vector3d p;
    int tries = 0;
    do {
      p = Vector3d(ux(rng), uy(rng), kCubeHalf);
      if (++tries > 10000) throw InvalidArgument("push_boxes: cannot place cubes without overlap");
    } while (std::any_of(placed.begin(), placed.end(),
                         [&](const Vector3d& o) { return (o - p).head<2>().norm() < 0.09; }));
    placed.push_back(p);
    const double yaw = uyaw(rng);
    bodies.push_back(cube("cube" + std::to_string(i),
                          at(p.x(), p.y(), p.z(), rpy_to_quat(0.0, 0.0, yaw))));
  }
  s.layout = SystemLayout(std::move(bodies));
  s.friction.default_mu = params.mu.value_or(0.5);

  const double eps = 40.0;
  s.quasi.h = s.h;
  s.quasi.object_q_diag.resize(6);
  s.quasi.object_q_diag << Vector3d::Constant(eps * kCubeMass / (s.h * s.h)),
      Vector3d::Constant(eps * kCubeInertia / (s.h * s.h));
  s.quasi.k_r = VectorXd::Constant(s.layout.nu(), 500.0);
  s.quasi.tau = quasi_gravity(s.layout, s.gravity);
  s.u0 = VectorXd::Constant(s.layout.nu(), -0.001);
  return s;
}

Scene sphere_two_planes(const SceneParams& params) {
  Scene s;
  s.name = "sphere_two_planes";
  s.dynamics = Dynamics::kFullDynamic;
  s.h = 0.01;
  s.k = 20.0;
  s.d = 6.0;
  s.geometry.contact_margin = kDynamicMargin;
  Body bottom = ground();
  bottom.name = "bottom";
  Body top = ground();
  top.name = "top";
  top.reference = at(0.0, 0.0, 0.102, Eigen::Quaterniond(Eigen::AngleAxisd(kPi, Vector3d::UnitX())));
  Body sphere;
  sphere.name = "sphere";
  sphere.joint = Joint::kTranslation;
  sphere.shape = Shape::sphere(0.05);
  sphere.reference = at(0.0, 0.0, 0.05);
  sphere.mass = 0.2;
  s.layout = SystemLayout({bottom, top, sphere});
  s.friction.default_mu = params.mu.value_or(0.3);
  s.external = VectorXd::Zero(s.layout.nv());
  s.external(0) = params.drive_force;
  return s;
}

Scene sliding(const std::string& name, const Posed& pose, const Vector3d& lin, const Vector3d& ang,
              int settle) {
  Scene s;
  s.name = name;
  s.dynamics = Dynamics::kFullDynamic;
  s.h = 0.002;
  s.k = 1.0;
  s.d = 0.3;
  s.settle_steps = settle;
  s.geometry.contact_margin = kDynamicMargin;
  s.layout = SystemLayout({ground(), cube("cube", pose)});
  s.friction.default_mu = 0.5;
  s.v0 = VectorXd::Zero(6);
  s.v0 << lin, ang;
  s.object = 1;
  return s;
}

Scene fingertips_box(const SceneParams& params) {
  Scene s;
  s.name = "fingertips_box";
  s.dynamics = Dynamics::kQuasiDynamic;
  s.h = 0.1;
  s.k = 0.3;
  s.scaled_stiffness = true;
  std::vector<Body> bodies{ground(), cube("object", at(0.0, 0.0, kCubeHalf))};
  for (int i = 0; i < 3; ++i) {
    Body f;
    f.name = "fingertip" + std::to_string(i);
    f.joint = Joint::kTranslation;
    f.shape = Shape::sphere(0.01);
    f.mass = 0.01;
    f.actuated = true;
    bodies.push_back(f);
  }
  s.layout = SystemLayout(std::move(bodies));
  s.friction.default_mu = params.mu.value_or(0.5);
  s.object = 1;
  s.fingertips = {2, 3, 4};
  s.quasi.h = s.h;
  s.quasi.object_q_diag.resize(6);
  s.quasi.object_q_diag << 50.0, 50.0, 50.0, 0.05, 0.05, 0.05;
  s.quasi.k_r = VectorXd::Constant(s.layout.nu(), 100.0);
  s.quasi.tau = quasi_gravity(s.layout, s.gravity);
  s.u0 = VectorXd::Zero(s.layout.nu());
  return s;
}

}  // namespace

StepperKind parse_stepper(const std::string& name) {
  if (name == "cf") return StepperKind::kCf;
  if (name == "cf_extended") return StepperKind::kCfExtended;
  if (name == "qp") return StepperKind::kQp;
  throw InvalidArgument("unknown stepper '" + name + "' (available: cf, cf_extended, qp)");
}

const char* stepper_name(StepperKind kind) {
  switch (kind) {
    case StepperKind::kCf: return "cf";
    case StepperKind::kCfExtended: return "cf_extended";
    case StepperKind::kQp: return "qp";
  }
  return "unknown";
}

std::vector<std::string> scene_names() {
  return {"push_boxes", "sphere_two_planes", "sliding_cube", "falling_cube", "fingertips_box"};
}

ManipulationSystem Scene::manipulation() const {
  if (object < 0 || fingertips.empty()) throw InvalidArgument("scene " + name + " has no fingertips");
  ManipulationSystem m;
  m.layout = layout;
  m.object = object;
  m.fingertips = fingertips;
  m.params = quasi;
  m.friction = friction;
  return m;
}

Scene build_scene(const std::string& name, const SceneParams& params, std::uint64_t seed) {
  Scene s;
  if (name == "push_boxes") {
    s = push_boxes(params, seed);
  } else if (name == "sphere_two_planes") {
    s = sphere_two_planes(params);
  } else if (name == "sliding_cube") {
    s = sliding("sliding_cube", at(0.0, 0.0, kCubeHalf), Vector3d(2.0, 0.0, 0.0), Vector3d::Zero(), 250);
    if (params.mu) s.friction.default_mu = *params.mu;
  } else if (name == "falling_cube") {
    const Eigen::Quaterniond q = Eigen::Quaterniond(0.577, 0.577, 0.577, 0.0).normalized();
    s = sliding("falling_cube", at(0.1, 0.0, 0.2, q), Vector3d(1.0, 0.0, 0.0), Vector3d(20.0, 0.0, 0.0), 0);
    if (params.mu) s.friction.default_mu = *params.mu;
  } else if (name == "fingertips_box") {
    s = fingertips_box(params);
  } else {
    std::string list;
    for (const std::string& n : scene_names()) list += (list.empty() ? "" : ", ") + n;
    throw InvalidArgument("unknown scene '" + name + "' (available: " + list + ")");
  }
  if (params.k) s.k = *params.k;
  if (params.d) s.d = *params.d;
  if (!(s.k > 0.0) || s.d < 0.0) throw InvalidArgument("scene stiffness must be positive and damping nonnegative");
  s.quasi.h = s.h;
  s.q0 = s.layout.reference_q();
  if (s.v0.size() == 0) s.v0 = VectorXd::Zero(s.layout.nv());
  if (s.u0.size() == 0) s.u0 = VectorXd::Zero(s.layout.nu());
  return s;
}

TaskKind parse_task_kind(const std::string& name) {
  if (name == "rotation") return TaskKind::kRotation;
  if (name == "flipping") return TaskKind::kFlipping;
  if (name == "in_air") return TaskKind::kInAir;
  if (name == "trifinger_like") return TaskKind::kTrifingerLike;
  throw InvalidArgument("unknown task kind '" + name + "' (available: rotation, flipping, in_air, trifinger_like)");
}

const char* task_kind_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::kRotation: return "rotation";
    case TaskKind::kFlipping: return "flipping";
    case TaskKind::kInAir: return "in_air";
    case TaskKind::kTrifingerLike: return "trifinger_like";
  }
  return "unknown";
}

TaskSample sample_task(TaskKind kind, std::uint64_t seed, double rest_height) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  TaskSample out;
  const double x0 = uniform(-0.025, 0.025);
  const double y0 = uniform(-0.025, 0.025);
  const double yaw0 = uniform(-kPi, kPi);
  out.initial = at(x0, y0, rest_height, rpy_to_quat(0.0, 0.0, yaw0));

  TaskSpec& t = out.task;
  switch (kind) {
    case TaskKind::kRotation: {
      const double x = uniform(-0.1, 0.1);
      const double y = uniform(-0.1, 0.1);
      const double yaw = uniform(-kPi, kPi);
      t.target_position = Vector3d(x, y, rest_height);
      t.target_orientation = rpy_to_quat(0.0, 0.0, yaw);
      break;
    }
    case TaskKind::kFlipping: {
      const double x = uniform(-0.1, 0.1);
      const double y = uniform(-0.1, 0.1);
      const double yaw = uniform(-kPi, kPi);
      const double pitch = uniform(-kPi / 2, kPi / 2);
      const double roll = uniform(-kPi / 2, kPi / 2);
      t.target_position = Vector3d(x, y, rest_height);
      t.target_orientation = rpy_to_quat(roll, pitch, yaw);
      break;
    }
    case TaskKind::kInAir: {
      const double x = uniform(-0.1, 0.1);
      const double y = uniform(-0.1, 0.1);
      const double z = uniform(0.03, 0.08);
      std::normal_distribution<double> n(0.0, std::sqrt(0.1));
      Vector3d axis(n(rng), 1.0 + n(rng), 1.0 + n(rng));
      const double angle = uniform(-kPi, kPi);
      t.target_position = Vector3d(x, y, z);
      t.target_orientation = axis_angle_to_quat(axis, angle);
      break;
    }
    case TaskKind::kTrifingerLike: {
      const double x = uniform(-0.05, 0.05);
      const double y = uniform(-0.05, 0.05);
      const double yaw = uniform(-kPi / 2, kPi / 2);
      t.target_position = Vector3d(x, y, rest_height);
      t.target_orientation = rpy_to_quat(0.0, 0.0, yaw);
      t.position_tolerance = 0.02;
      t.quat_tolerance = 0.04;
      break;
    }
  }
  return out;
}

CfParams scene_cf_params(const Scene& scene, const LinearizedSystem& sys, const ContactSystem& cs) {
  CfParams cf = CfParams::uniform(cs.rows(), scene.k);
  if (scene.scaled_stiffness && !cs.empty()) {
    const MatrixXd qinv_jt = sys.q_mat.llt().solve(MatrixXd(cs.j_tilde.transpose()));
    cf.k_diag = scene.k * (cs.j_tilde * qinv_jt).diagonal().cwiseInverse();
  }
  return cf;
}

StepResult engine_step(const Scene& scene, StepperKind stepper, const VectorXd& q, const VectorXd& v,
                       const VectorXd& u, VectorXd& q_next, int* num_contacts) {
  const std::vector<ContactPoint> contacts =
      detect_contacts(make_snapshot(scene.layout, q, scene.friction), scene.geometry);
  if (num_contacts) *num_contacts = static_cast<int>(contacts.size());
  const ContactSystem cs = build_contact_system(contacts, q, scene.layout);

  LinearizedSystem sys;
  if (scene.dynamics == Dynamics::kQuasiDynamic) {
    sys = assemble_quasi_dynamic(scene.layout, q, u, scene.quasi);
  } else {
    DynamicParams dp;
    dp.h = scene.h;
    dp.gravity = scene.gravity;
    dp.external = scene.external;
    sys = assemble_full_dynamic(scene.layout, q, v, dp);
  }

  const CfParams cf = scene_cf_params(scene, sys, cs);
  StepResult r;
  switch (stepper) {
    case StepperKind::kCf:
      r = cf_step(sys, cs, cf);
      break;
    case StepperKind::kCfExtended:
      r = cf_step_extended(sys, v, cs, cf, VectorXd::Constant(cs.rows(), scene.d));
      break;
    case StepperKind::kQp:
      r = qp_step(sys, cs);
      break;
  }
  q_next = integrate(scene.layout, q, r.v_plus, scene.h);
  return r;
}

Trajectory run_simulation(const Scene& scene, StepperKind stepper, int steps) {
  if (steps < 0) throw InvalidArgument("steps must be nonnegative");
  VectorXd q = scene.q0;
  VectorXd v = VectorXd::Zero(scene.layout.nv());
  VectorXd q_next;
  Trajectory traj;

  auto checked_step = [&](int k, const VectorXd& u, int* nc) {
    try {
      return engine_step(scene, stepper, q, v, u, q_next, nc);
    } catch (const std::exception& e) {
      throw std::runtime_error("step " + std::to_string(k) + ": " + e.what());
    }
  };

  for (int k = 0; k < scene.settle_steps; ++k) {
    v = checked_step(-scene.settle_steps + k, scene.u0, nullptr).v_plus;
    q = q_next;
  }
  v = scene.v0;
  traj.rest_height = scene.object >= 0 ? scene.layout.pose(scene.object, q).position.z()
                                       : std::numeric_limits<double>::quiet_NaN();
  traj.q.push_back(q);
  traj.v.push_back(v);
  for (int k = 0; k < steps; ++k) {
    int nc = 0;
    const auto start = std::chrono::steady_clock::now();
    const StepResult r = checked_step(k, scene.u0, &nc);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    v = r.v_plus;
    q = q_next;
    traj.q.push_back(q);
    traj.v.push_back(v);
    traj.u.push_back(scene.u0);
    traj.step_seconds.push_back(dt);
    traj.contacts.push_back(nc);
  }
  return traj;
}

double TrialRecord::mean_solve_seconds() const {
  if (steps.empty()) return 0.0;
  double sum = 0.0;
  for (const TrialStep& s : steps) sum += s.solve_seconds;
  return sum / static_cast<double>(steps.size());
}

VectorXd fingertip_start(const Scene& scene, const Posed& object, double radius) {
  VectorXd q = scene.q0;
  scene.layout.set_pose(scene.object, object, q);
  const int n = static_cast<int>(scene.fingertips.size());
  const double yaw = heading(object.orientation);
  for (int i = 0; i < n; ++i) {
    const double a = yaw + kPi / 3.0 + 2.0 * kPi * i / n;
    Posed p;
    p.position = object.position + Vector3d(radius * std::cos(a), radius * std::sin(a), 0.0);
    p.position.z() = std::max(p.position.z(), 0.02);
    scene.layout.set_pose(scene.fingertips[i], p, q);
  }
  return q;
}

TrialRecord run_mpc_trial(const Scene& scene, const TaskSample& sample, const MpcConfig& cfg,
                          std::uint64_t seed) {
  const ManipulationSystem sys = scene.manipulation();
  TrialRecord rec;
  rec.seed = seed;
  rec.initial = sample.initial;
  rec.task = sample.task;
  rec.q0 = fingertip_start(scene, sample.initial);

  VectorXd q = rec.q0;
  const VectorXd v = VectorXd::Zero(scene.layout.nv());
  VectorXd previous;
  VectorXd q_next;
  int run = 0;
  for (int k = 0; k < cfg.rollout_cap; ++k) {
    const PolicyStep ps = mpc_policy_step(sys, q, sample.task, cfg, previous.size() ? &previous : nullptr);
    previous = ps.solution;
    rec.stalled_any = rec.stalled_any || ps.info.stalled;
    engine_step(scene, StepperKind::kCf, q, v, ps.u0, q_next);
    q = q_next;
    rec.steps.push_back(TrialStep{q, ps.u0, ps.solve_seconds});

    const Posed pose = scene.layout.pose(scene.object, q);
    const bool ok = position_error(pose, sample.task) <= sample.task.position_tolerance &&
                    quaternion_error(pose, sample.task) <= sample.task.quat_tolerance;
    run = ok ? run + 1 : 0;
    if (run >= cfg.success_window) {
      rec.success_step = k;
      break;
    }
  }
  const Posed last = scene.layout.pose(scene.object, rec.steps.empty() ? rec.q0 : rec.steps.back().q);
  rec.final_position_error = position_error(last, sample.task);
  rec.final_quat_error = quaternion_error(last, sample.task);
  rec.final_angle_error = quat_angle(sample.task.target_orientation, last.orientation);
  return rec;
}

}  // namespace cfc
