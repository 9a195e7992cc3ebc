#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cfc/error.hpp"
#include "cfc/mpc.hpp"
#include "cfc/scenarios.hpp"

using namespace cfc;

namespace {

constexpr double kPi = std::numbers::pi;

struct Fixture {
  Scene scene = build_scene("fingertips_box");
  ManipulationSystem sys = scene.manipulation();
  CostIndex idx = CostIndex::from(sys);

  VectorXd resting(double radius = 0.08) const {
    Posed obj;
    obj.position = Vector3d(0.0, 0.0, 0.03);
    return fingertip_start(scene, obj, radius);
  }

  ContactSystem frozen(const VectorXd& q, const MpcConfig& cfg) const {
    const auto contacts = detect_contacts(make_snapshot(sys.layout, q, sys.friction), cfg.geometry);
    return build_contact_system(contacts, q, sys.layout);
  }
};

}  // namespace

TEST(CostConfig, DefaultWeights) {
  const CostConfig c;
  EXPECT_EQ(c.w_contact, 1.0);
  EXPECT_EQ(c.w_grasp, 0.05);
  EXPECT_EQ(c.w_control, 50.0);
  EXPECT_EQ(c.w_position, 5000.0);
  EXPECT_EQ(c.w_quat, 50.0);
  CostConfig bad;
  bad.w_grasp = -1.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(PathCost, FingertipsAtObjectCenter) {
  Fixture f;
  VectorXd q = f.resting();
  for (int o : f.idx.fingertip_q) q.segment<3>(o) = q.segment<3>(f.idx.object_q);
  bool degenerate = false;
  const double c = path_cost(CostConfig{}, f.idx, q, VectorXd::Zero(9), &degenerate);
  EXPECT_EQ(c, 0.0);
  EXPECT_TRUE(degenerate);
}

TEST(PathCost, EvenlySpacedGraspIsZero) {
  Fixture f;
  CostConfig c;
  c.w_contact = 0.0;
  c.w_control = 0.0;
  const VectorXd q = f.resting(0.05);
  bool degenerate = false;
  EXPECT_NEAR(path_cost(c, f.idx, q, VectorXd::Zero(9), &degenerate), 0.0, 1e-30);
  EXPECT_FALSE(degenerate);
}

TEST(PathCost, TermsByHand) {
  Fixture f;
  const VectorXd q = f.resting(0.05);
  CostConfig c;
  c.w_grasp = 0.0;
  VectorXd u = VectorXd::Zero(9);
  u(0) = 0.002;
  // Three fingertips at 0.05 m: contact term 3 * 0.05^2, control term 50 * 0.002^2.
  EXPECT_NEAR(path_cost(c, f.idx, q, u), 3 * 0.0025 + 50 * 4e-6, 1e-15);
}

TEST(FinalCost, ZeroAtTarget) {
  Fixture f;
  const VectorXd q = f.resting();
  TaskSpec task;
  task.target_position = Vector3d(0.0, 0.0, 0.03);
  EXPECT_EQ(final_cost(CostConfig{}, f.idx, task, q), 0.0);
  task.target_orientation = Eigen::Quaterniond(std::sqrt(0.5), 0, 0, std::sqrt(0.5));
  task.target_position.x() = 0.01;
  EXPECT_NEAR(final_cost(CostConfig{}, f.idx, task, q), 5000 * 1e-4 + 50 * 0.5, 1e-12);
}

TEST(Rollout, ZeroHorizonIsFinalCost) {
  Fixture f;
  MpcConfig cfg;
  cfg.horizon = 0;
  const VectorXd q = f.resting();
  TaskSpec task;
  task.target_position = Vector3d(0.05, 0.0, 0.03);
  const MpcProblem prob(f.sys, q, f.frozen(q, cfg), task, cfg);
  const RolloutResult r = rollout(prob, VectorXd(0));
  ASSERT_EQ(r.states.size(), 1u);
  EXPECT_EQ(r.cost, final_cost(cfg.cost, f.idx, task, q));
}

TEST(Rollout, CostIsSumOfStageCosts) {
  Fixture f;
  MpcConfig cfg;
  const VectorXd q = f.resting(0.04);
  TaskSpec task;
  task.target_position = Vector3d(0.02, -0.01, 0.03);
  const MpcProblem prob(f.sys, q, f.frozen(q, cfg), task, cfg);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.005, 0.005);
  VectorXd useq(prob.size());
  for (int i = 0; i < useq.size(); ++i) useq(i) = u(rng);
  const RolloutResult r = rollout(prob, useq);
  ASSERT_EQ(static_cast<int>(r.states.size()), cfg.horizon + 1);
  double total = 0.0;
  for (int t = 0; t < cfg.horizon; ++t) total += path_cost(cfg.cost, f.idx, r.states[t], useq.segment(t * 9, 9));
  total += final_cost(cfg.cost, f.idx, task, r.states.back());
  EXPECT_NEAR(r.cost, total, 1e-12 * std::abs(total));
}

TEST(Rollout, RestingSceneStaysPut) {
  Fixture f;
  MpcConfig cfg;
  const VectorXd q = f.resting();
  const MpcProblem prob(f.sys, q, f.frozen(q, cfg), TaskSpec{}, cfg);
  const RolloutResult r = rollout(prob, VectorXd::Zero(prob.size()));
  for (std::size_t t = 1; t < r.states.size(); ++t) {
    const double step = (r.states[t].segment<3>(f.idx.object_q) - r.states[t - 1].segment<3>(f.idx.object_q)).norm();
    EXPECT_LT(step, 1e-3);
  }
}

TEST(Rollout, FrozenContactsAcrossHorizon) {
  Fixture f;
  MpcConfig cfg;
  const VectorXd q = f.resting();
  const ContactSystem cs = f.frozen(q, cfg);
  const MpcProblem prob(f.sys, q, cs, TaskSpec{}, cfg);
  VectorXd useq = VectorXd::Constant(prob.size(), 0.004);
  rollout(prob, useq);
  optimize_controls(prob, useq);
  EXPECT_EQ(prob.frozen().j_tilde, cs.j_tilde);
  EXPECT_EQ(prob.frozen().phi_tilde, cs.phi_tilde);
}

TEST(ObjectiveGradient, ControlOnlyCost) {
  Fixture f;
  MpcConfig cfg;
  cfg.cost.w_contact = cfg.cost.w_grasp = cfg.cost.w_position = cfg.cost.w_quat = 0.0;
  Posed far;
  far.position = Vector3d(0.0, 0.0, 0.5);
  VectorXd q = fingertip_start(f.scene, far, 0.3);
  for (int o : f.idx.fingertip_q) q(o + 2) = 0.5;
  const ContactSystem cs = f.frozen(q, cfg);
  ASSERT_TRUE(cs.empty());
  const MpcProblem prob(f.sys, q, cs, TaskSpec{}, cfg);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.005, 0.005);
  VectorXd useq(prob.size());
  for (int i = 0; i < useq.size(); ++i) useq(i) = u(rng);
  const VectorXd g = objective_gradient(prob, useq);
  EXPECT_NEAR((g - 2.0 * cfg.cost.w_control * useq).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(ObjectiveGradient, MatchesFiniteDifferences) {
  Fixture f;
  MpcConfig cfg;
  const VectorXd q = f.resting(0.035);
  TaskSpec task;
  task.target_position = Vector3d(0.05, 0.02, 0.03);
  task.target_orientation = rpy_to_quat(0.0, 0.0, 0.7);
  const MpcProblem prob(f.sys, q, f.frozen(q, cfg), task, cfg);
  ASSERT_FALSE(prob.frozen().empty());
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.005, 0.005);
  VectorXd useq(prob.size());
  for (int i = 0; i < useq.size(); ++i) useq(i) = u(rng);
  const VectorXd g = objective_gradient(prob, useq);
  VectorXd fd(useq.size());
  for (int i = 0; i < useq.size(); ++i) {
    VectorXd a = useq;
    VectorXd b = useq;
    a(i) += 1e-6;
    b(i) -= 1e-6;
    fd(i) = (rollout(prob, a).cost - rollout(prob, b).cost) / 2e-6;
  }
  EXPECT_LE((g - fd).norm() / std::max(fd.norm(), 1e-12), 1e-4);
}

TEST(ObjectiveGradient, HardMaxRejected) {
  Fixture f;
  MpcConfig cfg;
  cfg.mode = CfMode::kHardMax;
  const VectorXd q = f.resting();
  const MpcProblem prob(f.sys, q, f.frozen(q, cfg), TaskSpec{}, cfg);
  EXPECT_THROW(objective_gradient(prob, VectorXd::Zero(prob.size())), UnsupportedMode);
}

TEST(OptimizeControls, PureControlCostGoesToZero) {
  Fixture f;
  MpcConfig cfg;
  cfg.cost.w_contact = cfg.cost.w_grasp = cfg.cost.w_position = cfg.cost.w_quat = 0.0;
  const VectorXd q = f.resting();
  const MpcProblem prob(f.sys, q, f.frozen(q, cfg), TaskSpec{}, cfg);
  const OptimizeResult r = optimize_controls(prob, VectorXd::Constant(prob.size(), 0.004));
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.u.cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE(r.projected_gradient_norm, cfg.tolerance);
}

TEST(OptimizeControls, ClippedMinimizer) {
  Fixture f;
  MpcConfig cfg;
  cfg.cost.w_grasp = cfg.cost.w_position = cfg.cost.w_quat = 0.0;
  cfg.cost.w_control = 1e-3;
  cfg.horizon = 2;
  Posed far;
  far.position = Vector3d(0.0, 0.0, 0.5);
  VectorXd q = fingertip_start(f.scene, far, 0.3);
  q.segment<3>(f.idx.fingertip_q[0]) = q.segment<3>(f.idx.object_q) + Vector3d(-1.0, 0.0, 0.0);
  const MpcProblem prob(f.sys, q, f.frozen(q, cfg), TaskSpec{}, cfg);
  ASSERT_TRUE(prob.frozen().empty());
  const OptimizeResult r = optimize_controls(prob, VectorXd::Zero(prob.size()));
  // Unconstrained u_0.x is about 1 m toward the object; the box clips it. u_1 only pays control cost.
  EXPECT_NEAR(r.u(0), cfg.u_max, 1e-12);
  EXPECT_LE(r.u.head(9).cwiseAbs().maxCoeff(), cfg.u_max);
  EXPECT_LE(r.u.tail(9).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(OptimizeControls, ObjectiveMonotone) {
  Fixture f;
  MpcConfig cfg;
  const VectorXd q = f.resting(0.035);
  TaskSpec task;
  task.target_position = Vector3d(0.05, 0.02, 0.03);
  task.target_orientation = rpy_to_quat(0.0, 0.0, 0.7);
  const MpcProblem prob(f.sys, q, f.frozen(q, cfg), task, cfg);
  const OptimizeResult r = optimize_controls(prob, VectorXd::Zero(prob.size()));
  ASSERT_GE(r.objective.size(), 2u);
  for (std::size_t i = 1; i < r.objective.size(); ++i) EXPECT_LE(r.objective[i], r.objective[i - 1]);
  EXPECT_TRUE(r.converged || r.stalled || r.iterations == cfg.max_iterations);
  EXPECT_LE(r.u.cwiseAbs().maxCoeff(), cfg.u_max);
}

TEST(ShiftWarmStart, ShiftAndRepeat) {
  const VectorXd prev = (VectorXd(6) << 1, 2, 3, 4, 5, 6).finished();
  EXPECT_EQ(shift_warm_start(prev, 2), (VectorXd(6) << 3, 4, 5, 6, 5, 6).finished());
  EXPECT_EQ(shift_warm_start(prev, 6), prev);
  EXPECT_THROW(shift_warm_start(prev, 4), DimensionMismatch);
}

TEST(PolicyStep, BoundedAndDeterministic) {
  Fixture f;
  MpcConfig cfg;
  const VectorXd q = f.resting(0.035);
  TaskSpec task;
  task.target_position = Vector3d(0.05, 0.02, 0.03);
  task.target_orientation = rpy_to_quat(0.0, 0.0, kPi / 3.0);
  const PolicyStep a = mpc_policy_step(f.sys, q, task, cfg, nullptr);
  const PolicyStep b = mpc_policy_step(f.sys, q, task, cfg, nullptr);
  EXPECT_EQ(a.u0, b.u0);
  EXPECT_EQ(a.u0.size(), 9);
  EXPECT_TRUE((a.u0.array() >= cfg.u_min).all() && (a.u0.array() <= cfg.u_max).all());
  EXPECT_GT(a.solve_seconds, 0.0);
  const PolicyStep c = mpc_policy_step(f.sys, q, task, cfg, &a.solution);
  EXPECT_TRUE((c.u0.array() >= cfg.u_min).all() && (c.u0.array() <= cfg.u_max).all());
}

TEST(SuccessCheck, Window) {
  TaskSpec task;
  Posed ok;
  Posed bad;
  bad.position = Vector3d(0.1, 0, 0);
  std::vector<Posed> h(20, ok);
  EXPECT_EQ(success_check(h, task, 20), std::optional<int>(19));
  h[19] = bad;
  EXPECT_FALSE(success_check(h, task, 20).has_value());
  std::vector<Posed> edge(5);
  for (Posed& p : edge) p.position = Vector3d(0.02, 0, 0);
  EXPECT_EQ(success_check(edge, task, 5), std::optional<int>(4));
  EXPECT_THROW(success_check(edge, task, 0), InvalidArgument);
}

TEST(SuccessCheck, QuaternionThresholdEquality) {
  TaskSpec task;
  task.quat_tolerance = 0.5;
  Posed p;
  p.orientation = Eigen::Quaterniond(std::sqrt(0.5), 0, 0, std::sqrt(0.5));
  const double e = quaternion_error(p, task);
  task.quat_tolerance = e;
  EXPECT_EQ(success_check({p}, task, 1), std::optional<int>(0));
}
