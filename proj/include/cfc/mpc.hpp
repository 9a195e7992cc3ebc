#pragma once

// Contact-implicit MPC on the closed-form model: contacts are detected once
// at the measured state and frozen across the prediction horizon.

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "cfc/collision.hpp"
#include "cfc/contact.hpp"
#include "cfc/layout.hpp"
#include "cfc/steppers.hpp"

namespace cfc {

struct CostConfig {
  double w_contact = 1.0;
  double w_grasp = 0.05;
  double w_control = 50.0;
  double w_position = 5000.0;
  double w_quat = 50.0;

  void validate() const;
};

struct TaskSpec {
  Vector3d target_position = Vector3d::Zero();
  Eigen::Quaterniond target_orientation = Eigen::Quaterniond::Identity();
  double position_tolerance = 0.02;
  double quat_tolerance = 0.015;

  void validate() const;
};

struct MpcConfig {
  int horizon = 4;
  /// Per-coordinate bounds; empty vectors fall back to the scalar bounds.
  VectorXd u_lb;
  VectorXd u_ub;
  double u_min = -0.005;
  double u_max = 0.005;
  int max_iterations = 50;
  double tolerance = 1e-6;  // projected-gradient infinity norm
  int rollout_cap = 2000;
  int success_window = 20;
  /// Model stiffness K = k * I and softplus sharpness.
  double k = 1.0;
  double gamma = 100.0;
  CfMode mode = CfMode::kSoftplus;
  CostConfig cost;
  GeometryConfig geometry;

  VectorXd lower(int nu) const;
  VectorXd upper(int nu) const;
  void validate(int nu) const;
};

/// A quasi-dynamic system with one manipulated object and point fingertips.
struct ManipulationSystem {
  SystemLayout layout;
  int object = -1;               // free, unactuated body
  std::vector<int> fingertips;   // translation bodies, actuated
  QuasiDynamicParams params;
  FrictionTable friction;

  void validate() const;
};

/// q offsets of the cost-relevant coordinates.
struct CostIndex {
  int object_q = 0;
  std::vector<int> fingertip_q;

  static CostIndex from(const ManipulationSystem& sys);
};

/// w_c sum |p_obj - p_i|^2 + w_g |sum_i R' (p_i - p_obj) / |p_i - p_obj||^2 + w_u |u|^2.
/// A fingertip at the object center contributes a zero direction and sets
/// *degenerate when given.
double path_cost(const CostConfig& c, const CostIndex& idx, const VectorXd& q, const VectorXd& u,
                 bool* degenerate = nullptr);

/// w_p |p_obj - p_target|^2 + w_q (1 - (q_target' q_obj)^2).
double final_cost(const CostConfig& c, const CostIndex& idx, const TaskSpec& task, const VectorXd& q);

/// One policy step's optimization problem. The stacked control vector is
/// time-major: entries [t * nu, (t + 1) * nu) hold u_t.
class MpcProblem {
 public:
  MpcProblem(const ManipulationSystem& sys, const VectorXd& q0, const ContactSystem& frozen,
             const TaskSpec& task, const MpcConfig& cfg);

  int nu() const { return nu_; }
  int horizon() const { return cfg_.horizon; }
  int size() const { return nu_ * cfg_.horizon; }
  const VectorXd& q0() const { return q0_; }
  const ContactSystem& frozen() const { return frozen_; }
  const MpcConfig& config() const { return cfg_; }
  const TaskSpec& task() const { return task_; }
  const CostIndex& index() const { return index_; }

  const SystemLayout& layout() const { return layout_; }
  double h() const { return params_.h; }

  /// System matrices at control u (b = tau + K_r u).
  LinearizedSystem linearized(const VectorXd& u) const;
  /// Predicted velocity for one step under the frozen contacts.
  VectorXd predict_velocity(const VectorXd& u) const;

  // v(u) = c0 + P u + G lambda(z),  z = z0 + Z u,  lambda = softplus or max.
  const VectorXd& c0() const { return c0_; }
  const MatrixXd& p() const { return p_; }
  const MatrixXd& g() const { return g_; }
  const VectorXd& z0() const { return z0_; }
  const MatrixXd& zmat() const { return z_; }

 private:
  SystemLayout layout_;
  QuasiDynamicParams params_;
  VectorXd q0_;
  ContactSystem frozen_;
  TaskSpec task_;
  MpcConfig cfg_;
  CostIndex index_;
  int nu_ = 0;

  VectorXd c0_;
  MatrixXd p_;
  MatrixXd g_;
  VectorXd z0_;
  MatrixXd z_;
};

struct RolloutResult {
  std::vector<VectorXd> states;  // T + 1 entries
  double cost = 0.0;
  bool degenerate_grasp = false;
};

RolloutResult rollout(const MpcProblem& prob, const VectorXd& u_seq);

/// Gradient of rollout(prob, u_seq).cost with respect to u_seq (softplus mode only).
VectorXd objective_gradient(const MpcProblem& prob, const VectorXd& u_seq, double* cost = nullptr);

struct OptimizeResult {
  VectorXd u;
  std::vector<double> objective;  // one entry per accepted iterate, starting at the warm start
  int iterations = 0;
  double projected_gradient_norm = 0.0;
  bool converged = false;
  bool stalled = false;
};

/// Projected gradient with Barzilai-Borwein trial steps and Armijo backtracking.
OptimizeResult optimize_controls(const MpcProblem& prob, const VectorXd& warm_start);

/// (u_0, ..., u_{T-1}) -> (u_1, ..., u_{T-1}, u_{T-1}).
VectorXd shift_warm_start(const VectorXd& previous, int nu);

struct PolicyStep {
  VectorXd u0;
  VectorXd solution;
  OptimizeResult info;
  int num_contacts = 0;
  double solve_seconds = 0.0;
};

/// Detect contacts at q_real, freeze them, optimize and return the first input.
PolicyStep mpc_policy_step(const ManipulationSystem& sys, const VectorXd& q_real, const TaskSpec& task,
                           const MpcConfig& cfg, const VectorXd* previous_solution);

/// Object pose error terms used by the success test and the metrics.
double position_error(const Posed& pose, const TaskSpec& task);
double quaternion_error(const Posed& pose, const TaskSpec& task);

/// Index of the first pose that ends `window` consecutive in-threshold poses.
std::optional<int> success_check(const std::vector<Posed>& history, const TaskSpec& task, int window);

}  // namespace cfc
