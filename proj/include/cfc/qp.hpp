#pragma once

#include <Eigen/Dense>

#include <vector>

namespace cfc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct QpOptions {
  double kkt_tolerance = 1e-8;
  /// 0 means 10 * (n + m).
  int max_iterations = 0;
};

struct QpResult {
  VectorXd x;
  VectorXd multipliers;  // one per inequality row, >= 0
  std::vector<int> active;
  int iterations = 0;
  double stationarity = 0.0;     // ||Hx + g - A'y||_inf
  double feasibility = 0.0;      // max(0, -(Ax - lb))_inf
  double complementarity = 0.0;  // max |y_i (a_i x - lb_i)|
};

/// Strictly convex QP  min 1/2 x'Hx + g'x  s.t.  A x >= lb.
///
/// Dual active-set method (Goldfarb-Idnani): starts from the unconstrained
/// minimizer and adds the most violated constraint until the primal is
/// feasible; multipliers stay nonnegative throughout. Linearly dependent rows
/// are handled with pure dual steps. The final active set is re-solved once
/// to polish the KKT residuals. Throws NonConvergence at the iteration cap
/// and Infeasible when a violated row cannot be satisfied.
QpResult solve_qp(const MatrixXd& hessian, const VectorXd& gradient, const MatrixXd& a,
                  const VectorXd& lb, const QpOptions& options = {});

/// Brute-force solver for 0 <= z  _|_  Mz + q >= 0 (dimension <= 20).
/// Active sets are enumerated in increasing bitmask order (bit i set means
/// z_i may be positive); each restricted system is solved in the minimum-norm
/// sense and accepted when it is consistent and sign-feasible. Throws
/// Infeasible when no active set works.
VectorXd lcp_oracle(const MatrixXd& m, const VectorXd& q, double tolerance = 1e-10);

}  // namespace cfc
