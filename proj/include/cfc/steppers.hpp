#pragma once

// Contact resolvers for one time step.

#include <Eigen/Dense>

#include <vector>

#include "cfc/contact.hpp"
#include "cfc/qp.hpp"

namespace cfc {

enum class CfMode { kHardMax, kSoftplus };

struct CfParams {
  VectorXd k_diag;  // one entry per stacked row, > 0
  double gamma = 100.0;
  CfMode mode = CfMode::kHardMax;

  /// Constant K = k * I for `rows` stacked rows.
  static CfParams uniform(int rows, double k, CfMode mode = CfMode::kHardMax, double gamma = 100.0);
  void validate(int rows) const;
};

struct ContactForce {
  Vector3d normal = Vector3d::Zero();
  Vector3d friction = Vector3d::Zero();
};

struct StepResult {
  VectorXd v_plus;
  VectorXd beta_plus;
  std::vector<ContactForce> forces;  // empty when cs has no frames
};

struct DualOracleConfig {
  VectorXd r_diag;  // empty means 1e-6 on every row
  QpOptions qp;
};

/// Closed-form step: beta = h * max(-K (Jt Q^-1 b + phit), 0) and
/// v+ = Q^-1 b / h + Q^-1 Jt' beta / h^2. Softplus mode swaps max for
/// softplus(., gamma).
StepResult cf_step(const LinearizedSystem& sys, const ContactSystem& cs, const CfParams& p);

/// Closed-form step with an extra damping term -D Jt Q^-1 b / h inside the
/// max. `v` is the current velocity (already folded into b for full-dynamic
/// systems; kept for interface symmetry and dimension checks).
StepResult cf_step_extended(const LinearizedSystem& sys, const VectorXd& v, const ContactSystem& cs,
                            const CfParams& p, const VectorXd& d_diag);

/// Reference solution of min 1/2 h^2 v'Qv - h v'b  s.t.  h Jt v + phit >= 0.
StepResult qp_step(const LinearizedSystem& sys, const ContactSystem& cs, const QpOptions& opts = {});

/// Maximizer over beta >= 0 of the regularized dual
/// -1/(2h^2) beta'(Jt Q^-1 Jt' + R) beta - 1/h beta'(Jt Q^-1 b + phit).
VectorXd regularized_dual_solve(const LinearizedSystem& sys, const ContactSystem& cs,
                                const DualOracleConfig& cfg = {});

/// Per-contact normal (sum_j beta_ij) n_i and friction mu_i sum_j beta_ij d_ij.
std::vector<ContactForce> decompose_contact_forces(const VectorXd& beta,
                                                   const std::vector<ContactFrame>& frames);

/// v+ = Q^-1 (h b + Jt' beta) / h^2.
VectorXd primal_from_dual(const LinearizedSystem& sys, const ContactSystem& cs, const VectorXd& beta);

}  // namespace cfc
