#include "cfc/steppers.hpp"

#include <string>

#include "cfc/error.hpp"
#include "cfc/se3.hpp"

namespace cfc {

CfParams CfParams::uniform(int rows, double k, CfMode mode, double gamma) {
  CfParams p;
  p.k_diag = VectorXd::Constant(rows, k);
  p.mode = mode;
  p.gamma = gamma;
  return p;
}

void CfParams::validate(int rows) const {
  if (k_diag.size() != rows) {
    throw DimensionMismatch("k_diag has " + std::to_string(k_diag.size()) + " entries, expected " +
                            std::to_string(rows));
  }
  if (rows > 0 && !(k_diag.array() > 0.0).all()) throw InvalidArgument("k_diag entries must be positive");
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
}

namespace {

void check_system(const LinearizedSystem& sys, const ContactSystem& cs) {
  const int n = sys.dim();
  if (sys.q_mat.rows() != n || sys.q_mat.cols() != n) throw DimensionMismatch("Q does not match b");
  if (!(sys.h > 0.0)) throw InvalidArgument("h must be positive");
  if (!cs.empty() && (cs.j_tilde.cols() != n || cs.phi_tilde.size() != cs.rows())) {
    throw DimensionMismatch("contact system does not match the velocity dimension");
  }
}

Eigen::LLT<MatrixXd> factor(const MatrixXd& q) {
  Eigen::LLT<MatrixXd> llt(q);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("Q is not positive definite");
  return llt;
}

StepResult closed_form(const LinearizedSystem& sys, const ContactSystem& cs, const CfParams& p,
                       const VectorXd* d_diag) {
  check_system(sys, cs);
  p.validate(cs.rows());
  const double h = sys.h;
  const auto llt = factor(sys.q_mat);
  const VectorXd qinv_b = llt.solve(sys.b_vec);

  StepResult out;
  if (cs.empty()) {
    out.v_plus = qinv_b / h;
    out.beta_plus.resize(0);
    return out;
  }
  const VectorXd jq_b = cs.j_tilde * qinv_b;
  VectorXd arg = -p.k_diag.cwiseProduct(jq_b + cs.phi_tilde);
  if (d_diag) arg -= d_diag->cwiseProduct(jq_b / h);

  VectorXd lambda(arg.size());
  for (int i = 0; i < arg.size(); ++i) {
    lambda(i) = p.mode == CfMode::kHardMax ? std::max(arg(i), 0.0) : softplus(arg(i), p.gamma);
  }
  out.v_plus = qinv_b / h + llt.solve(cs.j_tilde.transpose() * lambda) / h;
  out.beta_plus = h * lambda;
  if (!cs.frames.empty()) out.forces = decompose_contact_forces(out.beta_plus, cs.frames);
  return out;
}

}  // namespace

StepResult cf_step(const LinearizedSystem& sys, const ContactSystem& cs, const CfParams& p) {
  return closed_form(sys, cs, p, nullptr);
}

StepResult cf_step_extended(const LinearizedSystem& sys, const VectorXd& v, const ContactSystem& cs,
                            const CfParams& p, const VectorXd& d_diag) {
  if (v.size() != sys.dim()) throw DimensionMismatch("velocity does not match the system dimension");
  if (d_diag.size() != cs.rows()) throw DimensionMismatch("d_diag length differs from stacked rows");
  if (cs.rows() > 0 && (d_diag.array() < 0.0).any()) throw InvalidArgument("d_diag must be nonnegative");
  return closed_form(sys, cs, p, &d_diag);
}

StepResult qp_step(const LinearizedSystem& sys, const ContactSystem& cs, const QpOptions& opts) {
  check_system(sys, cs);
  const double h = sys.h;
  const int n = sys.dim();
  const MatrixXd a = cs.empty() ? MatrixXd(0, n) : MatrixXd(h * cs.j_tilde);
  const VectorXd lb = cs.empty() ? VectorXd(0) : VectorXd(-cs.phi_tilde);
  const QpResult r = solve_qp(h * h * sys.q_mat, -h * sys.b_vec, a, lb, opts);

  StepResult out;
  out.v_plus = r.x;
  out.beta_plus = (h * r.multipliers).cwiseMax(0.0);
  if (!cs.frames.empty()) out.forces = decompose_contact_forces(out.beta_plus, cs.frames);
  return out;
}

VectorXd regularized_dual_solve(const LinearizedSystem& sys, const ContactSystem& cs,
                                const DualOracleConfig& cfg) {
  check_system(sys, cs);
  const int m = cs.rows();
  if (m == 0) return VectorXd(0);
  const VectorXd r = cfg.r_diag.size() == 0 ? VectorXd::Constant(m, 1e-6) : cfg.r_diag;
  if (r.size() != m) throw DimensionMismatch("r_diag length differs from stacked rows");
  if (!(r.array() > 0.0).all()) throw InvalidArgument("r_diag entries must be positive");

  const double h = sys.h;
  const auto llt = factor(sys.q_mat);
  const MatrixXd qinv_jt = llt.solve(MatrixXd(cs.j_tilde.transpose()));
  MatrixXd a = cs.j_tilde * qinv_jt;
  a.diagonal() += r;
  const VectorXd c = cs.j_tilde * llt.solve(sys.b_vec) + cs.phi_tilde;

  const QpResult res = solve_qp(a / (h * h), c / h, MatrixXd::Identity(m, m), VectorXd::Zero(m), cfg.qp);
  return res.x.cwiseMax(0.0);
}

std::vector<ContactForce> decompose_contact_forces(const VectorXd& beta,
                                                   const std::vector<ContactFrame>& frames) {
  int rows = 0;
  for (const ContactFrame& f : frames) rows += static_cast<int>(f.tangent_dirs.size());
  if (beta.size() != rows) throw DimensionMismatch("beta length differs from total tangent directions");
  if (rows > 0 && beta.minCoeff() < 0.0) throw InvalidArgument("beta entries must be nonnegative");

  std::vector<ContactForce> out;
  out.reserve(frames.size());
  int row = 0;
  for (const ContactFrame& f : frames) {
    ContactForce cf;
    double total = 0.0;
    for (const Vector3d& d : f.tangent_dirs) {
      total += beta(row);
      cf.friction += beta(row) * d;
      ++row;
    }
    cf.normal = total * f.normal;
    cf.friction *= f.mu;
    out.push_back(cf);
  }
  return out;
}

VectorXd primal_from_dual(const LinearizedSystem& sys, const ContactSystem& cs, const VectorXd& beta) {
  check_system(sys, cs);
  const double h = sys.h;
  VectorXd rhs = h * sys.b_vec;
  if (!cs.empty()) rhs += cs.j_tilde.transpose() * beta;
  return factor(sys.q_mat).solve(rhs) / (h * h);
}

}  // namespace cfc
