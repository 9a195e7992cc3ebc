#include "cfc/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "cfc/collision.hpp"
#include "cfc/error.hpp"
#include "cfc/qp.hpp"
#include "cfc/scenarios.hpp"
#include "cfc/se3.hpp"

namespace cfc {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

MatrixXd gaussian(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = n(rng);
  }
  return m;
}

Vector3d random_unit(std::mt19937_64& rng) {
  Vector3d v = gaussian(rng, 3, 1);
  while (v.norm() < 1e-6) v = gaussian(rng, 3, 1);
  return v.normalized();
}

VectorXd random_k(std::mt19937_64& rng, int rows) {
  VectorXd k(rows);
  for (int i = 0; i < rows; ++i) k(i) = std::exp(uniform(rng, std::log(0.1), std::log(10.0)));
  return k;
}

PropertyResult finish(std::string name, int instances, double worst, double tolerance, std::string detail = "") {
  PropertyResult r;
  r.name = std::move(name);
  r.instances = instances;
  r.worst = worst;
  r.tolerance = tolerance;
  r.passed = std::isfinite(worst) && worst <= tolerance;
  r.detail = std::move(detail);
  return r;
}

VectorXd qp_velocity_from_lcp(const ContactInstance& inst) {
  const auto llt = inst.sys.q_mat.llt();
  const VectorXd qinv_b = llt.solve(inst.sys.b_vec);
  const MatrixXd qinv_jt = llt.solve(MatrixXd(inst.cs.j_tilde.transpose()));
  const MatrixXd m = inst.cs.j_tilde * qinv_jt;
  const VectorXd q = inst.cs.j_tilde * qinv_b + inst.cs.phi_tilde;
  const VectorXd y = lcp_oracle(m, q);
  return (qinv_b + qinv_jt * y) / inst.sys.h;
}

}  // namespace

bool ValidationReport::passed() const {
  return std::all_of(properties.begin(), properties.end(), [](const PropertyResult& p) { return p.passed; });
}

ContactInstance random_contact_instance(std::mt19937_64& rng, int nv, int contacts, int n_d) {
  if (nv < 1 || contacts < 0) throw InvalidArgument("instance sizes must be positive");
  ContactInstance inst;
  const MatrixXd a = gaussian(rng, nv, nv);
  inst.sys.q_mat = a * a.transpose() / nv + 0.5 * MatrixXd::Identity(nv, nv);
  inst.sys.b_vec = gaussian(rng, nv, 1);
  inst.sys.h = uniform(rng, 0.01, 0.1);

  std::vector<ContactJacobianBlock> blocks;
  VectorXd phi(contacts), mu(contacts);
  for (int i = 0; i < contacts; ++i) {
    const MatrixXd jp = gaussian(rng, 3, nv) / std::sqrt(static_cast<double>(nv));
    ContactFrame f;
    f.normal = random_unit(rng);
    f.tangent_dirs = tangent_basis(f.normal, n_d);
    f.mu = uniform(rng, 0.1, 1.0);
    ContactJacobianBlock b;
    b.jn = f.normal.transpose() * jp;
    b.jd.resize(n_d, nv);
    for (int j = 0; j < n_d; ++j) b.jd.row(j) = f.tangent_dirs[j].transpose() * jp;
    blocks.push_back(b);
    phi(i) = 0.0;
    mu(i) = f.mu;
    inst.cs.frames.push_back(f);
  }
  const auto frames = inst.cs.frames;
  inst.cs = stack_contact_system(blocks, phi, mu);
  inst.cs.frames = frames;
  // Shift each gap so that a random velocity satisfies every row: the QP is
  // feasible while gaps of both signs remain.
  const VectorXd v_feasible = gaussian(rng, nv, 1);
  const VectorXd jv = inst.sys.h * inst.cs.j_tilde * v_feasible;
  for (int i = 0; i < contacts; ++i) {
    phi(i) = -jv.segment(i * n_d, n_d).minCoeff() + uniform(rng, 0.0, 0.05);
    inst.cs.phi_tilde.segment(i * n_d, n_d).setConstant(phi(i));
  }
  return inst;
}

ContactInstance random_single_row_instance(std::mt19937_64& rng) {
  const int nv = uniform_int(rng, 1, 6);
  ContactInstance inst;
  const MatrixXd a = gaussian(rng, nv, nv);
  inst.sys.q_mat = a * a.transpose() / nv + 0.5 * MatrixXd::Identity(nv, nv);
  inst.sys.b_vec = gaussian(rng, nv, 1);
  inst.sys.h = uniform(rng, 0.01, 0.1);
  ContactJacobianBlock b;
  b.jn = gaussian(rng, 1, nv);
  b.jd = gaussian(rng, 1, nv);
  inst.cs = stack_contact_system({b}, VectorXd::Constant(1, uniform(rng, -0.05, 0.05)),
                                 VectorXd::Constant(1, uniform(rng, 0.1, 1.0)));
  return inst;
}

FingertipProblem random_fingertip_problem(std::mt19937_64& rng) {
  const Scene scene = build_scene("fingertips_box");
  FingertipProblem p;
  p.sys = scene.manipulation();
  p.cfg.gamma = 100.0;
  p.cfg.mode = CfMode::kSoftplus;
  p.cfg.k = std::exp(uniform(rng, std::log(0.1), std::log(10.0)));

  const double yaw = uniform(rng, -std::numbers::pi, std::numbers::pi);
  Posed obj;
  obj.position = Vector3d(uniform(rng, -0.02, 0.02), uniform(rng, -0.02, 0.02), 0.03 + uniform(rng, -0.002, 0.002));
  obj.orientation = rpy_to_quat(uniform(rng, -0.1, 0.1), uniform(rng, -0.1, 0.1), yaw);
  p.q0 = scene.q0;
  scene.layout.set_pose(scene.object, obj, p.q0);
  for (int f : scene.fingertips) {
    const double a = uniform(rng, -std::numbers::pi, std::numbers::pi);
    const double r = uniform(rng, 0.035, 0.06);
    Posed tip;
    tip.position = obj.position + Vector3d(r * std::cos(a), r * std::sin(a), uniform(rng, -0.015, 0.02));
    scene.layout.set_pose(f, tip, p.q0);
  }
  const auto contacts = detect_contacts(make_snapshot(scene.layout, p.q0, scene.friction), p.cfg.geometry);
  p.frozen = build_contact_system(contacts, p.q0, scene.layout);

  p.task.target_position = Vector3d(uniform(rng, -0.1, 0.1), uniform(rng, -0.1, 0.1), 0.03);
  p.task.target_orientation = rpy_to_quat(0.0, 0.0, uniform(rng, -std::numbers::pi, std::numbers::pi));
  const int n = scene.layout.nu() * p.cfg.horizon;
  p.u.resize(n);
  for (int i = 0; i < n; ++i) p.u(i) = uniform(rng, p.cfg.u_min, p.cfg.u_max);
  return p;
}

PropertyResult check_dual_exactness(const ValidationOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  double worst = 0.0;
  for (int t = 0; t < opts.dual_exactness_instances; ++t) {
    const ContactInstance inst = random_single_row_instance(rng);
    const double r = std::exp(uniform(rng, std::log(1e-3), std::log(1.0)));
    const auto llt = inst.sys.q_mat.llt();
    const double a = (inst.cs.j_tilde * llt.solve(MatrixXd(inst.cs.j_tilde.transpose())))(0, 0);
    CfParams p = CfParams::uniform(1, 1.0 / (a + r), CfMode::kHardMax);
    const VectorXd beta_cf = opts.cf_stepper(inst.sys, inst.cs, p).beta_plus;
    DualOracleConfig cfg;
    cfg.r_diag = VectorXd::Constant(1, r);
    const VectorXd beta_dual = regularized_dual_solve(inst.sys, inst.cs, cfg);
    worst = std::max(worst, (beta_cf - beta_dual).cwiseAbs().maxCoeff());
  }
  return finish("dual_exactness", opts.dual_exactness_instances, worst, 1e-8, "|beta_cf - beta_dual| on diagonal instances");
}

PropertyResult check_complementarity(const ValidationOptions& opts) {
  std::mt19937_64 rng(opts.seed + 1);
  double worst = 0.0;
  for (int t = 0; t < opts.complementarity_instances; ++t) {
    const ContactInstance inst = random_contact_instance(rng, uniform_int(rng, 2, 8), uniform_int(rng, 1, 4), 4);
    const CfParams p{random_k(rng, inst.cs.rows()), 100.0, CfMode::kHardMax};
    const VectorXd beta = opts.cf_stepper(inst.sys, inst.cs, p).beta_plus;
    const VectorXd c = inst.cs.j_tilde * inst.sys.q_mat.llt().solve(inst.sys.b_vec) + inst.cs.phi_tilde;
    const VectorXd w = beta.cwiseQuotient(inst.sys.h * p.k_diag) + c;
    for (int i = 0; i < beta.size(); ++i) {
      worst = std::max({worst, -beta(i), -w(i), std::min(beta(i), w(i))});
    }
  }
  return finish("modified_complementarity", opts.complementarity_instances, worst, 1e-12,
                "0 <= beta _|_ (hK)^-1 beta + JQ^-1 b + phi >= 0");
}

PropertyResult check_coulomb_cone(const ValidationOptions& opts) {
  std::mt19937_64 rng(opts.seed + 2);
  double worst = 0.0;
  auto cone_violation = [](const std::vector<ContactForce>& forces, const std::vector<ContactFrame>& frames) {
    double w = 0.0;
    for (std::size_t i = 0; i < forces.size(); ++i) {
      w = std::max(w, forces[i].friction.norm() - frames[i].mu * forces[i].normal.norm());
    }
    return w;
  };
  for (int t = 0; t < opts.cone_instances; ++t) {
    const int nv = uniform_int(rng, 2, 8);
    const ContactInstance inst = random_contact_instance(rng, nv, uniform_int(rng, 1, 3), 4);
    const CfParams p{random_k(rng, inst.cs.rows()), 100.0, CfMode::kHardMax};
    VectorXd d(inst.cs.rows());
    for (int i = 0; i < d.size(); ++i) d(i) = uniform(rng, 0.0, 1.0);
    const VectorXd v = gaussian(rng, nv, 1);
    worst = std::max(worst, cone_violation(opts.cf_stepper(inst.sys, inst.cs, p).forces, inst.cs.frames));
    worst = std::max(worst, cone_violation(cf_step_extended(inst.sys, v, inst.cs, p, d).forces, inst.cs.frames));
    worst = std::max(worst, cone_violation(qp_step(inst.sys, inst.cs).forces, inst.cs.frames));
  }
  return finish("coulomb_cone", opts.cone_instances, worst, 1e-12, "max ||f_t|| - mu ||f_n|| over cf, cf_extended, qp");
}

PropertyResult check_qp_against_lcp(const ValidationOptions& opts) {
  std::mt19937_64 rng(opts.seed + 3);
  double worst = 0.0;
  for (int t = 0; t < opts.qp_instances; ++t) {
    const ContactInstance inst = random_contact_instance(rng, uniform_int(rng, 2, 8), uniform_int(rng, 1, 3), 4);
    const VectorXd v_qp = qp_step(inst.sys, inst.cs).v_plus;
    const VectorXd v_lcp = qp_velocity_from_lcp(inst);
    worst = std::max(worst, (v_qp - v_lcp).cwiseAbs().maxCoeff());
  }
  return finish("qp_matches_lcp", opts.qp_instances, worst, 1e-6, "|v_qp - v_lcp| with n_c * n_d <= 12");
}

PropertyResult check_qp_kkt(const ValidationOptions& opts) {
  std::mt19937_64 rng(opts.seed + 3);
  double worst = 0.0;
  for (int t = 0; t < opts.qp_instances; ++t) {
    const ContactInstance inst = random_contact_instance(rng, uniform_int(rng, 2, 8), uniform_int(rng, 1, 3), 4);
    const double h = inst.sys.h;
    const QpResult r = solve_qp(h * h * inst.sys.q_mat, -h * inst.sys.b_vec, h * inst.cs.j_tilde,
                                -inst.cs.phi_tilde);
    worst = std::max({worst, r.stationarity, r.feasibility, r.complementarity});
  }
  return finish("qp_kkt_residuals", opts.qp_instances, worst, 1e-8, "stationarity, feasibility, complementarity");
}

PropertyResult check_dual_recovery(const ValidationOptions& opts) {
  std::mt19937_64 rng(opts.seed + 4);
  double worst = 0.0;
  for (int t = 0; t < opts.qp_instances; ++t) {
    const ContactInstance inst = random_contact_instance(rng, uniform_int(rng, 2, 8), uniform_int(rng, 1, 3), 4);
    const StepResult r = qp_step(inst.sys, inst.cs);
    const VectorXd v = primal_from_dual(inst.sys, inst.cs, r.beta_plus);
    worst = std::max(worst, (v - r.v_plus).cwiseAbs().maxCoeff());
  }
  return finish("dual_to_primal_recovery", opts.qp_instances, worst, 1e-8, "Q^-1 (h b + J' beta) / h^2 vs QP primal");
}

PropertyResult check_gradient(const ValidationOptions& opts) {
  std::mt19937_64 rng(opts.seed + 5);
  double worst = 0.0;
  const double step = 1e-6;
  for (int t = 0; t < opts.gradient_instances; ++t) {
    const FingertipProblem fp = random_fingertip_problem(rng);
    const MpcProblem prob(fp.sys, fp.q0, fp.frozen, fp.task, fp.cfg);
    const VectorXd g = objective_gradient(prob, fp.u);
    VectorXd fd(g.size());
    for (int i = 0; i < g.size(); ++i) {
      VectorXd up = fp.u, dn = fp.u;
      up(i) += step;
      dn(i) -= step;
      fd(i) = (rollout(prob, up).cost - rollout(prob, dn).cost) / (2.0 * step);
    }
    worst = std::max(worst, (g - fd).norm() / std::max(fd.norm(), 1e-8));
  }
  return finish("mpc_gradient", opts.gradient_instances, worst, 1e-4, "relative error vs central differences");
}

PropertyResult check_softplus_convergence(const ValidationOptions& opts) {
  std::mt19937_64 rng(opts.seed + 6);
  double final_gap = 0.0;
  int non_monotone = 0;
  for (int t = 0; t < opts.softplus_instances; ++t) {
    const ContactInstance inst = random_contact_instance(rng, uniform_int(rng, 2, 8), uniform_int(rng, 1, 4), 4);
    const VectorXd k = random_k(rng, inst.cs.rows());
    const VectorXd v_max = cf_step(inst.sys, inst.cs, CfParams{k, 100.0, CfMode::kHardMax}).v_plus;
    double previous = std::numeric_limits<double>::infinity();
    for (double gamma = 100.0; gamma <= 12800.0; gamma *= 2.0) {
      const VectorXd v = cf_step(inst.sys, inst.cs, CfParams{k, gamma, CfMode::kSoftplus}).v_plus;
      const double gap = (v - v_max).cwiseAbs().maxCoeff();
      if (!(gap < previous || gap == 0.0)) ++non_monotone;
      previous = gap;
    }
    final_gap = std::max(final_gap, previous);
  }
  const double worst = non_monotone > 0 ? std::numeric_limits<double>::infinity() : final_gap;
  return finish("softplus_convergence", opts.softplus_instances, worst, 1e-4,
                "gap at gamma = 12800; " + std::to_string(non_monotone) + " non-monotone doublings");
}

ValidationReport run_validation(const ValidationOptions& opts) {
  ValidationReport report;
  report.properties = {check_dual_exactness(opts),         check_complementarity(opts),   check_coulomb_cone(opts),
                       check_qp_against_lcp(opts), check_qp_kkt(opts),            check_dual_recovery(opts),
                       check_gradient(opts),       check_softplus_convergence(opts)};
  return report;
}

std::string format_report(const ValidationReport& report) {
  std::ostringstream out;
  for (const PropertyResult& p : report.properties) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-4s %-26s instances=%-6d worst=%.3e tol=%.1e", p.passed ? "PASS" : "FAIL",
                  p.name.c_str(), p.instances, p.worst, p.tolerance);
    out << line;
    if (!p.detail.empty()) out << "  (" << p.detail << ")";
    out << '\n';
  }
  return out.str();
}

}  // namespace cfc
