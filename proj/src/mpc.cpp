#include "cfc/mpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "cfc/error.hpp"

namespace cfc {

void CostConfig::validate() const {
  if (w_contact < 0.0 || w_grasp < 0.0 || w_control < 0.0 || w_position < 0.0 || w_quat < 0.0) {
    throw InvalidArgument("cost weights must be nonnegative");
  }
}

void TaskSpec::validate() const {
  require_unit(target_orientation, "target orientation");
  if (!(position_tolerance > 0.0) || !(quat_tolerance > 0.0)) {
    throw InvalidArgument("success thresholds must be positive");
  }
}

VectorXd MpcConfig::lower(int nu) const {
  return u_lb.size() == 0 ? VectorXd::Constant(nu, u_min) : u_lb;
}

VectorXd MpcConfig::upper(int nu) const {
  return u_ub.size() == 0 ? VectorXd::Constant(nu, u_max) : u_ub;
}

void MpcConfig::validate(int nu) const {
  if (horizon < 0) throw InvalidArgument("horizon must be nonnegative");
  const VectorXd lo = lower(nu);
  const VectorXd hi = upper(nu);
  if (lo.size() != nu || hi.size() != nu) throw DimensionMismatch("control bounds length differs from nu");
  if (!(lo.array() < hi.array()).all()) throw InvalidArgument("u_lb must be below u_ub");
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be positive");
  if (tolerance < 0.0) throw InvalidArgument("tolerance must be nonnegative");
  if (rollout_cap < 1) throw InvalidArgument("rollout_cap must be positive");
  if (success_window < 1) throw InvalidArgument("success_window must be positive");
  if (!(k > 0.0) || !(gamma > 0.0)) throw InvalidArgument("k and gamma must be positive");
  cost.validate();
  geometry.validate();
}

void ManipulationSystem::validate() const {
  if (object < 0 || object >= layout.num_bodies()) throw UnknownBody("object id out of range");
  const Body& o = layout.body(object);
  if (o.joint != Joint::kFree || o.actuated) throw InvalidArgument("object must be a free, unactuated body");
  for (int f : fingertips) {
    if (f < 0 || f >= layout.num_bodies()) throw UnknownBody("fingertip id out of range");
    const Body& b = layout.body(f);
    if (b.joint != Joint::kTranslation || !b.actuated) {
      throw InvalidArgument("fingertip " + b.name + " must be an actuated translation body");
    }
  }
}

CostIndex CostIndex::from(const ManipulationSystem& sys) {
  CostIndex idx;
  idx.object_q = sys.layout.q_offset(sys.object);
  for (int f : sys.fingertips) idx.fingertip_q.push_back(sys.layout.q_offset(f));
  return idx;
}

namespace {

Eigen::Quaterniond object_quat(const CostIndex& idx, const VectorXd& q) {
  return Eigen::Quaterniond(q(idx.object_q + 3), q(idx.object_q + 4), q(idx.object_q + 5),
                            q(idx.object_q + 6));
}

// Sum of unit directions object -> fingertip, world frame.
Vector3d grasp_sum(const CostIndex& idx, const VectorXd& q, bool* degenerate) {
  const Vector3d po = q.segment<3>(idx.object_q);
  Vector3d s = Vector3d::Zero();
  for (int f : idx.fingertip_q) {
    const Vector3d d = q.segment<3>(f) - po;
    const double n = d.norm();
    if (n < 1e-12) {
      if (degenerate) *degenerate = true;
      continue;
    }
    s += d / n;
  }
  return s;
}

// d(path cost)/dq, state part only.
void add_path_state_gradient(const CostConfig& c, const CostIndex& idx, const VectorXd& q,
                             VectorXd& grad) {
  const Vector3d po = q.segment<3>(idx.object_q);
  const Vector3d s = grasp_sum(idx, q, nullptr);
  for (int f : idx.fingertip_q) {
    const Vector3d d = q.segment<3>(f) - po;
    // contact term
    grad.segment<3>(idx.object_q) += 2.0 * c.w_contact * (-d);
    grad.segment<3>(f) += 2.0 * c.w_contact * d;
    // grasp term; rotation leaves the norm unchanged, so only positions contribute
    const double n = d.norm();
    if (n < 1e-12) continue;
    const Vector3d dir = d / n;
    const Vector3d gd = 2.0 * c.w_grasp * (s - dir * dir.dot(s)) / n;
    grad.segment<3>(f) += gd;
    grad.segment<3>(idx.object_q) -= gd;
  }
}

void add_final_gradient(const CostConfig& c, const CostIndex& idx, const TaskSpec& task,
                        const VectorXd& q, VectorXd& grad) {
  grad.segment<3>(idx.object_q) +=
      2.0 * c.w_position * (q.segment<3>(idx.object_q) - task.target_position);
  const Eigen::Vector4d qt = wxyz(task.target_orientation);
  const double dot = qt.dot(q.segment<4>(idx.object_q + 3));
  grad.segment<4>(idx.object_q + 3) += -2.0 * c.w_quat * dot * qt;
}

// Reverse pass of q+ = integrate(layout, q, v, h): accumulates into g_q and g_v.
void integrate_adjoint(const SystemLayout& layout, const VectorXd& q, const VectorXd& v, double h,
                       const VectorXd& g_next, VectorXd& g_q, VectorXd& g_v) {
  for (int id = 0; id < layout.num_bodies(); ++id) {
    const Body& b = layout.body(id);
    const int qo = layout.q_offset(id);
    const int vo = layout.v_offset(id);
    switch (b.joint) {
      case Joint::kFree: {
        g_q.segment<3>(qo) += g_next.segment<3>(qo);
        g_v.segment<3>(vo) += h * g_next.segment<3>(qo);
        const Eigen::Quaterniond qc(q(qo + 3), q(qo + 4), q(qo + 5), q(qo + 6));
        const Vector3d theta = h * v.segment<3>(vo + 3);
        const Eigen::Quaterniond e = quat_exp<double>(theta);
        const Eigen::Vector4d x = quat_left_matrix(e) * wxyz(qc);
        const double xn = x.norm();
        const Eigen::Vector4d xh = x / xn;
        const Eigen::Vector4d g = g_next.segment<4>(qo + 3);
        const Eigen::Vector4d gx = (g - xh * xh.dot(g)) / xn;
        g_q.segment<4>(qo + 3) += quat_left_matrix(e).transpose() * gx;
        const Eigen::Vector4d ge = quat_right_matrix(qc).transpose() * gx;
        g_v.segment<3>(vo + 3) += h * quat_exp_jacobian<double>(theta).transpose() * ge;
        break;
      }
      case Joint::kTranslation:
        g_q.segment<3>(qo) += g_next.segment<3>(qo);
        g_v.segment<3>(vo) += h * g_next.segment<3>(qo);
        break;
      case Joint::kPrismatic:
        g_q(qo) += g_next(qo);
        g_v(vo) += h * g_next(qo);
        break;
      case Joint::kFixed:
        break;
    }
  }
}

VectorXd activate(const VectorXd& z, CfMode mode, double gamma) {
  VectorXd out(z.size());
  for (int i = 0; i < z.size(); ++i) {
    out(i) = mode == CfMode::kHardMax ? std::max(z(i), 0.0) : softplus(z(i), gamma);
  }
  return out;
}

VectorXd clip(const VectorXd& u, const VectorXd& lo, const VectorXd& hi) {
  return u.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace

double path_cost(const CostConfig& c, const CostIndex& idx, const VectorXd& q, const VectorXd& u,
                 bool* degenerate) {
  const Vector3d po = q.segment<3>(idx.object_q);
  double contact = 0.0;
  for (int f : idx.fingertip_q) contact += (po - q.segment<3>(f)).squaredNorm();
  const Eigen::Matrix3d r = object_quat(idx, q).normalized().toRotationMatrix();
  const double grasp = (r.transpose() * grasp_sum(idx, q, degenerate)).squaredNorm();
  return c.w_contact * contact + c.w_grasp * grasp + c.w_control * u.squaredNorm();
}

double final_cost(const CostConfig& c, const CostIndex& idx, const TaskSpec& task, const VectorXd& q) {
  const double dp = (q.segment<3>(idx.object_q) - task.target_position).squaredNorm();
  const double dot = wxyz(task.target_orientation).dot(q.segment<4>(idx.object_q + 3));
  return c.w_position * dp + c.w_quat * (1.0 - dot * dot);
}

MpcProblem::MpcProblem(const ManipulationSystem& sys, const VectorXd& q0, const ContactSystem& frozen,
                       const TaskSpec& task, const MpcConfig& cfg)
    : layout_(sys.layout), params_(sys.params), q0_(q0), frozen_(frozen), task_(task), cfg_(cfg) {
  sys.validate();
  nu_ = layout_.nu();
  cfg_.validate(nu_);
  task_.validate();
  if (q0_.size() != layout_.nq()) throw DimensionMismatch("q0 size differs from the layout");
  index_ = CostIndex::from(sys);

  const int nv = layout_.nv();
  const double h = params_.h;
  const LinearizedSystem base = linearized(VectorXd::Zero(nu_));
  Eigen::LLT<MatrixXd> llt(base.q_mat);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("Q is not positive definite");

  MatrixXd s = MatrixXd::Zero(nv, nu_);
  const auto& act = layout_.actuated_dofs();
  for (int k = 0; k < nu_; ++k) s(act[k], k) = params_.k_r(k);
  const VectorXd qinv_b0 = llt.solve(base.b_vec);
  const MatrixXd qinv_s = llt.solve(s);
  c0_ = qinv_b0 / h;
  p_ = qinv_s / h;

  const int m = frozen_.rows();
  if (m > 0) {
    if (frozen_.j_tilde.cols() != nv) throw DimensionMismatch("frozen Jacobian width differs from nv");
    const VectorXd kd = VectorXd::Constant(m, cfg_.k);
    g_ = llt.solve(MatrixXd(frozen_.j_tilde.transpose())) / h;
    z0_ = -kd.cwiseProduct(frozen_.j_tilde * qinv_b0 + frozen_.phi_tilde);
    z_ = -(kd.asDiagonal() * (frozen_.j_tilde * qinv_s));
  } else {
    g_.resize(nv, 0);
    z0_.resize(0);
    z_.resize(0, nu_);
  }
}

LinearizedSystem MpcProblem::linearized(const VectorXd& u) const {
  return assemble_quasi_dynamic(layout_, q0_, u, params_);
}

VectorXd MpcProblem::predict_velocity(const VectorXd& u) const {
  VectorXd v = c0_ + p_ * u;
  if (z0_.size() > 0) v += g_ * activate(z0_ + z_ * u, cfg_.mode, cfg_.gamma);
  return v;
}

RolloutResult rollout(const MpcProblem& prob, const VectorXd& u_seq) {
  const int nu = prob.nu();
  const int horizon = prob.horizon();
  if (u_seq.size() != nu * horizon) throw DimensionMismatch("u_seq length differs from nu * T");
  const CostConfig& c = prob.config().cost;
  RolloutResult out;
  out.states.reserve(horizon + 1);
  out.states.push_back(prob.q0());
  for (int t = 0; t < horizon; ++t) {
    const VectorXd u = u_seq.segment(t * nu, nu);
    const VectorXd& q = out.states.back();
    out.cost += path_cost(c, prob.index(), q, u, &out.degenerate_grasp);
    out.states.push_back(integrate(prob.layout(), q, prob.predict_velocity(u), prob.h()));
  }
  out.cost += final_cost(c, prob.index(), prob.task(), out.states.back());
  return out;
}

VectorXd objective_gradient(const MpcProblem& prob, const VectorXd& u_seq, double* cost) {
  if (prob.config().mode != CfMode::kSoftplus) {
    throw UnsupportedMode("objective_gradient requires softplus mode");
  }
  const int nu = prob.nu();
  const int horizon = prob.horizon();
  if (u_seq.size() != nu * horizon) throw DimensionMismatch("u_seq length differs from nu * T");
  const CostConfig& c = prob.config().cost;
  const double h = prob.h();
  const double gamma = prob.config().gamma;
  const bool has_contacts = prob.z0().size() > 0;

  std::vector<VectorXd> qs{prob.q0()};
  std::vector<VectorXd> vs;
  std::vector<VectorXd> zs;
  double total = 0.0;
  for (int t = 0; t < horizon; ++t) {
    const VectorXd u = u_seq.segment(t * nu, nu);
    VectorXd v = prob.c0() + prob.p() * u;
    if (has_contacts) {
      zs.push_back(prob.z0() + prob.zmat() * u);
      v += prob.g() * activate(zs.back(), CfMode::kSoftplus, gamma);
    }
    total += path_cost(c, prob.index(), qs.back(), u);
    qs.push_back(integrate(prob.layout(), qs.back(), v, h));
    vs.push_back(std::move(v));
  }
  total += final_cost(c, prob.index(), prob.task(), qs.back());
  if (cost) *cost = total;

  const int nq = prob.layout().nq();
  const int nv = prob.layout().nv();
  VectorXd grad(nu * horizon);
  VectorXd g_q = VectorXd::Zero(nq);
  add_final_gradient(c, prob.index(), prob.task(), qs.back(), g_q);
  for (int t = horizon - 1; t >= 0; --t) {
    VectorXd g_prev = VectorXd::Zero(nq);
    VectorXd g_v = VectorXd::Zero(nv);
    integrate_adjoint(prob.layout(), qs[t], vs[t], h, g_q, g_prev, g_v);
    VectorXd g_u = 2.0 * c.w_control * u_seq.segment(t * nu, nu) + prob.p().transpose() * g_v;
    if (has_contacts) {
      VectorXd g_z = prob.g().transpose() * g_v;
      for (int i = 0; i < g_z.size(); ++i) g_z(i) *= softplus_slope(zs[t](i), gamma);
      g_u += prob.zmat().transpose() * g_z;
    }
    grad.segment(t * nu, nu) = g_u;
    add_path_state_gradient(c, prob.index(), qs[t], g_prev);
    g_q = std::move(g_prev);
  }
  return grad;
}

OptimizeResult optimize_controls(const MpcProblem& prob, const VectorXd& warm_start) {
  const int n = prob.size();
  if (warm_start.size() != n) throw DimensionMismatch("warm start length differs from nu * T");
  const MpcConfig& cfg = prob.config();
  VectorXd lo(n);
  VectorXd hi(n);
  for (int t = 0; t < prob.horizon(); ++t) {
    lo.segment(t * prob.nu(), prob.nu()) = cfg.lower(prob.nu());
    hi.segment(t * prob.nu(), prob.nu()) = cfg.upper(prob.nu());
  }

  OptimizeResult res;
  res.u = clip(warm_start, lo, hi);
  double f = 0.0;
  VectorXd g = objective_gradient(prob, res.u, &f);
  res.objective.push_back(f);
  if (n == 0) {
    res.converged = true;
    return res;
  }

  double alpha = 0.1 * (hi - lo).maxCoeff() / std::max(g.lpNorm<Eigen::Infinity>(), 1e-12);
  while (true) {
    res.projected_gradient_norm = (clip(res.u - g, lo, hi) - res.u).lpNorm<Eigen::Infinity>();
    if (res.projected_gradient_norm <= cfg.tolerance) {
      res.converged = true;
      break;
    }
    if (res.iterations >= cfg.max_iterations) break;

    bool accepted = false;
    VectorXd u_new;
    VectorXd g_new;
    double f_new = 0.0;
    double a = alpha;
    for (int k = 0; k <= 30; ++k, a *= 0.5) {
      u_new = clip(res.u - a * g, lo, hi);
      const VectorXd d = u_new - res.u;
      g_new = objective_gradient(prob, u_new, &f_new);
      if (f_new <= f + 1e-4 * g.dot(d)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.stalled = true;
      break;
    }
    const VectorXd s = u_new - res.u;
    const VectorXd y = g_new - g;
    const double sy = s.dot(y);
    alpha = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-12, 1e6) : 2.0 * a;
    res.u = std::move(u_new);
    g = std::move(g_new);
    f = f_new;
    res.objective.push_back(f);
    ++res.iterations;
  }
  return res;
}

VectorXd shift_warm_start(const VectorXd& previous, int nu) {
  if (nu <= 0 || previous.size() % nu != 0) throw DimensionMismatch("previous solution is not a multiple of nu");
  const int horizon = static_cast<int>(previous.size()) / nu;
  VectorXd out = previous;
  if (horizon <= 1) return out;
  out.head((horizon - 1) * nu) = previous.tail((horizon - 1) * nu);
  out.tail(nu) = previous.tail(nu);
  return out;
}

PolicyStep mpc_policy_step(const ManipulationSystem& sys, const VectorXd& q_real, const TaskSpec& task,
                           const MpcConfig& cfg, const VectorXd* previous_solution) {
  if (cfg.horizon < 1) throw InvalidArgument("policy step needs horizon >= 1");
  const auto start = std::chrono::steady_clock::now();
  const SceneSnapshot snap = make_snapshot(sys.layout, q_real, sys.friction);
  const std::vector<ContactPoint> contacts = detect_contacts(snap, cfg.geometry);
  const ContactSystem cs = build_contact_system(contacts, q_real, sys.layout);
  const MpcProblem prob(sys, q_real, cs, task, cfg);

  const VectorXd warm = previous_solution ? shift_warm_start(*previous_solution, prob.nu())
                                          : VectorXd::Zero(prob.size());
  PolicyStep out;
  out.info = optimize_controls(prob, warm);
  out.solution = out.info.u;
  out.u0 = clip(out.solution.head(prob.nu()), cfg.lower(prob.nu()), cfg.upper(prob.nu()));
  out.num_contacts = static_cast<int>(contacts.size());
  out.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

double position_error(const Posed& pose, const TaskSpec& task) {
  return (pose.position - task.target_position).norm();
}

double quaternion_error(const Posed& pose, const TaskSpec& task) {
  return quat_error(task.target_orientation, pose.orientation);
}

std::optional<int> success_check(const std::vector<Posed>& history, const TaskSpec& task, int window) {
  if (window < 1) throw InvalidArgument("window must be at least 1");
  int run = 0;
  for (int i = 0; i < static_cast<int>(history.size()); ++i) {
    const bool ok = position_error(history[i], task) <= task.position_tolerance &&
                    quaternion_error(history[i], task) <= task.quat_tolerance;
    run = ok ? run + 1 : 0;
    if (run >= window) return i;
  }
  return std::nullopt;
}

}  // namespace cfc
