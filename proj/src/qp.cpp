#include "cfc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cfc/error.hpp"

namespace cfc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void compute_residuals(const MatrixXd& h, const VectorXd& g, const MatrixXd& a, const VectorXd& lb,
                       QpResult& r) {
  const VectorXd slack = a * r.x - lb;
  r.stationarity = (h * r.x + g - a.transpose() * r.multipliers).lpNorm<Eigen::Infinity>();
  r.feasibility = slack.size() ? std::max(0.0, -slack.minCoeff()) : 0.0;
  r.complementarity =
      slack.size() ? r.multipliers.cwiseProduct(slack).lpNorm<Eigen::Infinity>() : 0.0;
}

}  // namespace

QpResult solve_qp(const MatrixXd& hessian, const VectorXd& gradient, const MatrixXd& a,
                  const VectorXd& lb, const QpOptions& options) {
  const int n = static_cast<int>(gradient.size());
  const int m = static_cast<int>(lb.size());
  if (hessian.rows() != n || hessian.cols() != n || a.rows() != m || (m > 0 && a.cols() != n)) {
    throw DimensionMismatch("solve_qp: inconsistent dimensions");
  }

  Eigen::LLT<MatrixXd> llt(hessian);
  if (llt.info() != Eigen::Success) {
    llt.compute(hessian + 1e-10 * MatrixXd::Identity(n, n));
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("solve_qp: hessian is not positive definite");
  }
  const auto lower = llt.matrixL();
  const auto upper = llt.matrixU();

  QpResult res;
  res.x = -llt.solve(gradient);
  res.multipliers = VectorXd::Zero(m);
  if (m == 0) {
    compute_residuals(hessian, gradient, a, lb, res);
    return res;
  }

  // Columns w_i = L^-1 a_i; H^-1 = L^-T L^-1.
  const MatrixXd w_all = lower.solve(MatrixXd(a.transpose()));
  VectorXd row_scale(m);
  for (int i = 0; i < m; ++i) row_scale(i) = a.row(i).norm();

  const int cap = options.max_iterations > 0 ? options.max_iterations : 10 * (n + m);
  std::vector<int> active;
  std::vector<double> u;  // multipliers of `active`
  std::vector<char> is_active(m, 0);

  auto violation_tol = [&](int i) {
    return 1e-12 * (1.0 + std::abs(lb(i)) + row_scale(i) * res.x.norm());
  };

  int iter = 0;
  while (true) {
    // Most violated inactive constraint.
    const VectorXd slack = a * res.x - lb;
    int p = -1;
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
      if (is_active[i]) continue;
      if (slack(i) < -violation_tol(i) && slack(i) < worst) {
        worst = slack(i);
        p = i;
      }
    }
    if (p < 0) break;

    double u_p = 0.0;
    const VectorXd wp = w_all.col(p);
    while (true) {
      if (++iter > cap) {
        compute_residuals(hessian, gradient, a, lb, res);
        throw NonConvergence("solve_qp: iteration cap " + std::to_string(cap) + " exceeded",
                             res.stationarity, res.feasibility, res.complementarity);
      }
      const int k = static_cast<int>(active.size());
      VectorXd r = VectorXd::Zero(k);
      VectorXd resid = wp;
      if (k > 0) {
        MatrixXd b(n, k);
        for (int j = 0; j < k; ++j) b.col(j) = w_all.col(active[j]);
        Eigen::ColPivHouseholderQR<MatrixXd> qr(b);
        r = qr.solve(wp);
        resid = wp - b * r;
      }
      const double resid_sq = resid.squaredNorm();
      const bool dependent = resid.norm() <= 1e-9 * std::max(1.0, wp.norm());

      double t1 = kInf;
      int drop = -1;
      for (int j = 0; j < k; ++j) {
        if (r(j) > 1e-14 * std::max(1.0, r.lpNorm<Eigen::Infinity>())) {
          const double t = u[j] / r(j);
          if (t < t1) {
            t1 = t;
            drop = j;
          }
        }
      }
      const double s_p = a.row(p).dot(res.x) - lb(p);
      const double t2 = dependent ? kInf : -s_p / resid_sq;

      if (t1 == kInf && t2 == kInf) {
        throw Infeasible("solve_qp: constraint " + std::to_string(p) + " cannot be satisfied");
      }
      const double t = std::min(t1, t2);
      if (!dependent) {
        const VectorXd z = upper.solve(resid);
        res.x += t * z;
      }
      for (int j = 0; j < k; ++j) u[j] -= t * r(j);
      u_p += t;

      if (t2 <= t1) {
        active.push_back(p);
        u.push_back(u_p);
        is_active[p] = 1;
        break;
      }
      is_active[active[drop]] = 0;
      active.erase(active.begin() + drop);
      u.erase(u.begin() + drop);
    }
  }

  for (std::size_t j = 0; j < active.size(); ++j) res.multipliers(active[j]) = std::max(0.0, u[j]);
  res.active = active;
  res.iterations = iter;
  compute_residuals(hessian, gradient, a, lb, res);

  // Polish on the final active set: A_act H^-1 A_act' y = lb_act + A_act H^-1 g.
  if (!active.empty()) {
    const int k = static_cast<int>(active.size());
    MatrixXd b(n, k);
    MatrixXd a_act(k, n);
    VectorXd lb_act(k);
    for (int j = 0; j < k; ++j) {
      b.col(j) = w_all.col(active[j]);
      a_act.row(j) = a.row(active[j]);
      lb_act(j) = lb(active[j]);
    }
    const VectorXd hinv_g = llt.solve(gradient);
    Eigen::LDLT<MatrixXd> ldlt(b.transpose() * b);
    if (ldlt.info() == Eigen::Success) {
      const VectorXd y = ldlt.solve(lb_act + a_act * hinv_g);
      if (y.allFinite() && y.minCoeff() >= -1e-10) {
        QpResult polished = res;
        polished.x = llt.solve(a_act.transpose() * y - gradient);
        polished.multipliers.setZero();
        for (int j = 0; j < k; ++j) polished.multipliers(active[j]) = std::max(0.0, y(j));
        compute_residuals(hessian, gradient, a, lb, polished);
        const double before = std::max({res.stationarity, res.feasibility, res.complementarity});
        const double after =
            std::max({polished.stationarity, polished.feasibility, polished.complementarity});
        if (after <= before) res = std::move(polished);
      }
    }
  }
  return res;
}

VectorXd lcp_oracle(const MatrixXd& m, const VectorXd& q, double tolerance) {
  const int n = static_cast<int>(q.size());
  if (m.rows() != n || m.cols() != n) throw DimensionMismatch("lcp_oracle: M must be square and match q");
  if (n > 20) throw InvalidArgument("lcp_oracle: dimension exceeds 20");
  const double scale = 1.0 + m.lpNorm<Eigen::Infinity>() + q.lpNorm<Eigen::Infinity>();
  const double tol = tolerance * scale;

  const unsigned long total = 1ul << n;
  for (unsigned long mask = 0; mask < total; ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i) {
      if (mask & (1ul << i)) idx.push_back(i);
    }
    VectorXd z = VectorXd::Zero(n);
    if (!idx.empty()) {
      const int k = static_cast<int>(idx.size());
      MatrixXd maa(k, k);
      VectorXd qa(k);
      for (int r = 0; r < k; ++r) {
        qa(r) = q(idx[r]);
        for (int c = 0; c < k; ++c) maa(r, c) = m(idx[r], idx[c]);
      }
      Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(maa);
      const VectorXd za = cod.solve(-qa);
      if (!za.allFinite() || (maa * za + qa).lpNorm<Eigen::Infinity>() > tol) continue;
      if (za.minCoeff() < -tol) continue;
      for (int r = 0; r < k; ++r) z(idx[r]) = std::max(0.0, za(r));
    }
    const VectorXd w = m * z + q;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      if (!(mask & (1ul << i)) && w(i) < -tol) ok = false;
    }
    if (ok) return z;
  }
  throw Infeasible("lcp_oracle: no consistent active set");
}

}  // namespace cfc
