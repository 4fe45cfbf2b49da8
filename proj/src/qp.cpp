#include "liftgame/qp.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>

namespace liftgame {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec clamp(const Vec& v, const Vec& lb, const Vec& ub) {
  return v.cwiseMax(lb).cwiseMin(ub);
}

}  // namespace

BoxQpSolver::BoxQpSolver(Mat p, Mat a, int eq_rows, QpSettings settings)
    : p_(std::move(p)),
      a_(std::move(a)),
      n_(static_cast<int>(p_.rows())),
      m_(static_cast<int>(a_.rows())),
      me_(eq_rows),
      settings_(settings) {
  if (p_.cols() != n_ || a_.cols() != n_) throw ConfigError("BoxQpSolver: dimension mismatch");
  if (me_ < 0 || me_ > m_) throw ConfigError("BoxQpSolver: bad equality row count");

  rho_ = Vec::Constant(m_, settings_.rho);
  rho_.head(me_).setConstant(settings_.rho * settings_.rho_eq_scale);

  Mat admm = p_ + settings_.sigma * Mat::Identity(n_, n_);
  admm.noalias() += a_.transpose() * rho_.asDiagonal() * a_;
  admm_lu_.compute(admm);

  Mat kkt = Mat::Zero(n_ + me_, n_ + me_);
  kkt.topLeftCorner(n_, n_) = p_;
  kkt.topRightCorner(n_, me_) = a_.topRows(me_).transpose();
  kkt.bottomLeftCorner(me_, n_) = a_.topRows(me_);
  eq_kkt_lu_.compute(kkt);
  // Invertibility of this system is equivalent to P being positive definite
  // on the null space of the equality rows (given full row rank); verify once.
  Vec probe = eq_kkt_lu_.solve(Vec::Ones(n_ + me_));
  Vec back = kkt * probe;
  if (!back.allFinite() || (back - Vec::Ones(n_ + me_)).lpNorm<Eigen::Infinity>() > 1e-6) {
    throw ConfigError("BoxQpSolver: singular equality KKT system (objective not strictly convex "
                      "on the feasible subspace or dependent equality rows)");
  }
}

double BoxQpSolver::kkt_residual(const Vec& q, const Vec& lb, const Vec& ub, const Vec& x,
                                 const Vec& y) const {
  const double r_stat = (p_ * x + q + a_.transpose() * y).lpNorm<Eigen::Infinity>();
  const Vec ax = a_ * x;
  double r_feas = 0.0;
  for (int j = 0; j < m_; ++j) {
    if (std::isfinite(lb[j])) r_feas = std::max(r_feas, lb[j] - ax[j]);
    if (std::isfinite(ub[j])) r_feas = std::max(r_feas, ax[j] - ub[j]);
  }
  return std::max(r_stat, r_feas);
}

BoxQpSolver::PolishResult BoxQpSolver::polish(const Vec& q, const Vec& lb, const Vec& ub,
                                              const Vec& z_admm, const Vec& y_admm) const {
  const int mi = m_ - me_;
  // The projected iterate z sits exactly on a bound for every row the
  // splitting method believes active; this is a far more reliable working
  // set than multiplier signs mid-convergence. Single-swap refinement below
  // repairs the remaining misclassifications one row at a time, which avoids
  // the zig-zagging of simultaneous multi-row updates on wall-riding
  // solutions whose active rows are strongly coupled through the dynamics.
  std::vector<RowActivity> act(mi, RowActivity::kInactive);
  for (int i = 0; i < mi; ++i) {
    const int j = me_ + i;
    if (z_admm[j] <= lb[j]) act[i] = RowActivity::kLower;
    else if (z_admm[j] >= ub[j]) act[i] = RowActivity::kUpper;
  }

  PolishResult out;
  out.ok = false;
  out.residual = kInf;

  const int max_rounds = std::min(2 * mi + 50, 80);
  for (int round = 0; round < max_rounds; ++round) {
    std::vector<int> rows;
    for (int i = 0; i < mi; ++i)
      if (act[i] != RowActivity::kInactive) rows.push_back(me_ + i);
    const int k = static_cast<int>(rows.size());

    Vec w0(n_ + me_);
    w0.head(n_) = -q;
    w0.tail(me_) = ub.head(me_);  // lb == ub on equality rows
    Vec w = eq_kkt_lu_.solve(w0);

    Vec x, lambda;
    if (k == 0) {
      x = w.head(n_);
      lambda.resize(0);
    } else {
      Mat ct = Mat::Zero(n_ + me_, k);
      for (int c = 0; c < k; ++c) ct.col(c).head(n_) = a_.row(rows[c]).transpose();
      Mat xcols = eq_kkt_lu_.solve(ct);
      Mat s(k, k);
      Vec rhs_s(k);
      for (int r = 0; r < k; ++r) {
        s.row(r) = a_.row(rows[r]) * xcols.topRows(n_);
        const double bound =
            act[rows[r] - me_] == RowActivity::kLower ? lb[rows[r]] : ub[rows[r]];
        rhs_s[r] = a_.row(rows[r]).dot(w.head(n_)) - bound;
      }
      Eigen::LDLT<Mat> s_ldlt(s);
      lambda = s_ldlt.solve(rhs_s);
      if (!lambda.allFinite() ||
          (s * lambda - rhs_s).lpNorm<Eigen::Infinity>() >
              1e-9 * std::max(1.0, rhs_s.lpNorm<Eigen::Infinity>())) {
        // Singular working set: more candidates than degrees of freedom or
        // dependent rows. Evict the row with the weakest multiplier estimate.
        int weakest = -1;
        double weakest_y = kInf;
        for (int c = 0; c < k; ++c) {
          const double strength = std::abs(y_admm[rows[c]]);
          if (strength < weakest_y) {
            weakest_y = strength;
            weakest = rows[c] - me_;
          }
        }
        if (weakest < 0) return out;
        act[weakest] = RowActivity::kInactive;
        continue;
      }
      Vec wk = w - xcols * lambda;
      x = wk.head(n_);
      w.tail(me_) = wk.tail(me_);
    }

    // One swap per round: fix the worst multiplier-sign violation first,
    // otherwise bind the most violated row.
    int worst_drop = -1;
    double worst_drop_val = settings_.weak_dual_tol;
    for (int c = 0; c < k; ++c) {
      const int i = rows[c] - me_;
      const double viol =
          act[i] == RowActivity::kLower ? std::max(lambda[c], 0.0) : std::max(-lambda[c], 0.0);
      if (viol > worst_drop_val) {
        worst_drop_val = viol;
        worst_drop = i;
      }
    }
    if (worst_drop >= 0) {
      act[worst_drop] = RowActivity::kInactive;
      continue;
    }

    const Vec ax = a_ * x;
    int worst_add = -1;
    double worst_add_val = 0.1 * settings_.eps_primal;
    RowActivity worst_side = RowActivity::kInactive;
    for (int i = 0; i < mi; ++i) {
      if (act[i] != RowActivity::kInactive) continue;
      const int j = me_ + i;
      if (lb[j] - ax[j] > worst_add_val) {
        worst_add_val = lb[j] - ax[j];
        worst_add = i;
        worst_side = RowActivity::kLower;
      }
      if (ax[j] - ub[j] > worst_add_val) {
        worst_add_val = ax[j] - ub[j];
        worst_add = i;
        worst_side = RowActivity::kUpper;
      }
    }
    if (worst_add >= 0) {
      act[worst_add] = worst_side;
      continue;
    }

    Vec y = Vec::Zero(m_);
    y.head(me_) = w.tail(me_);
    for (int c = 0; c < k; ++c) y[rows[c]] = lambda[c];
    const double res = kkt_residual(q, lb, ub, x, y);
    if (res < out.residual) {
      out.x = x;
      out.y = y;
      out.residual = res;
      out.ok = res <= std::min(settings_.eps_primal, settings_.eps_dual);
    }
    return out;
  }
  return out;
}

BoxQpSolution BoxQpSolver::solve(const Vec& q, const Vec& lb, const Vec& ub,
                                 const Vec* warm_start) const {
  if (q.size() != n_ || lb.size() != m_ || ub.size() != m_)
    throw ConfigError("BoxQpSolver::solve: dimension mismatch");
  for (int j = 0; j < m_; ++j) {
    if (!(lb[j] <= ub[j])) throw ConfigError("BoxQpSolver::solve: lb > ub");
    if (j < me_ && lb[j] != ub[j]) throw ConfigError("BoxQpSolver::solve: equality row with lb != ub");
  }

  Vec x = (warm_start && warm_start->size() == n_) ? *warm_start : Vec::Zero(n_);
  Vec z = clamp(a_ * x, lb, ub);
  Vec y = Vec::Zero(m_);
  Vec y_prev_check = y;

  const double alpha = settings_.relaxation;
  double best_residual = kInf;

  Vec rhs(n_), xt(n_), zt(m_), zh(m_), scratch(m_);
  for (int iter = 1; iter <= settings_.max_iterations; ++iter) {
    scratch = rho_.cwiseProduct(z) - y;
    rhs = settings_.sigma * x - q;
    rhs.noalias() += a_.transpose() * scratch;
    xt = admm_lu_.solve(rhs);
    zt.noalias() = a_ * xt;
    x = alpha * xt + (1.0 - alpha) * x;
    zh = alpha * zt + (1.0 - alpha) * z;
    z = clamp(zh + y.cwiseQuotient(rho_), lb, ub);
    y += rho_.cwiseProduct(zh - z);

    if (iter % settings_.check_interval != 0 && iter != settings_.max_iterations) continue;

    scratch.noalias() = a_ * x;
    const double r_prim = (scratch - z).lpNorm<Eigen::Infinity>();
    rhs = p_ * x + q;
    rhs.noalias() += a_.transpose() * y;
    const double r_dual = rhs.lpNorm<Eigen::Infinity>();
    best_residual = std::min(best_residual, std::max(r_prim, r_dual));

    // Polishing needs only a roughly localized active set, so attempt it
    // long before the splitting iteration itself reaches full accuracy.
    if (r_prim <= settings_.polish_trigger && r_dual <= settings_.polish_trigger) {
      PolishResult pol = polish(q, lb, ub, z, y);
      if (pol.ok) {
        BoxQpSolution sol;
        sol.x = pol.x;
        sol.y = pol.y;
        sol.kkt_residual = pol.residual;
        sol.iterations = iter;
        sol.polished = true;
        const Vec ax = a_ * sol.x;
        const int mi = m_ - me_;
        sol.activity.assign(mi, RowActivity::kInactive);
        sol.weakly_active.assign(mi, false);
        for (int i = 0; i < mi; ++i) {
          const int j = me_ + i;
          const bool at_lower = std::isfinite(lb[j]) && ax[j] - lb[j] <= settings_.active_tol;
          const bool at_upper = std::isfinite(ub[j]) && ub[j] - ax[j] <= settings_.active_tol;
          if (sol.y[j] < -settings_.weak_dual_tol && at_lower) {
            sol.activity[i] = RowActivity::kLower;
          } else if (sol.y[j] > settings_.weak_dual_tol && at_upper) {
            sol.activity[i] = RowActivity::kUpper;
          } else if (at_lower || at_upper) {
            sol.activity[i] = at_lower ? RowActivity::kLower : RowActivity::kUpper;
            sol.weakly_active[i] = true;
          }
        }
        return sol;
      }
      // Polish could not certify an active set yet; keep iterating.
    }

    // Primal infeasibility certificate: a direction dy with A'dy = 0 and
    // ub'(dy)_+ + lb'(dy)_- < 0 proves the constraints are inconsistent.
    Vec dy = y - y_prev_check;
    y_prev_check = y;
    const double dy_norm = dy.lpNorm<Eigen::Infinity>();
    if (dy_norm > 1e-12) {
      const double ortho = (a_.transpose() * dy).lpNorm<Eigen::Infinity>();
      if (ortho <= settings_.eps_infeasible * dy_norm) {
        double support = 0.0;
        bool bounded = true;
        for (int j = 0; j < m_ && bounded; ++j) {
          const double d = dy[j];
          if (d > settings_.eps_infeasible * dy_norm) {
            if (!std::isfinite(ub[j])) bounded = false;
            else support += ub[j] * d;
          } else if (d < -settings_.eps_infeasible * dy_norm) {
            if (!std::isfinite(lb[j])) bounded = false;
            else support += lb[j] * d;
          }
        }
        if (bounded && support <= -settings_.eps_infeasible * dy_norm) {
          throw InfeasibleError("BoxQpSolver: problem is primal infeasible");
        }
      }
    }
  }
  throw ConvergenceError("BoxQpSolver: iteration limit reached", best_residual);
}

std::vector<int> BoxQpSolver::active_rows(const BoxQpSolution& sol) const {
  std::vector<int> rows;
  for (int i = 0; i < static_cast<int>(sol.activity.size()); ++i) {
    if (sol.activity[i] != RowActivity::kInactive && !sol.weakly_active[i]) rows.push_back(me_ + i);
  }
  return rows;
}

BoxQpSolver::KktVectors BoxQpSolver::solve_kkt(const BoxQpSolution& sol, const Vec& r_x,
                                               const Vec& r_eq, const Vec& r_act) const {
  const std::vector<int> rows = active_rows(sol);
  const int k = static_cast<int>(rows.size());
  if (r_x.size() != n_ || r_eq.size() != me_ || r_act.size() != k)
    throw ConfigError("solve_kkt: dimension mismatch");

  Vec w0(n_ + me_);
  w0 << r_x, r_eq;
  Vec w = eq_kkt_lu_.solve(w0);

  KktVectors out;
  if (k == 0) {
    out.dx = w.head(n_);
    out.dnu = w.tail(me_);
    out.dlambda.resize(0);
    return out;
  }

  Mat ct = Mat::Zero(n_ + me_, k);
  for (int c = 0; c < k; ++c) ct.col(c).head(n_) = a_.row(rows[c]).transpose();
  Mat xcols = eq_kkt_lu_.solve(ct);
  Mat s(k, k);
  Vec rhs_s(k);
  for (int r = 0; r < k; ++r) {
    s.row(r) = a_.row(rows[r]).head(n_) * xcols.topRows(n_);
    rhs_s[r] = a_.row(rows[r]).head(n_).dot(w.head(n_)) - r_act[r];
  }
  Eigen::LDLT<Mat> s_ldlt(s);
  Vec lambda = s_ldlt.solve(rhs_s);
  const double s_scale = std::max(1.0, s.lpNorm<Eigen::Infinity>());
  if (!lambda.allFinite() ||
      (s * lambda - rhs_s).lpNorm<Eigen::Infinity>() >
          1e-8 * s_scale * std::max(1.0, lambda.lpNorm<Eigen::Infinity>()) +
              1e-10 * std::max(1.0, rhs_s.lpNorm<Eigen::Infinity>())) {
    throw DegenerateError("solve_kkt: singular reduced KKT system (non-isolated solution)");
  }
  Vec wk = w - xcols * lambda;
  out.dx = wk.head(n_);
  out.dnu = wk.tail(me_);
  out.dlambda = lambda;
  return out;
}

}  // namespace liftgame
