#include "liftgame/traj_opt.hpp"

#include <Eigen/QR>

#include <cmath>
#include <limits>

namespace liftgame {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Trajectory Trajectory::from_parts(const std::vector<Vec>& states, const std::vector<Vec>& controls) {
  if (states.empty() || states.size() != controls.size())
    throw ConfigError("Trajectory: states/controls length mismatch");
  TrajLayout l{static_cast<int>(states.size()), static_cast<int>(states[0].size()),
               static_cast<int>(controls[0].size())};
  Trajectory out = Trajectory::zero(l);
  for (int t = 0; t < l.horizon; ++t) {
    out.flat.segment(l.state_start(t), l.state_dim) = states[t];
    out.flat.segment(l.control_start(t), l.control_dim) = controls[t];
  }
  return out;
}

std::vector<Vec> Trajectory::states() const {
  std::vector<Vec> out(layout.horizon);
  for (int t = 0; t < layout.horizon; ++t) out[t] = state(t);
  return out;
}

std::vector<Vec> Trajectory::controls() const {
  std::vector<Vec> out(layout.horizon);
  for (int t = 0; t < layout.horizon; ++t) out[t] = control(t);
  return out;
}

TrajProblemSpec control_reference_spec(const TrajLayout& layout) {
  const int n = layout.dim();
  const int nu = layout.horizon * layout.control_dim;
  TrajProblemSpec spec;
  spec.ref_selector = Mat::Zero(nu, n);
  spec.ref_selector.rightCols(nu).setIdentity();
  spec.regularizer = Mat::Zero(0, n);
  return spec;
}

TrajProblemSpec identity_reference_spec(int dim) {
  TrajProblemSpec spec;
  spec.ref_selector = Mat::Identity(dim, dim);
  spec.regularizer = Mat::Zero(0, dim);
  return spec;
}

TrajProblemSpec goal_reference_spec(const TrajLayout& layout, double reg_weight) {
  const int n = layout.dim();
  TrajProblemSpec spec;
  spec.ref_selector = Mat::Zero(2, n);
  spec.ref_selector(0, layout.state_start(layout.horizon - 1) + 0) = 1.0;
  spec.ref_selector(1, layout.state_start(layout.horizon - 1) + 1) = 1.0;
  const int nu = layout.horizon * layout.control_dim;
  spec.regularizer = Mat::Zero(nu, n);
  spec.regularizer.rightCols(nu) = std::sqrt(reg_weight) * Mat::Identity(nu, nu);
  return spec;
}

LinearConstraintSet build_constraints(const Vec& x0, const TrajEnvironment& env) {
  const TrajLayout& l = env.layout;
  if (l.state_dim != 4 || l.control_dim != 2)
    throw ConfigError("build_constraints: expected planar double-integrator layout");
  if (x0.size() != 4 || !x0.allFinite()) throw ConfigError("build_constraints: bad initial state");
  if (!env.position_limits.contains(x0.head(2), 1e-12))
    throw InfeasibleError("build_constraints: initial position outside the arena");
  if (!env.velocity_limits.contains(x0.tail(2), 1e-12))
    throw InfeasibleError("build_constraints: initial velocity outside the speed polytope");

  const int T = l.horizon;
  const int n = l.dim();
  const double dt = env.dt;

  Eigen::Matrix4d ad = Eigen::Matrix4d::Identity();
  ad(0, 2) = dt;
  ad(1, 3) = dt;
  Eigen::Matrix<double, 4, 2> bd;
  bd << 0.5 * dt * dt, 0, 0, 0.5 * dt * dt, dt, 0, 0, dt;

  LinearConstraintSet out;
  out.pinned_rows = 4;
  const int me = 4 * T;
  out.a_eq = Mat::Zero(me, n);
  out.b_eq = Vec::Zero(me);
  out.a_eq.block(0, l.state_start(0), 4, 4).setIdentity();
  out.b_eq.head(4) = x0;
  for (int t = 0; t + 1 < T; ++t) {
    const int r = 4 + 4 * t;
    out.a_eq.block(r, l.state_start(t + 1), 4, 4).setIdentity();
    out.a_eq.block(r, l.state_start(t), 4, 4) = -ad;
    out.a_eq.block(r, l.control_start(t), 4, 2) = -bd;
  }

  const int np = env.position_limits.rows();
  const int nv = env.velocity_limits.rows();
  const int mi = T * (np + nv + l.control_dim);
  out.c = Mat::Zero(mi, n);
  out.lb = Vec::Constant(mi, -kInf);
  out.ub = Vec::Zero(mi);
  int r = 0;
  for (int t = 0; t < T; ++t) {
    for (int k = 0; k < np; ++k, ++r) {
      out.c.block(r, l.state_start(t), 1, 2) = env.position_limits.normals.row(k);
      out.ub[r] = env.position_limits.offsets[k];
    }
    for (int k = 0; k < nv; ++k, ++r) {
      out.c.block(r, l.state_start(t) + 2, 1, 2) = env.velocity_limits.normals.row(k);
      out.ub[r] = env.velocity_limits.offsets[k];
    }
    for (int k = 0; k < l.control_dim; ++k, ++r) {
      out.c(r, l.control_start(t) + k) = 1.0;
      out.lb[r] = -env.control_limit;
      out.ub[r] = env.control_limit;
    }
  }
  return out;
}

TrajOptimizer::TrajOptimizer(TrajProblemSpec spec, LinearConstraintSet constraints,
                             QpSettings settings)
    : spec_(std::move(spec)), constraints_(std::move(constraints)) {
  const int n = spec_.var_dim();
  if (constraints_.a_eq.rows() > 0 && constraints_.a_eq.cols() != n)
    throw ConfigError("TrajOptimizer: equality matrix width mismatch");
  if (constraints_.c.rows() > 0 && constraints_.c.cols() != n)
    throw ConfigError("TrajOptimizer: inequality matrix width mismatch");
  if (spec_.regularizer.cols() != n) throw ConfigError("TrajOptimizer: regularizer width mismatch");
  if ((constraints_.lb.array() > constraints_.ub.array()).any())
    throw ConfigError("TrajOptimizer: lb > ub");

  Eigen::ColPivHouseholderQR<Mat> qr(spec_.ref_selector.transpose());
  if (qr.rank() != spec_.ref_dim())
    throw ConfigError("TrajOptimizer: reference selector is not full row rank");

  Mat p = spec_.ref_selector.transpose() * spec_.ref_selector;
  if (spec_.regularizer.rows() > 0)
    p.noalias() += spec_.regularizer.transpose() * spec_.regularizer;

  Mat a(constraints_.eq_rows() + constraints_.ineq_rows(), n);
  a << constraints_.a_eq, constraints_.c;
  // BoxQpSolver's constructor verifies strict convexity on the feasible
  // subspace via the equality KKT system.
  solver_ = std::make_shared<const BoxQpSolver>(std::move(p), std::move(a),
                                                constraints_.eq_rows(), settings);
}

std::pair<Vec, Vec> TrajOptimizer::bounds(const Vec& x0) const {
  const int me = constraints_.eq_rows();
  const int mi = constraints_.ineq_rows();
  Vec lb(me + mi), ub(me + mi);
  Vec beq = constraints_.b_eq;
  if (constraints_.pinned_rows > 0) {
    if (x0.size() != constraints_.pinned_rows)
      throw ConfigError("TrajOptimizer: initial state size does not match pinned rows");
    beq.head(constraints_.pinned_rows) = x0;
  }
  lb.head(me) = beq;
  ub.head(me) = beq;
  lb.tail(mi) = constraints_.lb;
  ub.tail(mi) = constraints_.ub;
  return {lb, ub};
}

QpSolution TrajOptimizer::solve(const Vec& reference, const Vec& x0, const Vec* warm_start) const {
  if (reference.size() != spec_.ref_dim())
    throw ConfigError("TrajOptimizer::solve: reference dimension mismatch");
  const auto [lb, ub] = bounds(x0);
  const Vec q = -(spec_.ref_selector.transpose() * reference);
  BoxQpSolution box = solver_->solve(q, lb, ub, warm_start);

  QpSolution sol;
  sol.tau = std::move(box.x);
  sol.nu = box.y.head(constraints_.eq_rows());
  sol.lambda = box.y.tail(constraints_.ineq_rows());
  sol.activity = std::move(box.activity);
  sol.weakly_active = std::move(box.weakly_active);
  sol.kkt_residual = box.kkt_residual;
  sol.iterations = box.iterations;
  return sol;
}

BoxQpSolution TrajOptimizer::to_box(const QpSolution& sol) const {
  BoxQpSolution box;
  box.x = sol.tau;
  box.y.resize(constraints_.eq_rows() + constraints_.ineq_rows());
  box.y.head(constraints_.eq_rows()) = sol.nu;
  box.y.tail(constraints_.ineq_rows()) = sol.lambda;
  box.activity = sol.activity;
  box.weakly_active = sol.weakly_active;
  return box;
}

Vec TrajOptimizer::vjp(const QpSolution& sol, const Vec& cotangent) const {
  if (cotangent.size() != spec_.var_dim())
    throw ConfigError("TrajOptimizer::vjp: cotangent dimension mismatch");
  const BoxQpSolution box = to_box(sol);
  const int k = static_cast<int>(solver_->active_rows(box).size());
  const auto kkt = solver_->solve_kkt(box, cotangent, Vec::Zero(constraints_.eq_rows()),
                                      Vec::Zero(k));
  return spec_.ref_selector * kkt.dx;
}

std::pair<double, Vec> TrajOptimizer::reference_penalty(const Vec& xi, const Vec& x0) const {
  if (xi.size() != spec_.var_dim())
    throw ConfigError("reference_penalty: reference must live in trajectory space");
  double value = 0.0;
  Vec grad = Vec::Zero(xi.size());
  if (constraints_.eq_rows() > 0) {
    Vec beq = constraints_.b_eq;
    if (constraints_.pinned_rows > 0 && x0.size() == constraints_.pinned_rows)
      beq.head(constraints_.pinned_rows) = x0;
    const Vec r = constraints_.a_eq * xi - beq;
    value += r.squaredNorm();
    grad += 2.0 * (constraints_.a_eq.transpose() * r);
  }
  if (constraints_.ineq_rows() > 0) {
    const Vec cx = constraints_.c * xi;
    for (int j = 0; j < constraints_.ineq_rows(); ++j) {
      double v = 0.0;
      if (std::isfinite(constraints_.ub[j])) v += std::max(cx[j] - constraints_.ub[j], 0.0);
      if (std::isfinite(constraints_.lb[j])) v -= std::max(constraints_.lb[j] - cx[j], 0.0);
      if (v != 0.0) {
        value += v * v;
        grad += 2.0 * v * constraints_.c.row(j).transpose();
      }
    }
  }
  return {value, grad};
}

std::pair<double, Vec> TrajOptimizer::dual_penalty(const QpSolution& sol) const {
  const BoxQpSolution box = to_box(sol);
  const std::vector<int> rows = solver_->active_rows(box);
  const int me = constraints_.eq_rows();
  Vec lambda_act(rows.size());
  for (size_t c = 0; c < rows.size(); ++c) lambda_act[c] = sol.lambda[rows[c] - me];

  const double value = lambda_act.squaredNorm();
  if (rows.empty()) return {0.0, Vec::Zero(spec_.ref_dim())};

  const auto kkt = solver_->solve_kkt(box, Vec::Zero(spec_.var_dim()), Vec::Zero(me), lambda_act);
  return {value, 2.0 * (spec_.ref_selector * kkt.dx)};
}

}  // namespace liftgame
