#pragma once

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "liftgame/geometry.hpp"
#include "liftgame/qp.hpp"
#include "liftgame/util.hpp"

namespace liftgame {

// Stacked trajectory layout: tau = [x_1 .. x_T, u_1 .. u_T].
struct TrajLayout {
  int horizon = 0;
  int state_dim = 0;
  int control_dim = 0;

  int dim() const { return horizon * (state_dim + control_dim); }
  int state_start(int t) const { return t * state_dim; }
  int control_start(int t) const { return horizon * state_dim + t * control_dim; }
};

// Discrete-time state-control trajectory over a fixed horizon, stored flat.
struct Trajectory {
  TrajLayout layout;
  Vec flat;

  Trajectory() = default;
  Trajectory(TrajLayout l, Vec values) : layout(l), flat(std::move(values)) {}
  static Trajectory zero(TrajLayout l) { return {l, Vec::Zero(l.dim())}; }
  static Trajectory from_parts(const std::vector<Vec>& states, const std::vector<Vec>& controls);

  Eigen::VectorBlock<const Vec> state(int t) const {
    return flat.segment(layout.state_start(t), layout.state_dim);
  }
  Eigen::VectorBlock<const Vec> control(int t) const {
    return flat.segment(layout.control_start(t), layout.control_dim);
  }
  std::vector<Vec> states() const;
  std::vector<Vec> controls() const;
};

// lb <= c * tau <= ub plus equality rows a_eq * tau = b_eq. The leading
// `pinned_rows` equality rows fix the initial state and have their right-hand
// side replaced by x0 at solve time.
struct LinearConstraintSet {
  Mat a_eq;
  Vec b_eq;
  Mat c;
  Vec lb, ub;
  int pinned_rows = 0;

  int eq_rows() const { return static_cast<int>(a_eq.rows()); }
  int ineq_rows() const { return static_cast<int>(c.rows()); }
};

// Objective data for the reference-tracking subproblem
//   min 1/2 |G tau - xi|^2 + 1/2 |H tau|^2  s.t.  tau feasible.
struct TrajProblemSpec {
  Mat ref_selector;  // G, full row rank
  Mat regularizer;   // H; zero rows allowed

  int ref_dim() const { return static_cast<int>(ref_selector.rows()); }
  int var_dim() const { return static_cast<int>(ref_selector.cols()); }
};

TrajProblemSpec control_reference_spec(const TrajLayout& layout);
TrajProblemSpec identity_reference_spec(int dim);
// xi is a target for the terminal position; controls carry quadratic
// regularization sqrt(reg_weight) to isolate the minimizer.
TrajProblemSpec goal_reference_spec(const TrajLayout& layout, double reg_weight);

// Double-integrator world: polytopes on position and velocity at every step
// and a box on the acceleration input.
struct TrajEnvironment {
  HalfspaceSet position_limits;
  HalfspaceSet velocity_limits;
  double control_limit = 1.0;
  double dt = 0.1;
  TrajLayout layout;  // state = (position, velocity), control = acceleration
};

// Equality rows encode x_{t+1} = F(x_t, u_t) under exact zero-order hold and
// pin x_1 = x0; inequality rows apply the environment polytopes at every
// step. Throws InfeasibleError when x0 itself violates the state polytopes.
LinearConstraintSet build_constraints(const Vec& x0, const TrajEnvironment& env);

struct QpSolution {
  Vec tau;
  Vec nu;      // equality multipliers
  Vec lambda;  // inequality multipliers; > 0 upper bound active, < 0 lower
  std::vector<RowActivity> activity;
  std::vector<bool> weakly_active;
  double kkt_residual = 0.0;
  int iterations = 0;
};

// Solves the reference-tracking QP and propagates cotangents through its
// optimality system. Instances are immutable after construction; solve/vjp
// are const and safe to call concurrently.
class TrajOptimizer {
 public:
  TrajOptimizer(TrajProblemSpec spec, LinearConstraintSet constraints, QpSettings settings = {});

  // x0 must have pinned_rows entries (may be empty when nothing is pinned).
  QpSolution solve(const Vec& reference, const Vec& x0 = Vec(),
                   const Vec* warm_start = nullptr) const;

  // Returns cotangent' * d tau / d xi by solving the KKT system reduced to
  // the strictly active rows; weakly active rows are treated as inactive.
  Vec vjp(const QpSolution& sol, const Vec& cotangent) const;

  // Squared hinge violation of the constraint set evaluated at a reference
  // living in trajectory space (identity selector), with exact gradient.
  std::pair<double, Vec> reference_penalty(const Vec& xi, const Vec& x0 = Vec()) const;

  // Squared norm of the inequality multipliers with its gradient w.r.t. the
  // reference; the penalty form for non-identity reference selectors.
  std::pair<double, Vec> dual_penalty(const QpSolution& sol) const;

  const TrajProblemSpec& spec() const { return spec_; }
  const LinearConstraintSet& constraints() const { return constraints_; }
  const QpSettings& qp_settings() const { return solver_->settings(); }
  int var_dim() const { return spec_.var_dim(); }
  int ref_dim() const { return spec_.ref_dim(); }

 private:
  std::pair<Vec, Vec> bounds(const Vec& x0) const;
  BoxQpSolution to_box(const QpSolution& sol) const;

  TrajProblemSpec spec_;
  LinearConstraintSet constraints_;
  std::shared_ptr<const BoxQpSolver> solver_;
};

}  // namespace liftgame
