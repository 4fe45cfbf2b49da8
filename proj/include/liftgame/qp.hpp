#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include <memory>
#include <optional>
#include <vector>

#include "liftgame/util.hpp"

namespace liftgame {

// Box-constrained convex QP
//
//   minimize    1/2 x'Px + q'x
//   subject to  lb <= Ax <= ub        (rows with lb == ub are equalities)
//
// solved by operator splitting (OSQP-style ADMM) followed by an active-set
// polish step: once the splitting iteration has localized the active
// constraints, the equality-constrained KKT system on that set is solved
// directly, which yields machine-precision primal/dual pairs and a clean
// active-set classification. P and A are fixed at construction so their
// factorizations are shared across solves; only q, lb, ub vary per call.
struct QpSettings {
  double rho = 1.0;            // ADMM penalty, inequality rows
  double rho_eq_scale = 1e3;   // equality rows use rho * rho_eq_scale
  double sigma = 1e-6;         // proximal regularization
  double relaxation = 1.6;     // over-relaxation alpha
  int max_iterations = 50000;
  int check_interval = 10;
  double polish_trigger = 5e-2;  // splitting residual at which polishing starts
  double eps_primal = 1e-8;      // final feasibility tolerance
  double eps_dual = 1e-8;        // final stationarity tolerance
  double eps_infeasible = 1e-9;
  double active_tol = 1e-7;    // slack threshold when classifying activity
  double weak_dual_tol = 1e-7; // |multiplier| below which an active row is weak
};

enum class RowActivity : uint8_t { kInactive, kLower, kUpper };

struct BoxQpSolution {
  Vec x;
  Vec y;  // one multiplier per row of A; > 0 upper bound, < 0 lower bound
  std::vector<RowActivity> activity;
  std::vector<bool> weakly_active;  // at a bound with |y| < weak_dual_tol
  double kkt_residual = 0.0;
  int iterations = 0;
  bool polished = false;
};

class BoxQpSolver {
 public:
  // eq_rows: number of leading rows of A treated as equalities (their bounds
  // must satisfy lb == ub at every solve).
  BoxQpSolver(Mat p, Mat a, int eq_rows, QpSettings settings = {});

  BoxQpSolution solve(const Vec& q, const Vec& lb, const Vec& ub,
                      const Vec* warm_start = nullptr) const;

  // Solves the KKT system of the solution's strictly active set:
  //
  //   [ P    Aeq'  Aact' ] [dx ]   [ r_x  ]
  //   [ Aeq  0     0     ] [dnu] = [ r_eq ]
  //   [ Aact 0     0     ] [dla]   [ r_act]
  //
  // where Aact stacks the strictly active inequality rows. Throws
  // DegenerateError when the system is singular (non-isolated solution).
  struct KktVectors {
    Vec dx;
    Vec dnu;      // equality block
    Vec dlambda;  // active inequality block, ordered as active_rows()
  };
  KktVectors solve_kkt(const BoxQpSolution& sol, const Vec& r_x, const Vec& r_eq,
                       const Vec& r_act) const;

  // Indices (into A's rows) of strictly active inequality rows.
  std::vector<int> active_rows(const BoxQpSolution& sol) const;

  int vars() const { return n_; }
  int rows() const { return m_; }
  int eq_rows() const { return me_; }
  const Mat& p() const { return p_; }
  const Mat& a() const { return a_; }
  const QpSettings& settings() const { return settings_; }

 private:
  struct PolishResult {
    Vec x;
    Vec y;
    double residual;
    bool ok;
  };
  PolishResult polish(const Vec& q, const Vec& lb, const Vec& ub, const Vec& z,
                      const Vec& y) const;
  double kkt_residual(const Vec& q, const Vec& lb, const Vec& ub, const Vec& x,
                      const Vec& y) const;

  Mat p_;
  Mat a_;
  int n_ = 0;
  int m_ = 0;
  int me_ = 0;
  QpSettings settings_;
  Vec rho_;                      // per-row penalty
  Eigen::PartialPivLU<Mat> admm_lu_;   // P + sigma I + A' diag(rho) A
  Eigen::PartialPivLU<Mat> eq_kkt_lu_; // [P Aeq'; Aeq 0]
};

}  // namespace liftgame
