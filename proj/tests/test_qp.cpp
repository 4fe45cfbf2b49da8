#include <doctest.h>

#include <limits>

#include "finite_diff.hpp"
#include "liftgame/qp.hpp"

using namespace liftgame;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_SUITE("qp") {

TEST_CASE("box clamp with exact multipliers") {
  // min 1/2|x|^2 - 3'x,  -1 <= x <= 1  ->  x = (1,1), upper duals = 2.
  Mat p = Mat::Identity(2, 2);
  Mat a = Mat::Identity(2, 2);
  BoxQpSolver solver(p, a, 0);
  Vec q = Vec::Constant(2, -3.0);
  BoxQpSolution sol = solver.solve(q, Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
  CHECK(sol.x.isApprox(Vec::Constant(2, 1.0), 1e-9));
  CHECK(sol.y.isApprox(Vec::Constant(2, 2.0), 1e-8));
  CHECK(sol.kkt_residual <= 1e-8);
  CHECK(sol.activity[0] == RowActivity::kUpper);
  CHECK(sol.activity[1] == RowActivity::kUpper);
  CHECK_FALSE(sol.weakly_active[0]);
}

TEST_CASE("equality constraint duals") {
  // min 1/2|x|^2 s.t. x1 + x2 = 1 -> x = (0.5, 0.5), nu = -0.5.
  Mat p = Mat::Identity(2, 2);
  Mat a(1, 2);
  a << 1, 1;
  BoxQpSolver solver(p, a, 1);
  BoxQpSolution sol = solver.solve(Vec::Zero(2), Vec::Constant(1, 1.0), Vec::Constant(1, 1.0));
  CHECK(sol.x.isApprox(Vec::Constant(2, 0.5), 1e-9));
  CHECK(sol.y[0] == doctest::Approx(-0.5).epsilon(1e-9));
}

TEST_CASE("interior solution has zero multipliers") {
  Mat p = Mat::Identity(3, 3);
  Mat a = Mat::Identity(3, 3);
  BoxQpSolver solver(p, a, 0);
  BoxQpSolution sol =
      solver.solve(Vec::Constant(3, -0.1), Vec::Constant(3, -1.0), Vec::Constant(3, 1.0));
  CHECK(sol.x.isApprox(Vec::Constant(3, 0.1), 1e-9));
  CHECK(sol.y.lpNorm<Eigen::Infinity>() <= 1e-10);
  for (auto act : sol.activity) CHECK(act == RowActivity::kInactive);
}

TEST_CASE("random problems meet the KKT tolerance") {
  Rng rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 6;
    const int me = 2;
    const int mi = 8;
    Mat r(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r(i, j) = g(rng);
    Mat p = r.transpose() * r + 0.5 * Mat::Identity(n, n);
    Mat a(me + mi, n);
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < n; ++j) a(i, j) = g(rng);
    Vec x_feas(n);
    for (int i = 0; i < n; ++i) x_feas[i] = 0.3 * g(rng);
    Vec lb(me + mi), ub(me + mi);
    const Vec ax = a * x_feas;
    for (int i = 0; i < me; ++i) lb[i] = ub[i] = ax[i];
    for (int i = me; i < me + mi; ++i) {
      lb[i] = ax[i] - std::abs(g(rng));
      ub[i] = ax[i] + std::abs(g(rng));
    }
    Vec q(n);
    for (int i = 0; i < n; ++i) q[i] = g(rng);

    BoxQpSolver solver(p, a, me);
    BoxQpSolution sol = solver.solve(q, lb, ub);
    CHECK(sol.kkt_residual <= 1e-8);
    const Vec axs = a * sol.x;
    for (int i = 0; i < me + mi; ++i) {
      CHECK(axs[i] >= lb[i] - 1e-6);
      CHECK(axs[i] <= ub[i] + 1e-6);
    }
    // Complementarity: multipliers only on active rows.
    for (int i = me; i < me + mi; ++i) {
      if (sol.activity[i - me] == RowActivity::kInactive) CHECK(sol.y[i] == 0.0);
    }
  }
}

TEST_CASE("one-sided bounds") {
  Mat p = Mat::Identity(2, 2);
  Mat a = Mat::Identity(2, 2);
  BoxQpSolver solver(p, a, 0);
  Vec lb(2), ub(2);
  lb << 1.0, -kInf;
  ub << kInf, -2.0;
  BoxQpSolution sol = solver.solve(Vec::Zero(2), lb, ub);
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sol.x[1] == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(sol.y[0] < 0.0);  // lower bound active
  CHECK(sol.y[1] > 0.0);  // upper bound active
}

TEST_CASE("infeasible constraints are certified") {
  Mat p = Mat::Identity(1, 1);
  Mat a(2, 1);
  a << 1, 1;
  BoxQpSolver solver(p, a, 0);
  Vec lb(2), ub(2);
  lb << 1.0, -kInf;
  ub << kInf, -1.0;  // x >= 1 and x <= -1
  CHECK_THROWS_AS(solver.solve(Vec::Zero(1), lb, ub), InfeasibleError);
}

TEST_CASE("warm start reaches the same solution") {
  Mat p = Mat::Identity(4, 4);
  Mat a = Mat::Identity(4, 4);
  BoxQpSolver solver(p, a, 0);
  Vec q = Vec::Constant(4, -2.0);
  const Vec lb = Vec::Constant(4, -1.0);
  const Vec ub = Vec::Constant(4, 1.0);
  BoxQpSolution cold = solver.solve(q, lb, ub);
  BoxQpSolution warm = solver.solve(q, lb, ub, &cold.x);
  CHECK(warm.x.isApprox(cold.x, 1e-10));
  CHECK(warm.iterations <= cold.iterations);
}

TEST_CASE("solve_kkt matches hand-computed sensitivity") {
  // 1-D: min 1/2 (x - xi)^2, x <= 1 at xi = 2: active set {upper}, and the
  // KKT solve with r_x = 1 gives dx = 0 (pinned by the active row).
  Mat p = Mat::Identity(1, 1);
  Mat a = Mat::Identity(1, 1);
  BoxQpSolver solver(p, a, 0);
  Vec lb(1), ub(1);
  lb << -kInf;
  ub << 1.0;
  BoxQpSolution sol = solver.solve(Vec::Constant(1, -2.0), lb, ub);
  CHECK(sol.x[0] == doctest::Approx(1.0));
  CHECK(sol.y[0] == doctest::Approx(1.0).epsilon(1e-9));
  const auto kkt = solver.solve_kkt(sol, Vec::Ones(1), Vec(), Vec::Zero(1));
  CHECK(kkt.dx[0] == doctest::Approx(0.0));
  CHECK(kkt.dlambda[0] == doctest::Approx(1.0));
}

}  // TEST_SUITE
