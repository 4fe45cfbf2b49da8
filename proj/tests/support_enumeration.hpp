#pragma once

#include <Eigen/Core>
#include <Eigen/QR>

#include <utility>
#include <vector>

#include "liftgame/util.hpp"

// Support-enumeration equilibrium oracle for small bimatrix games (cost
// convention: both players minimize). Independent of the pivoting solver:
// for every support pair it solves the indifference equations directly and
// keeps solutions that verify the equilibrium inequalities.
namespace liftgame::testing {

struct OracleEquilibrium {
  Vec q1, q2;
  std::vector<int> support1, support2;
};

inline std::vector<int> support_of(const Vec& q, double tol = 1e-9) {
  std::vector<int> s;
  for (int i = 0; i < q.size(); ++i)
    if (q[i] > tol) s.push_back(i);
  return s;
}

namespace detail {

// Solve for the opponent mix q (supported on cols) making every row in rows
// indifferent with common value v; returns (q, v, ok).
inline bool indifference_mix(const Mat& m, const std::vector<int>& rows,
                             const std::vector<int>& cols, Vec& q_out, double tol) {
  const int nr = static_cast<int>(rows.size());
  const int nc = static_cast<int>(cols.size());
  // Unknowns: q (nc) and the common value v.
  Mat sys = Mat::Zero(nr + 1, nc + 1);
  Vec rhs = Vec::Zero(nr + 1);
  for (int r = 0; r < nr; ++r) {
    for (int c = 0; c < nc; ++c) sys(r, c) = m(rows[r], cols[c]);
    sys(r, nc) = -1.0;
  }
  sys.row(nr).head(nc).setOnes();
  rhs[nr] = 1.0;

  const Vec sol = sys.completeOrthogonalDecomposition().solve(rhs);
  if (!sol.allFinite()) return false;
  if ((sys * sol - rhs).lpNorm<Eigen::Infinity>() > tol) return false;
  for (int c = 0; c < nc; ++c)
    if (sol[c] < -tol) return false;

  Vec q = Vec::Zero(m.cols());
  double sum = 0.0;
  for (int c = 0; c < nc; ++c) {
    q[cols[c]] = std::max(0.0, sol[c]);
    sum += q[cols[c]];
  }
  if (sum <= 0.0) return false;
  q /= sum;
  q_out = q;
  return true;
}

inline std::vector<std::vector<int>> subsets(int n) {
  std::vector<std::vector<int>> out;
  for (int mask = 1; mask < (1 << n); ++mask) {
    std::vector<int> s;
    for (int i = 0; i < n; ++i)
      if (mask & (1 << i)) s.push_back(i);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace detail

inline std::vector<OracleEquilibrium> enumerate_equilibria(const Mat& a, const Mat& b,
                                                           double tol = 1e-8) {
  std::vector<OracleEquilibrium> found;
  const auto rows_sets = detail::subsets(static_cast<int>(a.rows()));
  const auto cols_sets = detail::subsets(static_cast<int>(a.cols()));
  for (const auto& s1 : rows_sets) {
    for (const auto& s2 : cols_sets) {
      Vec q2, q1;
      if (!detail::indifference_mix(a, s1, s2, q2, tol)) continue;
      if (!detail::indifference_mix(b.transpose(), s2, s1, q1, tol)) continue;

      // Support consistency and no profitable deviation.
      bool ok = true;
      const Vec row_costs = a * q2;
      const Vec col_costs = b.transpose() * q1;
      const double v1 = q1.dot(row_costs);
      const double v2 = q2.dot(col_costs);
      if (row_costs.minCoeff() < v1 - tol || col_costs.minCoeff() < v2 - tol) ok = false;
      for (int i = 0; i < q1.size() && ok; ++i)
        if (q1[i] > tol && std::find(s1.begin(), s1.end(), i) == s1.end()) ok = false;
      for (int j = 0; j < q2.size() && ok; ++j)
        if (q2[j] > tol && std::find(s2.begin(), s2.end(), j) == s2.end()) ok = false;
      if (!ok) continue;

      OracleEquilibrium eq;
      eq.q1 = q1;
      eq.q2 = q2;
      eq.support1 = support_of(q1, tol);
      eq.support2 = support_of(q2, tol);
      bool duplicate = false;
      for (const auto& other : found) {
        if (other.support1 == eq.support1 && other.support2 == eq.support2 &&
            (other.q1 - eq.q1).lpNorm<Eigen::Infinity>() < 1e-6 &&
            (other.q2 - eq.q2).lpNorm<Eigen::Infinity>() < 1e-6) {
          duplicate = true;
          break;
        }
      }
      if (!duplicate) found.push_back(std::move(eq));
    }
  }
  return found;
}

}  // namespace liftgame::testing
