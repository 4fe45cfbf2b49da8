#include "liftgame/bimatrix.hpp"

#include <Eigen/LU>

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace liftgame {
namespace bimatrix {

namespace {

constexpr double kPivotEps = 1e-11;

// One Lemke-Howson tableau: rows of "M vars + slacks = 1" with the slack
// block doubling as the basis inverse for the lexicographic ratio test.
struct Tableau {
  Mat t;                   // rows x (n_vars + rows + 1), last column is rhs
  std::vector<int> basic;  // variable id per row
  int n_vars;

  Tableau(const Mat& m) : n_vars(static_cast<int>(m.cols())) {
    const int rows = static_cast<int>(m.rows());
    t.resize(rows, n_vars + rows + 1);
    t.leftCols(n_vars) = m;
    t.middleCols(n_vars, rows).setIdentity();
    t.col(n_vars + rows).setOnes();
    basic.resize(rows);
    for (int r = 0; r < rows; ++r) basic[r] = n_vars + r;
  }

  int rows() const { return static_cast<int>(t.rows()); }
  int rhs_col() const { return static_cast<int>(t.cols()) - 1; }

  // Lexicographic min ratio over rows with positive pivot column entries.
  int ratio_row(int col) const {
    int best = -1;
    for (int r = 0; r < rows(); ++r) {
      const double c = t(r, col);
      if (c <= kPivotEps) continue;
      if (best < 0) {
        best = r;
        continue;
      }
      const double cb = t(best, col);
      // Compare (rhs, basis-inverse row) / pivot entry lexicographically.
      double diff = t(r, rhs_col()) / c - t(best, rhs_col()) / cb;
      if (std::abs(diff) <= kPivotEps) {
        for (int j = n_vars; j < n_vars + rows(); ++j) {
          diff = t(r, j) / c - t(best, j) / cb;
          if (std::abs(diff) > kPivotEps) break;
        }
      }
      if (diff < 0.0) best = r;
    }
    return best;
  }

  void pivot(int row, int col) {
    t.row(row) /= t(row, col);
    for (int r = 0; r < rows(); ++r) {
      if (r == row) continue;
      const double f = t(r, col);
      if (f != 0.0) t.row(r) -= f * t.row(row);
    }
    basic[row] = col;
  }

  Vec basic_values() const {
    Vec v = Vec::Zero(n_vars);
    for (int r = 0; r < rows(); ++r) {
      if (basic[r] < n_vars) v[basic[r]] = std::max(0.0, t(r, rhs_col()));
    }
    return v;
  }
};

double complementarity_residual(const Mat& a_bar, const Mat& b_bar, const Vec& p1, const Vec& p2) {
  const Vec slack1 = a_bar * p2 - Vec::Ones(p1.size());
  const Vec slack2 = b_bar.transpose() * p1 - Vec::Ones(p2.size());
  double res = std::max(0.0, -p1.minCoeff());
  res = std::max(res, -p2.minCoeff());
  res = std::max(res, -slack1.minCoeff());
  res = std::max(res, -slack2.minCoeff());
  res = std::max(res, p1.cwiseProduct(slack1).cwiseAbs().maxCoeff());
  res = std::max(res, p2.cwiseProduct(slack2).cwiseAbs().maxCoeff());
  return res;
}

}  // namespace

ShiftedGame shift_positive(const CostMatrixPair& pair, double margin) {
  if (margin <= 0.0) throw ConfigError("shift_positive: margin must be positive");
  if (pair.a.rows() != pair.b.rows() || pair.a.cols() != pair.b.cols())
    throw ConfigError("shift_positive: cost matrices must share a shape");
  if (!pair.a.allFinite() || !pair.b.allFinite())
    throw ConfigError("shift_positive: cost matrices must be finite");
  ShiftedGame out;
  out.alpha = margin - pair.a.minCoeff();
  out.beta = margin - pair.b.minCoeff();
  out.a_bar = pair.a.array() + out.alpha;
  out.b_bar = pair.b.array() + out.beta;
  return out;
}

std::pair<Vec, Vec> lemke_howson(const ShiftedGame& shifted, int entering_label, int max_pivots) {
  const int n1 = static_cast<int>(shifted.a_bar.rows());
  const int n2 = static_cast<int>(shifted.a_bar.cols());
  if (n1 < 1 || n2 < 1) throw ConfigError("lemke_howson: empty game");
  if ((shifted.a_bar.array() <= 0).any() || (shifted.b_bar.array() <= 0).any())
    throw ConfigError("lemke_howson: matrices must be strictly positive");
  if (entering_label < 0 || entering_label >= n1)
    throw ConfigError("lemke_howson: entering label out of range");

  // Pivoting runs on the strategically equivalent positive *payoff* game
  // (gamma - cost), whose scaled best-response polytopes are bounded and
  // admit the artificial equilibrium (0, 0) as the start. The cost-form
  // complementarity vectors are recovered from the normalized strategies
  // afterwards.
  const Mat u1 = (shifted.a_bar.maxCoeff() + 1.0) - shifted.a_bar.array();
  const Mat u2 = (shifted.b_bar.maxCoeff() + 1.0) - shifted.b_bar.array();

  // Tableau 1 carries x (labels 0..n1-1) and player 2's slacks (labels
  // n1..n1+n2-1); tableau 2 carries y (labels n1..) and player 1's slacks
  // (labels 0..n1-1). Variable ids within tableau 1 equal their labels.
  Tableau tab1(u2.transpose());  // rows: n2
  Tableau tab2(u1);              // rows: n1

  const auto label_of = [&](int tab, int id) {
    if (tab == 1) return id;
    return id < n2 ? n1 + id : id - n2;
  };
  const auto id_of_label = [&](int tab, int label) {
    if (tab == 1) return label;
    return label >= n1 ? label - n1 : n2 + label;
  };

  const int k = entering_label;
  int tab = 1;
  int entering_id = id_of_label(tab, k);
  for (int pivots = 0; pivots < max_pivots; ++pivots) {
    Tableau& cur = tab == 1 ? tab1 : tab2;
    const int row = cur.ratio_row(entering_id);
    if (row < 0) {
      std::ostringstream msg;
      msg << "lemke_howson: ray termination (label " << k << ", pivot " << pivots << ")";
      throw ConvergenceError(msg.str(), 0.0);
    }
    const int leaving_id = cur.basic[row];
    cur.pivot(row, entering_id);
    const int leaving_label = label_of(tab, leaving_id);
    if (leaving_label == k) {
      const Vec x = tab1.basic_values();
      const Vec y = tab2.basic_values();
      const double sx = x.sum();
      const double sy = y.sum();
      if (!(sx > 0.0) || !(sy > 0.0))
        throw ConvergenceError("lemke_howson: terminated at the artificial equilibrium", 0.0);
      const Vec q1 = x / sx;
      const Vec q2 = y / sy;
      // Cost-form scaling: support rows of Abar p2 and Bbar' p1 equal one.
      const Vec p1 = q1 / q1.dot(shifted.b_bar * q2);
      const Vec p2 = q2 / q1.dot(shifted.a_bar * q2);
      return {p1, p2};
    }
    tab = tab == 1 ? 2 : 1;
    entering_id = id_of_label(tab, leaving_label);
  }
  std::ostringstream msg;
  msg << "lemke_howson: pivot limit " << max_pivots << " exceeded (entering label " << k << ")";
  throw ConvergenceError(msg.str(), 0.0);
}

std::pair<Vec, Vec> normalize(const Vec& p1, const Vec& p2) {
  const double s1 = p1.sum();
  const double s2 = p2.sum();
  if (!(s1 > 0.0) || !(s2 > 0.0))
    throw DegenerateError("normalize: complementarity solution has a zero-sum block");
  return {p1 / s1, p2 / s2};
}

BimatrixSolution bmg(const CostMatrixPair& pair, int entering_label, double margin) {
  const ShiftedGame shifted = shift_positive(pair, margin);
  auto [p1, p2] = lemke_howson(shifted, entering_label);

  const double res = complementarity_residual(shifted.a_bar, shifted.b_bar, p1, p2);
  if (res > 1e-9)
    throw ConvergenceError("bmg: complementarity residual above tolerance", res);

  BimatrixSolution sol;
  sol.alpha = shifted.alpha;
  sol.beta = shifted.beta;
  sol.p1 = std::move(p1);
  sol.p2 = std::move(p2);
  std::tie(sol.q1, sol.q2) = normalize(sol.p1, sol.p2);

  const double tol1 = 1e-10 * std::max(1.0, sol.p1.lpNorm<Eigen::Infinity>());
  const double tol2 = 1e-10 * std::max(1.0, sol.p2.lpNorm<Eigen::Infinity>());
  const Vec slack1 = shifted.a_bar * sol.p2 - Vec::Ones(sol.p1.size());
  const Vec slack2 = shifted.b_bar.transpose() * sol.p1 - Vec::Ones(sol.p2.size());
  for (int i = 0; i < sol.p1.size(); ++i) {
    if (sol.p1[i] > tol1) sol.support1.push_back(i);
    if (sol.p1[i] <= tol1 && slack1[i] <= tol1) sol.strictly_complementary = false;
  }
  for (int j = 0; j < sol.p2.size(); ++j) {
    if (sol.p2[j] > tol2) sol.support2.push_back(j);
    if (sol.p2[j] <= tol2 && slack2[j] <= tol2) sol.strictly_complementary = false;
  }
  return sol;
}

CostMatrixPair bmg_vjp(const CostMatrixPair& pair, const BimatrixSolution& sol, const Vec& q1_cot,
                       const Vec& q2_cot) {
  const int n1 = static_cast<int>(pair.a.rows());
  const int n2 = static_cast<int>(pair.a.cols());
  if (q1_cot.size() != n1 || q2_cot.size() != n2)
    throw ConfigError("bmg_vjp: cotangent dimension mismatch");

  // Weakly complementary indices join the support selection; this picks one
  // consistent directional derivative deterministically.
  std::vector<int> i1 = sol.support1;
  std::vector<int> i2 = sol.support2;
  if (!sol.strictly_complementary) {
    const double tol1 = 1e-10 * std::max(1.0, sol.p1.lpNorm<Eigen::Infinity>());
    const double tol2 = 1e-10 * std::max(1.0, sol.p2.lpNorm<Eigen::Infinity>());
    const Vec slack1 = (pair.a.array() + sol.alpha).matrix() * sol.p2 - Vec::Ones(n1);
    const Vec slack2 =
        (pair.b.array() + sol.beta).matrix().transpose() * sol.p1 - Vec::Ones(n2);
    i1.clear();
    i2.clear();
    for (int i = 0; i < n1; ++i)
      if (sol.p1[i] > tol1 || slack1[i] <= tol1) i1.push_back(i);
    for (int j = 0; j < n2; ++j)
      if (sol.p2[j] > tol2 || slack2[j] <= tol2) i2.push_back(j);
  }

  const int k1 = static_cast<int>(i1.size());
  const int k2 = static_cast<int>(i2.size());
  if (k1 != k2 || k1 == 0)
    throw DegenerateError("bmg_vjp: support selection is not square; derivatives are undefined");
  const int k = k1;

  Mat a_plus(k, k), b_plus(k, k);
  Vec p1_plus(k), p2_plus(k);
  for (int r = 0; r < k; ++r) {
    p1_plus[r] = sol.p1[i1[r]];
    for (int c = 0; c < k; ++c) {
      a_plus(r, c) = pair.a(i1[r], i2[c]) + sol.alpha;
      b_plus(r, c) = pair.b(i1[r], i2[c]) + sol.beta;
    }
  }
  for (int c = 0; c < k; ++c) p2_plus[c] = sol.p2[i2[c]];

  // Normalization quotient rule: pbar = (qbar - (qbar . q) 1) / sum(p).
  const double s1 = sol.p1.sum();
  const double s2 = sol.p2.sum();
  Vec p1_cot(k), p2_cot(k);
  const double dot1 = q1_cot.dot(sol.q1);
  const double dot2 = q2_cot.dot(sol.q2);
  for (int r = 0; r < k; ++r) p1_cot[r] = (q1_cot[i1[r]] - dot1) / s1;
  for (int c = 0; c < k; ++c) p2_cot[c] = (q2_cot[i2[c]] - dot2) / s2;

  Eigen::PartialPivLU<Mat> lu_a(a_plus.transpose());
  Eigen::PartialPivLU<Mat> lu_b(b_plus);
  const Vec w2 = lu_a.solve(p2_cot);  // (Abar+)^-T applied to p2 cotangent
  const Vec w1 = lu_b.solve(p1_cot);  // (Bbar+)^-1 applied to p1 cotangent
  const double scale_a = std::max(1.0, a_plus.lpNorm<Eigen::Infinity>());
  const double scale_b = std::max(1.0, b_plus.lpNorm<Eigen::Infinity>());
  if (!w2.allFinite() || !w1.allFinite() ||
      (a_plus.transpose() * w2 - p2_cot).lpNorm<Eigen::Infinity>() >
          1e-8 * scale_a * std::max(1.0, w2.lpNorm<Eigen::Infinity>()) ||
      (b_plus * w1 - p1_cot).lpNorm<Eigen::Infinity>() >
          1e-8 * scale_b * std::max(1.0, w1.lpNorm<Eigen::Infinity>())) {
    throw DegenerateError("bmg_vjp: the derivatives of the solution are not defined");
  }

  CostMatrixPair cot;
  cot.a = Mat::Zero(n1, n2);
  cot.b = Mat::Zero(n1, n2);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) {
      cot.a(i1[r], i2[c]) = -w2[r] * p2_plus[c];
      cot.b(i1[r], i2[c]) = -p1_plus[r] * w1[c];
    }
  }
  return cot;
}

std::pair<bool, double> verify_equilibrium(const CostMatrixPair& pair, const Vec& q1, const Vec& q2,
                                           double tol) {
  const double v1 = q1.dot(pair.a * q2);
  const double v2 = q1.dot(pair.b * q2);
  const double best1 = (pair.a * q2).minCoeff();
  const double best2 = (pair.b.transpose() * q1).minCoeff();
  const double violation = std::max(v1 - best1, v2 - best2);
  return {violation <= tol, violation};
}

CostMatrixPair read_matrix_pair(std::istream& in) {
  int n1 = 0, n2 = 0;
  if (!(in >> n1 >> n2) || n1 < 1 || n2 < 1)
    throw ConfigError("matrix pair: expected 'n1 n2' dimensions line");
  CostMatrixPair pair;
  pair.a.resize(n1, n2);
  pair.b.resize(n1, n2);
  for (Mat* m : {&pair.a, &pair.b}) {
    for (int r = 0; r < n1; ++r) {
      for (int c = 0; c < n2; ++c) {
        if (!(in >> (*m)(r, c))) throw ConfigError("matrix pair: truncated matrix data");
      }
    }
  }
  return pair;
}

void write_matrix_pair(std::ostream& out, const CostMatrixPair& pair) {
  out << pair.a.rows() << " " << pair.a.cols() << "\n";
  for (const Mat* m : {&pair.a, &pair.b}) {
    for (int r = 0; r < m->rows(); ++r) {
      for (int c = 0; c < m->cols(); ++c) out << (*m)(r, c) << (c + 1 == m->cols() ? "\n" : " ");
    }
  }
}

}  // namespace bimatrix
}  // namespace liftgame
