#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <utility>
#include <vector>

#include "liftgame/util.hpp"

namespace liftgame {
namespace bimatrix {

// Two-player finite game in cost form: player 1 picks a row to minimize A,
// player 2 picks a column to minimize B.
struct CostMatrixPair {
  Mat a;
  Mat b;
};

struct ShiftedGame {
  Mat a_bar;
  Mat b_bar;
  double alpha = 0.0;
  double beta = 0.0;
};

struct BimatrixSolution {
  Vec p1, p2;  // complementarity-problem solution
  Vec q1, q2;  // mixed strategies (normalized p)
  std::vector<int> support1, support2;
  bool strictly_complementary = true;
  double alpha = 0.0, beta = 0.0;  // shift applied before pivoting
};

// Elementwise shift making both matrices >= margin: alpha = margin - min(A).
ShiftedGame shift_positive(const CostMatrixPair& pair, double margin = 1.0);

// Lemke-Howson pivoting on the complementarity system
//   p1 >= 0  perp  Abar p2 >= 1,   p2 >= 0  perp  Bbar' p1 >= 1
// with a lexicographic ratio test so degenerate games terminate.
// entering_label indexes player 1's strategies (0-based).
std::pair<Vec, Vec> lemke_howson(const ShiftedGame& shifted, int entering_label = 0,
                                 int max_pivots = 1000000);

// q = p / sum(p); throws DegenerateError on a zero-sum vector.
std::pair<Vec, Vec> normalize(const Vec& p1, const Vec& p2);

BimatrixSolution bmg(const CostMatrixPair& pair, int entering_label = 0, double margin = 1.0);

// Cotangents of (q1, q2) pulled back onto A and B through the support-reduced
// linear systems and the normalization quotient rule. dp1/dA and dp2/dB are
// identically zero. Throws DegenerateError when the reduced systems are
// singular or the supports cannot be squared up.
CostMatrixPair bmg_vjp(const CostMatrixPair& pair, const BimatrixSolution& sol, const Vec& q1_cot,
                       const Vec& q2_cot);

// Checks the equilibrium inequalities at all simplex vertices (sufficient by
// bilinearity). Returns pass/fail and the worst violation.
std::pair<bool, double> verify_equilibrium(const CostMatrixPair& pair, const Vec& q1, const Vec& q2,
                                           double tol = 1e-9);

// Plain-text exchange format: "n1 n2", then row-major A, then row-major B.
CostMatrixPair read_matrix_pair(std::istream& in);
void write_matrix_pair(std::ostream& out, const CostMatrixPair& pair);

}  // namespace bimatrix
}  // namespace liftgame
