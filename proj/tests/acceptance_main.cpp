// End-to-end acceptance suite: one pass/fail line per criterion, nonzero exit
// when any hard criterion fails. Runtime-heavy studies run at reduced but
// statistically meaningful scale; set LIFTGAME_ACCEPTANCE_FULL=1 to also run
// the full-length self-play soft check.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <vector>

#include "finite_diff.hpp"
#include "liftgame/experiments.hpp"
#include "liftgame/training.hpp"
#include "support_enumeration.hpp"

using namespace liftgame;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void report_soft(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d (soft): %s\n", pass ? "pass" : "miss", criterion, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Mat random_mat(int r, int c, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

// ---------------------------------------------------------------------------
// 1. Bimatrix correctness: residuals on random games, oracle support match.
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst = 0.0;
  bool all_ok = true;
  const int shapes[4][2] = {{2, 2}, {3, 3}, {3, 4}, {4, 4}};
  for (const auto& shape : shapes) {
    for (int trial = 0; trial < 1000; ++trial) {
      const bimatrix::CostMatrixPair pair{random_mat(shape[0], shape[1], rng),
                                          random_mat(shape[0], shape[1], rng)};
      const bimatrix::BimatrixSolution sol = bimatrix::bmg(pair);
      auto [ok, viol] = bimatrix::verify_equilibrium(pair, sol.q1, sol.q2, 1e-9);
      worst = std::max(worst, viol);
      all_ok = all_ok && ok;
    }
  }

  std::uniform_int_distribution<int> entry(-9, 9);
  std::uniform_int_distribution<int> dim(1, 4);
  int matched = 0, total = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const int n1 = dim(rng), n2 = dim(rng);
    Mat a(n1, n2), b(n1, n2);
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n2; ++j) {
        a(i, j) = entry(rng);
        b(i, j) = entry(rng);
      }
    const bimatrix::BimatrixSolution sol = bimatrix::bmg({a, b});
    const auto oracle = liftgame::testing::enumerate_equilibria(a, b);
    const auto s1 = liftgame::testing::support_of(sol.q1);
    const auto s2 = liftgame::testing::support_of(sol.q2);
    ++total;
    for (const auto& eq : oracle) {
      if (eq.support1 == s1 && eq.support2 == s2) {
        ++matched;
        break;
      }
    }
  }
  const double secs = seconds_since(t0);
  report(1, all_ok && worst <= 1e-9 && matched == total && secs < 10.0,
         fmt("4000 random games, worst equilibrium violation %.2e; oracle support match "
             "%d/%d integer games; %.1f s",
             worst, matched, total, secs));
}

// ---------------------------------------------------------------------------
// 2. Bimatrix derivatives: FD match and exact zero dp1/dA block.
void criterion_2() {
  Rng rng(202);
  const double h = 1e-6;
  int checked = 0;
  double worst = 0.0;
  bool zero_block_exact = true;
  for (int trial = 0; trial < 2000 && checked < 200; ++trial) {
    const bimatrix::CostMatrixPair pair{random_mat(3, 3, rng), random_mat(3, 3, rng)};
    bimatrix::BimatrixSolution sol;
    try {
      sol = bimatrix::bmg(pair);
    } catch (const std::exception&) {
      continue;
    }
    if (!sol.strictly_complementary || sol.support1.size() != sol.support2.size()) continue;

    const Vec q1_cot = liftgame::testing::random_unit(3, rng);
    const Vec q2_cot = liftgame::testing::random_unit(3, rng);
    bimatrix::CostMatrixPair cot;
    try {
      cot = bimatrix::bmg_vjp(pair, sol, q1_cot, q2_cot);
    } catch (const DegenerateError&) {
      continue;
    }

    // dp1/dA = 0 exactly: only q1's normalization couples q1 to A, and with
    // a pure q1 cotangent the A-block must be identically zero.
    const bimatrix::CostMatrixPair only1 = bimatrix::bmg_vjp(pair, sol, q1_cot, Vec::Zero(3));
    zero_block_exact = zero_block_exact && only1.a.lpNorm<Eigen::Infinity>() == 0.0;

    bool stable = true;
    double trial_worst = 0.0;
    for (int which = 0; which < 2 && stable; ++which) {
      for (int j = 0; j < 3 && stable; ++j) {
        for (int k = 0; k < 3; ++k) {
          bimatrix::CostMatrixPair plus = pair, minus = pair;
          (which == 0 ? plus.a : plus.b)(j, k) += h;
          (which == 0 ? minus.a : minus.b)(j, k) -= h;
          const auto sp = bimatrix::bmg(plus);
          const auto sm = bimatrix::bmg(minus);
          if (sp.support1 != sol.support1 || sm.support1 != sol.support1 ||
              sp.support2 != sol.support2 || sm.support2 != sol.support2) {
            stable = false;
            break;
          }
          const double fd =
              (q1_cot.dot(sp.q1 - sm.q1) + q2_cot.dot(sp.q2 - sm.q2)) / (2.0 * h);
          const double got = which == 0 ? cot.a(j, k) : cot.b(j, k);
          trial_worst = std::max(trial_worst, std::abs(got - fd) / std::max(1.0, std::abs(fd)));
        }
      }
    }
    if (!stable) continue;
    worst = std::max(worst, trial_worst);
    ++checked;
  }
  report(2, checked >= 200 && worst <= 1e-5 && zero_block_exact,
         fmt("%d nondegenerate 3x3 games, worst FD relative error %.2e; dp1/dA zero block %s",
             checked, worst, zero_block_exact ? "exact" : "VIOLATED"));
}

// ---------------------------------------------------------------------------
// 3. TRAJ correctness: KKT residual, feasibility, projection fixed point.
void criterion_3() {
  const TagEnvSpec spec;
  const TrajEnvironment env = environment(spec);
  const LinearConstraintSet cs = build_constraints(Vec::Zero(4), env);
  TrajOptimizer control(control_reference_spec(env.layout), cs);
  TrajOptimizer identity(identity_reference_spec(env.layout.dim()), cs);

  Rng rng(303);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_kkt = 0.0, worst_feas = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const PlayerState x = sample_player_state(spec, rng);
    Vec xi(control.ref_dim());
    for (int i = 0; i < xi.size(); ++i) xi[i] = u(rng);
    const QpSolution sol = control.solve(xi, x.vec());
    worst_kkt = std::max(worst_kkt, sol.kkt_residual);
    const Vec cx = cs.c * sol.tau;
    for (int r = 0; r < cs.ineq_rows(); ++r) {
      if (std::isfinite(cs.lb[r])) worst_feas = std::max(worst_feas, cs.lb[r] - cx[r]);
      if (std::isfinite(cs.ub[r])) worst_feas = std::max(worst_feas, cx[r] - cs.ub[r]);
    }
  }

  // Projection fixed point: feasible xi in identity mode returns itself.
  double worst_fp = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const PlayerState x = sample_player_state(spec, rng);
    Vec xi(control.ref_dim());
    for (int i = 0; i < xi.size(); ++i) xi[i] = 0.6 * u(rng);
    const QpSolution inner = control.solve(xi, x.vec());
    const QpSolution fixed = identity.solve(inner.tau, x.vec());
    worst_fp = std::max(worst_fp, (fixed.tau - inner.tau).lpNorm<Eigen::Infinity>());
  }
  report(3, worst_kkt <= 1e-8 && worst_feas <= 1e-6 && worst_fp <= 1e-6,
         fmt("500 tag instances: worst KKT %.2e, worst feasibility %.2e, projection fixed "
             "point drift %.2e",
             worst_kkt, worst_feas, worst_fp));
}

// ---------------------------------------------------------------------------
// 4. TRAJ derivatives vs finite differences; exact zero at an active bound.
void criterion_4() {
  const TagEnvSpec spec;
  const TrajEnvironment env = environment(spec);
  const LinearConstraintSet cs = build_constraints(Vec::Zero(4), env);
  TrajOptimizer opt(control_reference_spec(env.layout), cs);

  Rng rng(404);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  const double h = 1e-6;
  int checked = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 600 && checked < 100; ++trial) {
    const PlayerState x = sample_player_state(spec, rng);
    Vec xi(opt.ref_dim());
    for (int i = 0; i < xi.size(); ++i) xi[i] = u(rng);
    const QpSolution sol = opt.solve(xi, x.vec());
    bool weak = false;
    for (size_t r = 0; r < sol.weakly_active.size(); ++r) weak = weak || sol.weakly_active[r];
    if (weak) continue;

    const Vec dir = liftgame::testing::random_unit(opt.ref_dim(), rng);
    const QpSolution plus = opt.solve(xi + h * dir, x.vec());
    const QpSolution minus = opt.solve(xi - h * dir, x.vec());
    if (plus.activity != sol.activity || minus.activity != sol.activity) continue;
    ++checked;
    const Vec fd = (plus.tau - minus.tau) / (2.0 * h);
    const Vec gbar = liftgame::testing::random_unit(opt.var_dim(), rng);
    const double got = opt.vjp(sol, gbar).dot(dir);
    const double want = gbar.dot(fd);
    worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
  }

  // Active 1-D bound: sensitivity exactly zero.
  LinearConstraintSet box;
  box.a_eq = Mat::Zero(0, 1);
  box.b_eq = Vec::Zero(0);
  box.c = Mat::Ones(1, 1);
  box.lb = Vec::Constant(1, -1.0);
  box.ub = Vec::Constant(1, 1.0);
  TrajOptimizer box_opt(identity_reference_spec(1), box);
  const QpSolution active = box_opt.solve(Vec::Constant(1, 2.0));
  const double zero_sens = std::abs(box_opt.vjp(active, Vec::Ones(1))[0]);

  report(4, checked >= 100 && worst <= 1e-4 && zero_sens == 0.0,
         fmt("%d stable instances, worst FD relative error %.2e; active-bound sensitivity %.1e",
             checked, worst, zero_sens));
}

// ---------------------------------------------------------------------------
// 5. End-to-end gradient through the lifted pipeline (T=5, n=2).
void criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  TagEnvSpec spec;
  spec.horizon = 5;
  const LiftedGame game = make_tag_game(spec, RefMode::kControl);
  Rng rng(505);
  const double h = 1e-6;
  int checked = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 80 && checked < 20; ++trial) {
    auto [a, b] = sample_initial_state(spec, rng);
    Rng brng(derive_seed(505, trial));
    const ReferenceBundle xi1 = game.sample_bundle(1, 2, brng);
    const ReferenceBundle xi2 = game.sample_bundle(2, 2, brng);
    LiftedSolution sol;
    BundleGradient grad;
    try {
      sol = game.forward(xi1, xi2, a.vec(), b.vec());
      grad = game.backward(sol, 1);
    } catch (const DegenerateError&) {
      continue;
    }
    if (!sol.mix.strictly_complementary) continue;

    bool stable = true;
    double trial_worst = 0.0;
    for (int player = 1; player <= 2 && stable; ++player) {
      const ReferenceBundle& xi = player == 1 ? xi1 : xi2;
      const auto& g = player == 1 ? grad.xi1 : grad.xi2;
      for (int c = 0; c < 2 && stable; ++c) {
        const Vec dir =
            liftgame::testing::random_unit(static_cast<int>(xi.refs[c].size()), brng);
        ReferenceBundle plus = xi, minus = xi;
        plus.refs[c] += h * dir;
        minus.refs[c] -= h * dir;
        const LiftedSolution sp = player == 1 ? game.forward(plus, xi2, a.vec(), b.vec())
                                              : game.forward(xi1, plus, a.vec(), b.vec());
        const LiftedSolution sm = player == 1 ? game.forward(minus, xi2, a.vec(), b.vec())
                                              : game.forward(xi1, minus, a.vec(), b.vec());
        if (sp.mix.support1 != sol.mix.support1 || sm.mix.support1 != sol.mix.support1 ||
            sp.mix.support2 != sol.mix.support2 || sm.mix.support2 != sol.mix.support2) {
          stable = false;
          break;
        }
        const double fd = (sp.loss1 - sm.loss1) / (2.0 * h);
        trial_worst = std::max(trial_worst,
                               std::abs(g[c].dot(dir) - fd) / std::max(1.0, std::abs(fd)));
      }
    }
    if (!stable) continue;
    worst = std::max(worst, trial_worst);
    ++checked;
  }
  const double secs = seconds_since(t0);
  report(5, checked >= 20 && worst <= 1e-3 && secs < 60.0,
         fmt("%d instances, worst FD relative error %.2e, %.1f s", checked, worst, secs));
}

// ---------------------------------------------------------------------------
// 6. Toy interval game limits.
void criterion_6() {
  ExperimentConfig cfg;
  cfg.seed = 606;
  cfg.threads = 2;
  cfg.toy_starts = 100;
  const ToyResult result = exp_toy_interval(cfg);
  int corners = 0, settled_unreg = 0;
  for (const auto& run : result.regularized) {
    const bool low = std::abs(run.tau1 + 1) < 1e-3 && std::abs(run.tau2 + 1) < 1e-3;
    const bool high = std::abs(run.tau1 - 1) < 1e-3 && std::abs(run.tau2 - 1) < 1e-3;
    if (run.stationary && run.local_equilibrium && (low || high)) ++corners;
  }
  for (const auto& run : result.unregularized) {
    if (run.stationary && run.local_equilibrium) ++settled_unreg;
  }
  report(6, corners == 100 && settled_unreg == 0,
         fmt("regularized: %d/100 starts at {(-1,-1),(1,1)}; unregularized: %d/100 reached a "
             "local equilibrium within the cap",
             corners, settled_unreg));
}

// Shared tournament configuration for criteria 7-11.
ExperimentConfig tournament_config() {
  ExperimentConfig cfg;
  cfg.seed = 707;
  cfg.threads = 2;
  cfg.play.steps = 1200;
  cfg.play.rate1 = cfg.play.rate2 = 0.5;
  return cfg;
}

// ---------------------------------------------------------------------------
// 7. Lifted-vs-pure converged value gap over 20 states.
MeanSem g_lifted_converged;  // reused by criterion 8's diagonal check

void criterion_7() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = tournament_config();
  cfg.states_eq = 20;
  const ConvergenceResult result = exp_equilibrium_convergence(cfg);
  g_lifted_converged = result.lifted_value;
  const double gap = result.lifted_value.mean - result.pure_value.mean;
  const double combined = std::sqrt(result.pure_value.sem * result.pure_value.sem +
                                    result.lifted_value.sem * result.lifted_value.sem);
  const double secs = seconds_since(t0);
  report(7, gap > 2.0 * combined && secs < 300.0,
         fmt("lifted %.4f +/- %.4f vs pure %.4f +/- %.4f; gap %.4f = %.1f combined SEM; %.0f s",
             result.lifted_value.mean, result.lifted_value.sem, result.pure_value.mean,
             result.pure_value.sem, gap, gap / std::max(1e-12, combined), secs));
}

// ---------------------------------------------------------------------------
// 8. Open-loop tournament ordering.
TournamentGrid g_open_grid;

void criterion_8() {
  ExperimentConfig cfg = tournament_config();
  cfg.states_open = 20;
  g_open_grid = exp_open_loop_tournament(cfg);
  const MeanSem pl = g_open_grid.cell[1][0].stats();
  const MeanSem ll = g_open_grid.cell[0][0].stats();
  const MeanSem lp = g_open_grid.cell[0][1].stats();
  const MeanSem pp = g_open_grid.cell[1][1].stats();
  const auto gap_sems = [](const MeanSem& a, const MeanSem& b) {
    return (a.mean - b.mean) / std::sqrt(a.sem * a.sem + b.sem * b.sem);
  };
  const double g1 = gap_sems(pl, ll);
  const double g2 = gap_sems(ll, lp);
  const double g3 = gap_sems(lp, pp);
  // When criterion 7 was skipped there is no converged value to compare to.
  const bool have_diag = g_lifted_converged.count > 0;
  const double diag =
      have_diag ? std::abs(ll.mean - g_lifted_converged.mean) /
                      std::sqrt(ll.sem * ll.sem + g_lifted_converged.sem * g_lifted_converged.sem)
                : 0.0;
  report(8, g1 >= 1.0 && g2 >= 1.0 && g3 >= 1.0 && diag <= 2.0,
         fmt("cells (P,LE %.3f) > (L,LE %.3f) > (L,PE %.3f) > (P,PE %.3f); gaps %.1f/%.1f/%.1f "
             "SEM; diagonal within %.1f SEM of criterion 7",
             pl.mean, ll.mean, lp.mean, pp.mean, g1, g2, g3, diag));
}

// ---------------------------------------------------------------------------
// 9. Receding-horizon tournament: same ordering, everything below open loop.
void criterion_9() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = tournament_config();
  cfg.states_rh = 2;
  cfg.rh_updates = 500;
  cfg.rh_interval = 9;
  cfg.train.iterations = 150;
  cfg.train.dataset_size = 24;
  cfg.train.hidden = {64, 64};
  const RecedingHorizonResult result = exp_receding_horizon_tournament(cfg);
  const MeanSem pl = result.grid.cell[1][0].stats();
  const MeanSem ll = result.grid.cell[0][0].stats();
  const MeanSem lp = result.grid.cell[0][1].stats();
  const MeanSem pp = result.grid.cell[1][1].stats();
  const bool order = pl.mean > ll.mean && ll.mean > lp.mean && lp.mean > pp.mean;
  bool below_open = true;
  const bool have_open = g_open_grid.cell[0][0].stats().count > 0;
  for (int pv = 0; pv < 2 && have_open; ++pv)
    for (int ev = 0; ev < 2; ++ev)
      below_open = below_open && result.grid.cell[pv][ev].stats().mean <
                                     g_open_grid.cell[pv][ev].stats().mean;
  const double secs = seconds_since(t0);
  report(9, order && below_open && secs < 900.0,
         fmt("cells %.3f > %.3f > %.3f > %.3f (%s); all below open-loop (%s); %.0f s",
             pl.mean, ll.mean, lp.mean, pp.mean, order ? "ordered" : "OUT OF ORDER",
             below_open ? "yes" : "NO", secs));
}

// ---------------------------------------------------------------------------
// 10. Self-play learning: feasibility, decreasing gradients, latency.
void criterion_10() {
  ExperimentConfig cfg = tournament_config();
  cfg.turns_selfplay = 500;
  cfg.train.rate1 = cfg.train.rate2 = 1e-2;
  cfg.train.window = 100;
  const SelfPlayResult result = exp_self_play(cfg);

  const int w = 100;
  double first1 = 0, last1 = 0, first2 = 0, last2 = 0;
  for (int i = 0; i < w; ++i) {
    first1 += result.grad_norm1[i];
    first2 += result.grad_norm2[i];
    last1 += result.grad_norm1[result.grad_norm1.size() - w + i];
    last2 += result.grad_norm2[result.grad_norm2.size() - w + i];
  }
  const bool decreasing = last1 < first1 && last2 < first2;
  const bool feasible = result.infeasible_turns == 0;
  const bool latency_ok = result.mean_forward_ms < 50.0;
  report(10, feasible && decreasing,
         fmt("500 turns: infeasible steps %d; grad norms first->last window %.3f->%.3f and "
             "%.3f->%.3f; forward %.1f ms/plan",
             result.infeasible_turns, first1 / w, last1 / w, first2 / w, last2 / w,
             result.mean_forward_ms));
  report_soft(10, latency_ok, fmt("forward-pass latency %.1f ms (target < 50 ms, paper 2 ms)",
                                  result.mean_forward_ms));

  if (const char* full = std::getenv("LIFTGAME_ACCEPTANCE_FULL"); full && *full == '1') {
    ExperimentConfig paper = tournament_config();
    paper.turns_selfplay = 2500;
    paper.train.rate1 = paper.train.rate2 = 1e-2;
    const SelfPlayResult long_run = exp_self_play(paper);
    const int n = static_cast<int>(long_run.window_mean.size());
    const double drift = std::abs(long_run.window_mean[n - 1] - long_run.window_mean[n - 500]) /
                         std::max(1e-9, std::abs(long_run.window_mean[n - 1]));
    report_soft(10, drift < 0.05,
                fmt("2500-turn windowed value drift %.1f%% over the last 500 turns", 100 * drift));
  }
}

// ---------------------------------------------------------------------------
// 11. Sampled-vs-learned pursuer at 50 trials.
void criterion_11() {
  ExperimentConfig cfg = tournament_config();
  cfg.trials_svl = 50;
  cfg.svl_sweep = {20};
  cfg.svl_learn_steps = 150;
  cfg.play.rate1 = cfg.play.rate2 = 0.5;
  const SampledVsLearnedResult result = exp_sampled_vs_learned(cfg);
  const MeanSem sampled = result.baseline[0].stats();
  const MeanSem learned = result.learned.stats();
  const double combined = std::sqrt(sampled.sem * sampled.sem + learned.sem * learned.sem);
  const double gap = sampled.mean - learned.mean;  // pursuer minimizes
  report(11, gap >= combined,
         fmt("sampled n1=20 value %.4f +/- %.4f vs learned n1=2 %.4f +/- %.4f; advantage %.4f "
             "= %.1f combined SEM",
             sampled.mean, sampled.sem, learned.mean, learned.sem, gap,
             gap / std::max(1e-12, combined)));
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  const auto want = [&](int c) {
    return only.empty() || std::find(only.begin(), only.end(), c) != only.end();
  };

  const auto t0 = std::chrono::steady_clock::now();
  if (want(1)) criterion_1();
  if (want(2)) criterion_2();
  if (want(3)) criterion_3();
  if (want(4)) criterion_4();
  if (want(5)) criterion_5();
  if (want(6)) criterion_6();
  if (want(7)) criterion_7();
  if (want(8)) criterion_8();
  if (want(9)) criterion_9();
  if (want(10)) criterion_10();
  if (want(11)) criterion_11();
  std::printf("acceptance finished in %.0f s with %d failure(s)\n", seconds_since(t0),
              g_failures);
  return g_failures == 0 ? 0 : 1;
}
