#include "liftgame/lifted_game.hpp"

#include <cmath>
#include <sstream>

namespace liftgame {

double TagCostModel::cost(int player, const Vec& tau1, const Vec& tau2) const {
  const Trajectory t1{spec_.layout(), tau1};
  const Trajectory t2{spec_.layout(), tau2};
  return player == 1 ? pursuer_cost(t1, t2, spec_) : evader_cost(t1, t2, spec_);
}

void TagCostModel::gradient(int player, const Vec& tau1, const Vec& tau2, Vec& g_tau1,
                            Vec& g_tau2) const {
  const Trajectory t1{spec_.layout(), tau1};
  const Trajectory t2{spec_.layout(), tau2};
  std::tie(g_tau1, g_tau2) = pursuer_cost_gradients(t1, t2, spec_);
  if (player == 2) {
    g_tau1 = -g_tau1;
    g_tau2 = -g_tau2;
  }
}

Vec ReferenceBundle::flatten() const {
  int total = 0;
  for (const Vec& r : refs) total += static_cast<int>(r.size());
  Vec out(total);
  int at = 0;
  for (const Vec& r : refs) {
    out.segment(at, r.size()) = r;
    at += static_cast<int>(r.size());
  }
  return out;
}

ReferenceBundle ReferenceBundle::unflatten(int player, const Vec& flat, int n_refs, int ref_dim) {
  if (flat.size() != n_refs * ref_dim) throw ConfigError("ReferenceBundle: flat size mismatch");
  ReferenceBundle out;
  out.player = player;
  out.refs.resize(n_refs);
  for (int i = 0; i < n_refs; ++i) out.refs[i] = flat.segment(i * ref_dim, ref_dim);
  return out;
}

LiftedGame::LiftedGame(std::shared_ptr<const TrajOptimizer> opt1,
                       std::shared_ptr<const TrajOptimizer> opt2,
                       std::shared_ptr<const CostModel> costs, LiftedGameConfig config)
    : opt1_(std::move(opt1)), opt2_(std::move(opt2)), costs_(std::move(costs)),
      config_(config) {
  if (!opt1_ || !opt2_ || !costs_) throw ConfigError("LiftedGame: missing component");
}

void LiftedGame::set_ref_samplers(RefSampler s1, RefSampler s2) {
  sampler1_ = std::move(s1);
  sampler2_ = std::move(s2);
}

ReferenceBundle LiftedGame::sample_bundle(int player, int n, Rng& rng) const {
  const RefSampler& sampler = player == 1 ? sampler1_ : sampler2_;
  if (!sampler) throw ConfigError("LiftedGame: no reference sampler configured");
  ReferenceBundle out;
  out.player = player;
  out.refs.resize(n);
  for (int i = 0; i < n; ++i) out.refs[i] = sampler(rng);
  return out;
}

LiftedSolution LiftedGame::forward(const ReferenceBundle& xi1, const ReferenceBundle& xi2,
                                   const Vec& x1, const Vec& x2,
                                   const LiftedSolution* warm) const {
  const int n1 = xi1.count();
  const int n2 = xi2.count();
  if (n1 < 1 || n2 < 1) throw ConfigError("LiftedGame::forward: empty reference bundle");
  for (const auto* b : {&xi1, &xi2}) {
    for (const Vec& r : b->refs)
      if (!r.allFinite()) throw ConfigError("LiftedGame::forward: non-finite reference");
  }

  LiftedSolution sol;
  sol.xi1 = xi1;
  sol.xi2 = xi2;
  sol.x1 = x1;
  sol.x2 = x2;
  sol.candidates1.resize(n1);
  sol.candidates2.resize(n2);

  // Candidate subproblems are independent; slots keep the result identical
  // for any execution order.
  std::vector<std::string> failures(n1 + n2);
  parallel_for(n1 + n2, config_.threads, [&](int idx) {
    const int player = idx < n1 ? 1 : 2;
    const int c = idx < n1 ? idx : idx - n1;
    const TrajOptimizer& opt = player == 1 ? *opt1_ : *opt2_;
    const ReferenceBundle& xi = player == 1 ? xi1 : xi2;
    const Vec& x0 = player == 1 ? x1 : x2;
    auto& out = player == 1 ? sol.candidates1[c] : sol.candidates2[c];
    const QpSolution* prev = nullptr;
    if (warm) {
      const auto& w = player == 1 ? warm->candidates1 : warm->candidates2;
      if (c < static_cast<int>(w.size())) prev = &w[c];
    }
    try {
      out = opt.solve(xi.refs[c], x0, prev ? &prev->tau : nullptr);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "player " << player << " candidate " << c << ": " << e.what();
      failures[idx] = msg.str();
    }
  });
  for (const auto& f : failures) {
    if (!f.empty()) throw InfeasibleError("LiftedGame::forward: " + f);
  }

  // Feasibility is the pipeline's hard guarantee; verify it on every pass.
  for (int player = 1; player <= 2; ++player) {
    const TrajOptimizer& opt = player == 1 ? *opt1_ : *opt2_;
    const auto& cands = player == 1 ? sol.candidates1 : sol.candidates2;
    for (const auto& cand : cands) {
      const auto& cs = opt.constraints();
      if (cs.ineq_rows() > 0) {
        const Vec cx = cs.c * cand.tau;
        for (int j = 0; j < cs.ineq_rows(); ++j) {
          if (cx[j] > cs.ub[j] + 1e-6 || cx[j] < cs.lb[j] - 1e-6)
            throw ConvergenceError("LiftedGame::forward: candidate violates constraints",
                                   std::max(cx[j] - cs.ub[j], cs.lb[j] - cx[j]));
        }
      }
    }
  }

  sol.costs.a.resize(n1, n2);
  sol.costs.b.resize(n1, n2);
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      sol.costs.a(i, j) = costs_->cost(1, sol.tau1(i), sol.tau2(j));
      sol.costs.b(i, j) = costs_->cost(2, sol.tau1(i), sol.tau2(j));
    }
  }

  sol.mix = bimatrix::bmg(sol.costs, config_.entering_label, config_.shift_margin);
  sol.loss1 = sol.mix.q1.dot(sol.costs.a * sol.mix.q2);
  sol.loss2 = sol.mix.q1.dot(sol.costs.b * sol.mix.q2);
  return sol;
}

namespace {

// tau cotangents induced by cost-matrix cotangents (da, db).
void chain_cost_matrices(const CostModel& costs, const LiftedSolution& sol, const Mat& da,
                         const Mat& db, std::vector<Vec>* tau1_cot, std::vector<Vec>* tau2_cot) {
  const int n1 = static_cast<int>(sol.candidates1.size());
  const int n2 = static_cast<int>(sol.candidates2.size());
  if (tau1_cot) {
    tau1_cot->assign(n1, Vec());
    for (int i = 0; i < n1; ++i) (*tau1_cot)[i] = Vec::Zero(sol.tau1(i).size());
  }
  if (tau2_cot) {
    tau2_cot->assign(n2, Vec());
    for (int j = 0; j < n2; ++j) (*tau2_cot)[j] = Vec::Zero(sol.tau2(j).size());
  }
  Vec g1a, g2a, g1b, g2b;
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      const double wa = da(i, j);
      const double wb = db(i, j);
      if (wa == 0.0 && wb == 0.0) continue;
      if (wa != 0.0) costs.gradient(1, sol.tau1(i), sol.tau2(j), g1a, g2a);
      if (wb != 0.0) costs.gradient(2, sol.tau1(i), sol.tau2(j), g1b, g2b);
      if (tau1_cot) {
        if (wa != 0.0) (*tau1_cot)[i] += wa * g1a;
        if (wb != 0.0) (*tau1_cot)[i] += wb * g1b;
      }
      if (tau2_cot) {
        if (wa != 0.0) (*tau2_cot)[j] += wa * g2a;
        if (wb != 0.0) (*tau2_cot)[j] += wb * g2b;
      }
    }
  }
}

// Cost-matrix cotangents of L_which: the direct bilinear term plus the
// indirect dependence through the mixing weights.
std::pair<Mat, Mat> loss_matrix_cotangents(const LiftedSolution& sol, int which) {
  const Mat& m = which == 1 ? sol.costs.a : sol.costs.b;
  const Vec q1_cot = m * sol.mix.q2;
  const Vec q2_cot = m.transpose() * sol.mix.q1;
  bimatrix::CostMatrixPair indirect = bimatrix::bmg_vjp(sol.costs, sol.mix, q1_cot, q2_cot);
  Mat da = std::move(indirect.a);
  Mat db = std::move(indirect.b);
  (which == 1 ? da : db) += sol.mix.q1 * sol.mix.q2.transpose();
  return {std::move(da), std::move(db)};
}

}  // namespace

BundleGradient LiftedGame::backward(const LiftedSolution& sol, int which) const {
  auto [da, db] = loss_matrix_cotangents(sol, which);
  std::vector<Vec> tau1_cot, tau2_cot;
  chain_cost_matrices(*costs_, sol, da, db, &tau1_cot, &tau2_cot);

  BundleGradient out;
  out.xi1.resize(sol.candidates1.size());
  out.xi2.resize(sol.candidates2.size());
  for (size_t i = 0; i < sol.candidates1.size(); ++i)
    out.xi1[i] = opt1_->vjp(sol.candidates1[i], tau1_cot[i]);
  for (size_t j = 0; j < sol.candidates2.size(); ++j)
    out.xi2[j] = opt2_->vjp(sol.candidates2[j], tau2_cot[j]);
  return out;
}

std::vector<Vec> LiftedGame::own_bundle_gradient(const LiftedSolution& sol, int player) const {
  auto [da, db] = loss_matrix_cotangents(sol, player);
  std::vector<Vec> tau_cot;
  std::vector<Vec> out;
  if (player == 1) {
    chain_cost_matrices(*costs_, sol, da, db, &tau_cot, nullptr);
    out.resize(sol.candidates1.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = opt1_->vjp(sol.candidates1[i], tau_cot[i]);
  } else {
    chain_cost_matrices(*costs_, sol, da, db, nullptr, &tau_cot);
    out.resize(sol.candidates2.size());
    for (size_t j = 0; j < out.size(); ++j) out[j] = opt2_->vjp(sol.candidates2[j], tau_cot[j]);
  }
  return out;
}

std::pair<std::vector<Vec>, std::vector<Vec>> LiftedGame::own_gradients(
    const LiftedSolution& sol) const {
  return {own_bundle_gradient(sol, 1), own_bundle_gradient(sol, 2)};
}

std::pair<double, std::vector<Vec>> LiftedGame::penalty_terms(const LiftedSolution& sol,
                                                              int player) const {
  const TrajOptimizer& opt = player == 1 ? *opt1_ : *opt2_;
  const auto& cands = player == 1 ? sol.candidates1 : sol.candidates2;
  const auto& bundle = player == 1 ? sol.xi1 : sol.xi2;
  const Vec& x0 = player == 1 ? sol.x1 : sol.x2;

  double total = 0.0;
  std::vector<Vec> grads(cands.size());
  for (size_t c = 0; c < cands.size(); ++c) {
    switch (config_.penalty) {
      case StickyMode::kNone:
        grads[c] = Vec::Zero(opt.ref_dim());
        break;
      case StickyMode::kHinge: {
        auto [v, g] = opt.reference_penalty(bundle.refs[c], x0);
        total += config_.penalty_weight * v;
        grads[c] = config_.penalty_weight * g;
        break;
      }
      case StickyMode::kDual: {
        auto [v, g] = opt.dual_penalty(cands[c]);
        total += config_.penalty_weight * v;
        grads[c] = config_.penalty_weight * g;
        break;
      }
    }
  }
  return {total, std::move(grads)};
}

GradientPlayResult LiftedGame::gradient_play(const Vec& x1, const Vec& x2, int n1, int n2,
                                             const GradientPlayConfig& cfg, Rng& rng) const {
  return gradient_play(sample_bundle(1, n1, rng), sample_bundle(2, n2, rng), x1, x2, cfg);
}

GradientPlayResult LiftedGame::gradient_play(ReferenceBundle xi1, ReferenceBundle xi2,
                                             const Vec& x1, const Vec& x2,
                                             const GradientPlayConfig& cfg) const {
  if (cfg.steps < 1 || cfg.rate1 < 0 || cfg.rate2 < 0)
    throw ConfigError("gradient_play: bad step budget or rates");

  GradientPlayResult result;
  result.value_trace.reserve(cfg.steps);
  LiftedSolution sol;
  const LiftedSolution* warm = nullptr;

  for (int step = 0; step < cfg.steps; ++step) {
    sol = forward(xi1, xi2, x1, x2, warm);
    if (!std::isfinite(sol.loss1) || !std::isfinite(sol.loss2)) {
      std::ostringstream msg;
      msg << "gradient_play: non-finite loss at step " << step;
      throw ConvergenceError(msg.str(), sol.loss1);
    }
    result.value_trace.push_back(sol.loss1);

    auto [g1, g2] = own_gradients(sol);
    auto [pen1, pg1] = penalty_terms(sol, 1);
    auto [pen2, pg2] = penalty_terms(sol, 2);
    (void)pen1;
    (void)pen2;

    double norm1 = 0.0, norm2 = 0.0;
    for (size_t i = 0; i < g1.size(); ++i) {
      g1[i] += pg1[i];
      norm1 += g1[i].squaredNorm();
    }
    for (size_t j = 0; j < g2.size(); ++j) {
      g2[j] += pg2[j];
      norm2 += g2[j].squaredNorm();
    }
    result.grad_norm1 = std::sqrt(norm1);
    result.grad_norm2 = std::sqrt(norm2);
    result.steps_taken = step + 1;

    if (result.grad_norm1 < cfg.stop_grad_tol && result.grad_norm2 < cfg.stop_grad_tol) {
      result.converged = true;
      break;
    }
    // Simultaneous update: both players move from the same iterate.
    for (size_t i = 0; i < g1.size(); ++i) xi1.refs[i] -= cfg.rate1 * g1[i];
    for (size_t j = 0; j < g2.size(); ++j) xi2.refs[j] -= cfg.rate2 * g2[j];
    warm = &sol;
  }

  result.xi1 = std::move(xi1);
  result.xi2 = std::move(xi2);
  result.last = std::move(sol);
  return result;
}

LiftedGame make_tag_game(const TagEnvSpec& spec, RefMode mode, LiftedGameConfig config,
                         QpSettings qp) {
  const TrajEnvironment env = environment(spec);
  const Vec origin = Vec::Zero(4);
  const LinearConstraintSet constraints = build_constraints(origin, env);
  TrajProblemSpec problem = mode == RefMode::kControl
                                ? control_reference_spec(env.layout)
                                : goal_reference_spec(env.layout, 0.1);
  auto opt = std::make_shared<const TrajOptimizer>(std::move(problem), constraints, qp);
  auto costs = std::make_shared<const TagCostModel>(spec);

  LiftedGame game(opt, opt, costs, config);
  if (mode == RefMode::kControl) {
    const int dim = opt->ref_dim();
    const double u = spec.u_max * config.ref_init_scale;
    auto sampler = [dim, u](Rng& rng) {
      std::uniform_real_distribution<double> d(-u, u);
      Vec out(dim);
      for (int i = 0; i < dim; ++i) out[i] = d(rng);
      return out;
    };
    game.set_ref_samplers(sampler, sampler);
  } else {
    const HalfspaceSet arena = polygon_halfspaces(spec.arena_vertices);
    auto sampler = [arena](Rng& rng) {
      const Eigen::Vector2d g = sample_in_polytope(arena, rng);
      Vec out(2);
      out << g.x(), g.y();
      return out;
    };
    game.set_ref_samplers(sampler, sampler);
  }
  return game;
}

}  // namespace liftgame
