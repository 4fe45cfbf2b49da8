#include "liftgame/experiments.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

namespace liftgame {

using nlohmann::json;

ExperimentPreset paper_preset() { return {50, 20, 100, 5, 2500}; }
ExperimentPreset ci_preset() { return {10, 5, 20, 2, 500}; }

namespace {

int resolved(int override_value, int preset_value) {
  return override_value >= 0 ? override_value : preset_value;
}

std::shared_ptr<const LiftedGame> shared_tag_game(const ExperimentConfig& config, RefMode mode) {
  return std::make_shared<const LiftedGame>(
      make_tag_game(config.env, mode, config.lifted, config.qp));
}

// Candidate trajectories are already solved; finish the pipeline from the
// cost matrices onward.
LiftedSolution assemble_solution(const LiftedGame& game, ReferenceBundle xi1, ReferenceBundle xi2,
                                 const Vec& x1, const Vec& x2, std::vector<QpSolution> cands1,
                                 std::vector<QpSolution> cands2) {
  LiftedSolution sol;
  sol.xi1 = std::move(xi1);
  sol.xi2 = std::move(xi2);
  sol.x1 = x1;
  sol.x2 = x2;
  sol.candidates1 = std::move(cands1);
  sol.candidates2 = std::move(cands2);
  const int n1 = static_cast<int>(sol.candidates1.size());
  const int n2 = static_cast<int>(sol.candidates2.size());
  sol.costs.a.resize(n1, n2);
  sol.costs.b.resize(n1, n2);
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      sol.costs.a(i, j) = game.costs().cost(1, sol.tau1(i), sol.tau2(j));
      sol.costs.b(i, j) = game.costs().cost(2, sol.tau1(i), sol.tau2(j));
    }
  }
  sol.mix = bimatrix::bmg(sol.costs, game.config().entering_label, game.config().shift_margin);
  sol.loss1 = sol.mix.q1.dot(sol.costs.a * sol.mix.q2);
  sol.loss2 = sol.mix.q1.dot(sol.costs.b * sol.mix.q2);
  return sol;
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) std::filesystem::create_directories(dir);
}

}  // namespace

GradientPlayPolicy::GradientPlayPolicy(std::shared_ptr<const LiftedGame> game, int n1, int n2,
                                       GradientPlayConfig cfg, uint64_t seed, std::string label)
    : game_(std::move(game)), n1_(n1), n2_(n2), cfg_(cfg), rng_(seed), label_(std::move(label)) {}

Policy::Plan GradientPlayPolicy::plan(const Vec& x1, const Vec& x2, int role) {
  const GradientPlayResult result = game_->gradient_play(x1, x2, n1_, n2_, cfg_, rng_);
  Plan out;
  const auto& cands = role == 1 ? result.last.candidates1 : result.last.candidates2;
  out.candidates.reserve(cands.size());
  for (const auto& c : cands) out.candidates.push_back(c.tau);
  out.mix = role == 1 ? result.last.mix.q1 : result.last.mix.q2;
  return out;
}

GeneratorPolicy::GeneratorPolicy(std::shared_ptr<const LiftedGame> game, GeneratorParams theta1,
                                 GeneratorParams theta2, std::string label)
    : game_(std::move(game)), theta1_(std::move(theta1)), theta2_(std::move(theta2)),
      label_(std::move(label)) {}

Policy::Plan GeneratorPolicy::plan(const Vec& x1, const Vec& x2, int role) {
  const auto t0 = std::chrono::steady_clock::now();
  const ReferenceBundle xi1 = generate(theta1_, x1, x2);
  const ReferenceBundle xi2 = generate(theta2_, x1, x2);
  const LiftedSolution sol = game_->forward(xi1, xi2, x1, x2);
  total_plan_ms_ += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                        .count();
  ++plans_;
  Plan out;
  const auto& cands = role == 1 ? sol.candidates1 : sol.candidates2;
  for (const auto& c : cands) out.candidates.push_back(c.tau);
  out.mix = role == 1 ? sol.mix.q1 : sol.mix.q2;
  return out;
}

EpisodeRecord mpgp_simulate(Policy& pursuer, Policy& evader, const Vec& x1, const Vec& x2,
                            int strategy_updates, int replan_interval, const TagEnvSpec& env,
                            Rng& rng_pursuer, Rng& rng_evader) {
  if (replan_interval < 1 || replan_interval > env.horizon)
    throw ConfigError("mpgp_simulate: replan interval must lie in [1, horizon]");
  if (strategy_updates < 1) throw ConfigError("mpgp_simulate: need at least one update");

  const TrajLayout layout = env.layout();
  EpisodeRecord ep;
  ep.pursuer_label = pursuer.label();
  ep.evader_label = evader.label();

  Vec s1 = x1, s2 = x2;
  ep.states1.push_back(s1);
  ep.states2.push_back(s2);

  double dist = 0.0, effort = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  int plan_calls = 0;
  for (int update = 0; update < strategy_updates; ++update) {
    const Policy::Plan plan_p = pursuer.plan(s1, s2, 1);
    const Policy::Plan plan_e = evader.plan(s1, s2, 2);
    plan_calls += 2;
    const int c1 = sample_categorical(plan_p.mix, rng_pursuer);
    const int c2 = sample_categorical(plan_e.mix, rng_evader);
    ep.sampled1.push_back(c1);
    ep.sampled2.push_back(c2);
    const Trajectory t1{layout, plan_p.candidates[c1]};
    const Trajectory t2{layout, plan_e.candidates[c2]};

    PlayerState p1 = PlayerState::from_vec(s1);
    PlayerState p2 = PlayerState::from_vec(s2);
    for (int k = 0; k < replan_interval; ++k) {
      const Eigen::Vector2d u1 = t1.control(k);
      const Eigen::Vector2d u2 = t2.control(k);
      // The game value pairs each state with the control applied in it.
      dist += (p1.position - p2.position).squaredNorm();
      effort += u1.squaredNorm() - u2.squaredNorm();
      p1 = step(p1, u1, env.dt);
      p2 = step(p2, u2, env.dt);
      ep.controls1.push_back(u1);
      ep.controls2.push_back(u2);
      ep.states1.push_back(p1.vec());
      ep.states2.push_back(p2.vec());
    }
    s1 = p1.vec();
    s2 = p2.vec();
  }
  const int steps = strategy_updates * replan_interval;
  ep.value = (dist + env.control_weight * effort) / steps;
  ep.mean_plan_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() /
      plan_calls;
  return ep;
}

SampledVsLearnedResult exp_sampled_vs_learned(const ExperimentConfig& config) {
  const int trials = resolved(config.trials_svl, config.preset().sampled_vs_learned_trials);
  std::vector<int> sweep = config.svl_sweep;
  if (sweep.empty()) {
    sweep.resize(20);
    std::iota(sweep.begin(), sweep.end(), 1);
  }
  const auto game = shared_tag_game(config, RefMode::kGoal);
  const TrajOptimizer& opt = game->optimizer(1);

  struct TrialOut {
    std::vector<double> baseline;  // one value per sweep entry
    double learned = 0.0;
  };
  std::vector<TrialOut> out(trials);

  parallel_for(trials, config.threads, [&](int t) {
    Rng rng(derive_seed(config.seed, 40000 + t));
    auto [a, b] = sample_initial_state(config.env, rng);
    const Vec x1 = a.vec();
    const Vec x2 = b.vec();

    // The evader's candidate set is fixed for the whole trial; solve its
    // subproblems once.
    const ReferenceBundle xi2 = game->sample_bundle(2, config.svl_evader_candidates, rng);
    std::vector<QpSolution> evader_cands(xi2.count());
    for (int j = 0; j < xi2.count(); ++j) evader_cands[j] = opt.solve(xi2.refs[j], x2);

    out[t].baseline.resize(sweep.size());
    for (size_t s = 0; s < sweep.size(); ++s) {
      const ReferenceBundle xi1 = game->sample_bundle(1, sweep[s], rng);
      std::vector<QpSolution> cands1(xi1.count());
      for (int i = 0; i < xi1.count(); ++i) cands1[i] = opt.solve(xi1.refs[i], x1);
      const LiftedSolution sol =
          assemble_solution(*game, xi1, xi2, x1, x2, std::move(cands1), evader_cands);
      out[t].baseline[s] = sol.loss1;
    }

    // Learned pursuer: gradient play on L1 with the evader bundle held fixed.
    ReferenceBundle xi1 = game->sample_bundle(1, config.svl_learned_candidates, rng);
    LiftedSolution sol;
    std::vector<QpSolution> prev;
    for (int it = 0; it < config.svl_learn_steps; ++it) {
      std::vector<QpSolution> cands1(xi1.count());
      for (int i = 0; i < xi1.count(); ++i) {
        cands1[i] = opt.solve(xi1.refs[i], x1,
                              it > 0 ? &prev[i].tau : nullptr);
      }
      prev = cands1;
      sol = assemble_solution(*game, xi1, xi2, x1, x2, std::move(cands1), evader_cands);
      std::vector<Vec> g = game->own_bundle_gradient(sol, 1);
      auto [pen, pg] = game->penalty_terms(sol, 1);
      (void)pen;
      for (int i = 0; i < xi1.count(); ++i) xi1.refs[i] -= config.play.rate1 * (g[i] + pg[i]);
    }
    out[t].learned = sol.loss1;
  });

  SampledVsLearnedResult result;
  result.baseline.resize(sweep.size());
  for (size_t s = 0; s < sweep.size(); ++s) {
    result.baseline[s].n1 = sweep[s];
    for (int t = 0; t < trials; ++t) result.baseline[s].values.push_back(out[t].baseline[s]);
  }
  result.learned.n1 = config.svl_learned_candidates;
  for (int t = 0; t < trials; ++t) result.learned.values.push_back(out[t].learned);
  return result;
}

namespace {

ConvergenceRun summarize_trace(std::vector<double> trace) {
  ConvergenceRun run;
  const int window = std::min<int>(50, static_cast<int>(trace.size()) / 2);
  const int n = static_cast<int>(trace.size());
  double tail = 0.0, prev = 0.0;
  for (int i = n - window; i < n; ++i) tail += trace[i];
  for (int i = n - 2 * window; i < n - window; ++i) prev += trace[i];
  tail /= window;
  prev /= window;
  run.converged_value = tail;
  run.drift = std::abs(tail - prev) / std::max(1e-12, std::abs(tail));
  run.trace = std::move(trace);
  return run;
}

}  // namespace

ConvergenceResult exp_equilibrium_convergence(const ExperimentConfig& config) {
  const int states = resolved(config.states_eq, config.preset().eq_convergence_states);
  const auto game = shared_tag_game(config, RefMode::kControl);
  const int nl = config.lifted_candidates;

  ConvergenceResult result;
  result.pure.resize(states);
  result.lifted.resize(states);
  parallel_for(states, config.threads, [&](int i) {
    Rng state_rng(derive_seed(config.seed, 50000 + i));
    auto [a, b] = sample_initial_state(config.env, state_rng);
    Rng rng_pure(derive_seed(config.seed, 51000 + i));
    Rng rng_lift(derive_seed(config.seed, 52000 + i));
    const auto pure =
        game->gradient_play(a.vec(), b.vec(), 1, 1, config.play, rng_pure);
    const auto lifted =
        game->gradient_play(a.vec(), b.vec(), nl, nl, config.play, rng_lift);
    result.pure[i] = summarize_trace(pure.value_trace);
    result.lifted[i] = summarize_trace(lifted.value_trace);
  });

  std::vector<double> pv, lv;
  for (int i = 0; i < states; ++i) {
    pv.push_back(result.pure[i].converged_value);
    lv.push_back(result.lifted[i].converged_value);
  }
  result.pure_value = mean_sem(pv);
  result.lifted_value = mean_sem(lv);
  return result;
}

TournamentGrid exp_open_loop_tournament(const ExperimentConfig& config) {
  const int states = resolved(config.states_open, config.preset().open_loop_states);
  const auto game = shared_tag_game(config, RefMode::kControl);
  const int nl = config.lifted_candidates;

  // values[state][pursuer_variant][evader_variant]
  std::vector<std::array<std::array<double, 2>, 2>> values(states);
  parallel_for(states, config.threads, [&](int i) {
    Rng state_rng(derive_seed(config.seed, 60000 + i));
    auto [a, b] = sample_initial_state(config.env, state_rng);
    const Vec x1 = a.vec();
    const Vec x2 = b.vec();

    // Each variant solves its own game once per role, with fresh random
    // initial strategies, so no information crosses between roles.
    Policy::Plan plans[2][3];
    for (int v = 0; v < 2; ++v) {
      const int n = v == 0 ? nl : 1;
      for (int role = 1; role <= 2; ++role) {
        GradientPlayPolicy policy(game, n, n, config.play,
                                  derive_seed(config.seed, 61000 + (i * 2 + v) * 2 + role),
                                  TournamentGrid::variant_name(v));
        plans[v][role] = policy.plan(x1, x2, role);
      }
    }
    for (int pv = 0; pv < 2; ++pv) {
      for (int ev = 0; ev < 2; ++ev) {
        Rng pair_rng(derive_seed(config.seed, 62000 + (i * 2 + pv) * 2 + ev));
        const int c1 = sample_categorical(plans[pv][1].mix, pair_rng);
        const int c2 = sample_categorical(plans[ev][2].mix, pair_rng);
        values[i][pv][ev] =
            game->costs().cost(1, plans[pv][1].candidates[c1], plans[ev][2].candidates[c2]);
      }
    }
  });

  TournamentGrid grid;
  for (int i = 0; i < states; ++i)
    for (int pv = 0; pv < 2; ++pv)
      for (int ev = 0; ev < 2; ++ev) grid.cell[pv][ev].values.push_back(values[i][pv][ev]);
  return grid;
}

RecedingHorizonResult exp_receding_horizon_tournament(const ExperimentConfig& config) {
  const int states = resolved(config.states_rh, config.preset().receding_states);
  const auto game = shared_tag_game(config, RefMode::kControl);

  TrainConfig lifted_cfg = config.train;
  lifted_cfg.n1 = lifted_cfg.n2 = config.lifted_candidates;
  lifted_cfg.threads = config.threads;
  TrainConfig pure_cfg = lifted_cfg;
  pure_cfg.n1 = pure_cfg.n2 = 1;

  RecedingHorizonResult result;
  {
    const TrainResult lifted = train_offline(lifted_cfg, config.env, *game);
    result.lifted_theta1 = lifted.theta1;
    result.lifted_theta2 = lifted.theta2;
    const TrainResult pure = train_offline(pure_cfg, config.env, *game);
    result.pure_theta1 = pure.theta1;
    result.pure_theta2 = pure.theta2;
  }

  struct Episode {
    double value = 0.0;
    double plan_ms = 0.0;
  };
  std::vector<Episode> episodes(states * 4);
  parallel_for(states * 4, config.threads, [&](int idx) {
    const int i = idx / 4;
    const int pv = (idx % 4) / 2;
    const int ev = idx % 2;
    Rng state_rng(derive_seed(config.seed, 70000 + i));
    auto [a, b] = sample_initial_state(config.env, state_rng);

    GeneratorPolicy pursuer(game, pv == 0 ? result.lifted_theta1 : result.pure_theta1,
                            pv == 0 ? result.lifted_theta2 : result.pure_theta2,
                            TournamentGrid::variant_name(pv));
    GeneratorPolicy evader(game, ev == 0 ? result.lifted_theta1 : result.pure_theta1,
                           ev == 0 ? result.lifted_theta2 : result.pure_theta2,
                           TournamentGrid::variant_name(ev));
    Rng rng_p(derive_seed(config.seed, 71000 + idx));
    Rng rng_e(derive_seed(config.seed, 72000 + idx));
    const EpisodeRecord ep = mpgp_simulate(pursuer, evader, a.vec(), b.vec(), config.rh_updates,
                                           config.rh_interval, config.env, rng_p, rng_e);
    episodes[idx] = {ep.value, ep.mean_plan_ms};
  });

  double ms = 0.0;
  for (int idx = 0; idx < states * 4; ++idx) {
    const int pv = (idx % 4) / 2;
    const int ev = idx % 2;
    result.grid.cell[pv][ev].values.push_back(episodes[idx].value);
    ms += episodes[idx].plan_ms;
  }
  result.mean_plan_ms = ms / (states * 4);
  return result;
}

SelfPlayResult exp_self_play(const ExperimentConfig& config, std::ostream* log) {
  const auto game = shared_tag_game(config, RefMode::kControl);
  TrainConfig cfg = config.train;
  cfg.n1 = cfg.n2 = config.lifted_candidates;
  cfg.turns = resolved(config.turns_selfplay, config.preset().selfplay_turns);
  cfg.threads = config.threads;
  return self_play_learn(cfg, config.env, *game, log);
}

namespace {

class ToyCostModel : public CostModel {
 public:
  explicit ToyCostModel(double reg) : reg_(reg) {}
  double cost(int player, const Vec& t1, const Vec& t2) const override {
    const double f1 = (t1[0] - t2[0]) * (t1[0] - t2[0]);
    if (player == 1) return f1;
    return -f1 - reg_ * t2[0] * t2[0];
  }
  void gradient(int player, const Vec& t1, const Vec& t2, Vec& g1, Vec& g2) const override {
    const double e = t1[0] - t2[0];
    g1.resize(1);
    g2.resize(1);
    if (player == 1) {
      g1[0] = 2.0 * e;
      g2[0] = -2.0 * e;
    } else {
      g1[0] = -2.0 * e;
      g2[0] = 2.0 * e - 2.0 * reg_ * t2[0];
    }
  }

 private:
  double reg_;
};

}  // namespace

LiftedGame make_toy_game(bool regularized, LiftedGameConfig config, QpSettings qp) {
  LinearConstraintSet box;
  box.a_eq = Mat::Zero(0, 1);
  box.b_eq = Vec::Zero(0);
  box.c = Mat::Ones(1, 1);
  box.lb = Vec::Constant(1, -1.0);
  box.ub = Vec::Constant(1, 1.0);
  auto opt = std::make_shared<const TrajOptimizer>(identity_reference_spec(1), box, qp);
  auto costs = std::make_shared<const ToyCostModel>(regularized ? 1.0 : 0.0);
  config.penalty = StickyMode::kHinge;
  LiftedGame game(opt, opt, costs, config);
  auto sampler = [](Rng& rng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    return Vec::Constant(1, d(rng));
  };
  game.set_ref_samplers(sampler, sampler);
  return game;
}

namespace {

ToyRun run_toy(const LiftedGame& game, ReferenceBundle xi1, ReferenceBundle xi2, int cap,
               double rate) {
  ToyRun run;
  const Vec empty;
  double t1 = 0.0, t2 = 0.0;
  int still = 0;
  for (run.steps = 0; run.steps < cap; ++run.steps) {
    const LiftedSolution sol = game.forward(xi1, xi2, empty, empty);
    const double nt1 = sol.tau1(0)[0];
    const double nt2 = sol.tau2(0)[0];
    if (run.steps > 0 && std::abs(nt1 - t1) < 1e-9 && std::abs(nt2 - t2) < 1e-9) {
      if (++still >= 25) {
        run.stationary = true;
        t1 = nt1;
        t2 = nt2;
        break;
      }
    } else {
      still = 0;
    }
    t1 = nt1;
    t2 = nt2;

    auto [g1, g2] = game.own_gradients(sol);
    auto [pen1, pg1] = game.penalty_terms(sol, 1);
    auto [pen2, pg2] = game.penalty_terms(sol, 2);
    (void)pen1;
    (void)pen2;
    xi1.refs[0] -= rate * (g1[0] + pg1[0]);
    xi2.refs[0] -= rate * (g2[0] + pg2[0]);
  }
  run.tau1 = t1;
  run.tau2 = t2;

  // Probe feasible unilateral deviations at several scales; a point is a
  // local equilibrium when none improves the deviating player.
  run.local_equilibrium = true;
  const Vec v1 = Vec::Constant(1, t1);
  const Vec v2 = Vec::Constant(1, t2);
  const double f1 = game.costs().cost(1, v1, v2);
  const double f2 = game.costs().cost(2, v1, v2);
  for (double delta : {1e-3, 1e-2, 1e-1}) {
    for (double sign : {-1.0, 1.0}) {
      const double d1 = std::clamp(t1 + sign * delta, -1.0, 1.0);
      const double d2 = std::clamp(t2 + sign * delta, -1.0, 1.0);
      if (game.costs().cost(1, Vec::Constant(1, d1), v2) < f1 - 1e-9)
        run.local_equilibrium = false;
      if (game.costs().cost(2, v1, Vec::Constant(1, d2)) < f2 - 1e-9)
        run.local_equilibrium = false;
    }
  }
  return run;
}

}  // namespace

ToyResult exp_toy_interval(const ExperimentConfig& config) {
  const int starts = config.toy_starts;
  const int cap = config.toy_step_cap;
  const double rate = config.toy_rate;
  const LiftedGame regularized = make_toy_game(true, config.lifted, config.qp);
  const LiftedGame unregularized = make_toy_game(false, config.lifted, config.qp);

  ToyResult result;
  result.regularized.resize(starts);
  result.unregularized.resize(starts);
  parallel_for(starts, config.threads, [&](int i) {
    Rng rng_r(derive_seed(config.seed, 80000 + i));
    Rng rng_u(derive_seed(config.seed, 81000 + i));
    result.regularized[i] = run_toy(regularized, regularized.sample_bundle(1, 1, rng_r),
                                    regularized.sample_bundle(2, 1, rng_r), cap, rate);
    result.unregularized[i] = run_toy(unregularized, unregularized.sample_bundle(1, 1, rng_u),
                                      unregularized.sample_bundle(2, 1, rng_u), cap, rate);
  });
  return result;
}

void write_grid_outputs(const TournamentGrid& grid, const std::string& dir,
                        const std::string& stem) {
  if (dir.empty()) return;
  ensure_dir(dir);
  std::ofstream csv(dir + "/" + stem + ".csv");
  csv << "pursuer,evader,trial,value\n";
  json summary;
  for (int pv = 0; pv < 2; ++pv) {
    for (int ev = 0; ev < 2; ++ev) {
      const auto& cell = grid.cell[pv][ev];
      for (size_t t = 0; t < cell.values.size(); ++t) {
        csv << TournamentGrid::variant_name(pv) << "," << TournamentGrid::variant_name(ev) << ","
            << t << "," << cell.values[t] << "\n";
      }
      const MeanSem ms = cell.stats();
      summary[TournamentGrid::variant_name(pv)][TournamentGrid::variant_name(ev)] = {
          {"mean", ms.mean}, {"sem", ms.sem}, {"trials", ms.count}};
    }
  }
  std::ofstream js(dir + "/" + stem + "_summary.json");
  js << summary.dump(2) << "\n";
}

void write_sweep_outputs(const SampledVsLearnedResult& result, const std::string& dir) {
  if (dir.empty()) return;
  ensure_dir(dir);
  std::ofstream csv(dir + "/sampled_vs_learned.csv");
  csv << "method,n1,trial,value\n";
  for (const auto& point : result.baseline) {
    for (size_t t = 0; t < point.values.size(); ++t)
      csv << "sampled," << point.n1 << "," << t << "," << point.values[t] << "\n";
  }
  for (size_t t = 0; t < result.learned.values.size(); ++t)
    csv << "learned," << result.learned.n1 << "," << t << "," << result.learned.values[t] << "\n";

  json summary;
  summary["goal_reference_distribution"] = "uniform over the arena polygon";
  for (const auto& point : result.baseline) {
    const MeanSem ms = point.stats();
    summary["sampled"].push_back({{"n1", point.n1}, {"mean", ms.mean}, {"sem", ms.sem}});
  }
  const MeanSem lm = result.learned.stats();
  summary["learned"] = {{"n1", result.learned.n1}, {"mean", lm.mean}, {"sem", lm.sem}};
  std::ofstream js(dir + "/sampled_vs_learned_summary.json");
  js << summary.dump(2) << "\n";
}

void write_convergence_outputs(const ConvergenceResult& result, const std::string& dir) {
  if (dir.empty()) return;
  ensure_dir(dir);
  std::ofstream csv(dir + "/equilibrium_convergence.csv");
  csv << "solver,state,iteration,value\n";
  for (size_t s = 0; s < result.pure.size(); ++s) {
    for (size_t i = 0; i < result.pure[s].trace.size(); ++i)
      csv << "pure," << s << "," << i << "," << result.pure[s].trace[i] << "\n";
    for (size_t i = 0; i < result.lifted[s].trace.size(); ++i)
      csv << "lifted," << s << "," << i << "," << result.lifted[s].trace[i] << "\n";
  }
  json summary{{"pure", {{"mean", result.pure_value.mean}, {"sem", result.pure_value.sem}}},
               {"lifted", {{"mean", result.lifted_value.mean}, {"sem", result.lifted_value.sem}}}};
  std::ofstream js(dir + "/equilibrium_convergence_summary.json");
  js << summary.dump(2) << "\n";
}

void write_episode_json(const EpisodeRecord& episode, const std::string& path) {
  json j;
  j["pursuer"] = episode.pursuer_label;
  j["evader"] = episode.evader_label;
  j["value"] = episode.value;
  j["mean_plan_ms"] = episode.mean_plan_ms;
  j["sampled1"] = episode.sampled1;
  j["sampled2"] = episode.sampled2;
  const auto dump_states = [](const std::vector<Vec>& states) {
    json arr = json::array();
    for (const Vec& s : states) arr.push_back({s[0], s[1], s[2], s[3]});
    return arr;
  };
  const auto dump_controls = [](const std::vector<Eigen::Vector2d>& controls) {
    json arr = json::array();
    for (const auto& u : controls) arr.push_back({u.x(), u.y()});
    return arr;
  };
  j["states1"] = dump_states(episode.states1);
  j["states2"] = dump_states(episode.states2);
  j["controls1"] = dump_controls(episode.controls1);
  j["controls2"] = dump_controls(episode.controls2);
  std::ofstream out(path);
  if (!out) throw ConfigError("write_episode_json: cannot open " + path);
  out << j.dump() << "\n";
}

}  // namespace liftgame
