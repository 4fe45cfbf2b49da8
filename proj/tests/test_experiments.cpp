#include <doctest.h>

#include <cmath>
#include <memory>

#include "liftgame/experiments.hpp"

using namespace liftgame;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.env.horizon = 8;
  cfg.seed = 5;
  cfg.play.steps = 40;
  cfg.play.rate1 = cfg.play.rate2 = 0.25;
  cfg.train.iterations = 3;
  cfg.train.dataset_size = 3;
  cfg.train.hidden = {8};
  cfg.rh_updates = 4;
  cfg.rh_interval = 4;
  return cfg;
}

class FixedPolicy : public Policy {
 public:
  FixedPolicy(std::shared_ptr<const LiftedGame> game, ReferenceBundle mine, ReferenceBundle theirs)
      : game_(std::move(game)), mine_(std::move(mine)), theirs_(std::move(theirs)) {}
  Plan plan(const Vec& x1, const Vec& x2, int role) override {
    const LiftedSolution sol = role == 1 ? game_->forward(mine_, theirs_, x1, x2)
                                         : game_->forward(theirs_, mine_, x1, x2);
    Plan out;
    const auto& cands = role == 1 ? sol.candidates1 : sol.candidates2;
    for (const auto& c : cands) out.candidates.push_back(c.tau);
    out.mix = role == 1 ? sol.mix.q1 : sol.mix.q2;
    return out;
  }
  std::string label() const override { return "fixed"; }

 private:
  std::shared_ptr<const LiftedGame> game_;
  ReferenceBundle mine_, theirs_;
};

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("mpgp with one update and full-horizon interval is open-loop play") {
  const ExperimentConfig cfg = tiny_config();
  auto game = std::make_shared<const LiftedGame>(make_tag_game(cfg.env, RefMode::kControl));
  Rng rng(3);
  auto [a, b] = sample_initial_state(cfg.env, rng);
  ReferenceBundle xi1 = game->sample_bundle(1, 1, rng);
  ReferenceBundle xi2 = game->sample_bundle(2, 1, rng);
  FixedPolicy pursuer(game, xi1, xi2);
  FixedPolicy evader(game, xi2, xi1);

  Rng rp(1), re(2);
  const EpisodeRecord ep =
      mpgp_simulate(pursuer, evader, a.vec(), b.vec(), 1, cfg.env.horizon, cfg.env, rp, re);
  CHECK(static_cast<int>(ep.controls1.size()) == cfg.env.horizon);

  // Matches evaluating f1 on the planned open-loop trajectories directly.
  const LiftedSolution sol = game->forward(xi1, xi2, a.vec(), b.vec());
  CHECK(ep.value == doctest::Approx(sol.loss1).epsilon(1e-9));

  // Deterministic with n = 1 policies regardless of execution seeds.
  FixedPolicy pursuer2(game, xi1, xi2);
  FixedPolicy evader2(game, xi2, xi1);
  Rng rp2(99), re2(98);
  const EpisodeRecord ep2 =
      mpgp_simulate(pursuer2, evader2, a.vec(), b.vec(), 1, cfg.env.horizon, cfg.env, rp2, re2);
  CHECK(ep2.value == ep.value);
}

TEST_CASE("mpgp executes updates x interval steps") {
  const ExperimentConfig cfg = tiny_config();
  auto game = std::make_shared<const LiftedGame>(make_tag_game(cfg.env, RefMode::kControl));
  Rng rng(7);
  auto [a, b] = sample_initial_state(cfg.env, rng);
  GradientPlayPolicy pursuer(game, 1, 1, cfg.play, 11, "pure");
  GradientPlayPolicy evader(game, 1, 1, cfg.play, 12, "pure");
  Rng rp(1), re(2);
  const EpisodeRecord ep = mpgp_simulate(pursuer, evader, a.vec(), b.vec(), 5, 3, cfg.env, rp, re);
  CHECK(ep.controls1.size() == 15);
  CHECK(ep.states1.size() == 16);
  CHECK(ep.sampled1.size() == 5);
}

TEST_CASE("toy interval game finds the two corner equilibria") {
  ExperimentConfig cfg = tiny_config();
  cfg.toy_starts = 12;
  cfg.toy_step_cap = 2500;
  const ToyResult result = exp_toy_interval(cfg);
  REQUIRE(result.regularized.size() == 12);
  for (const ToyRun& run : result.regularized) {
    CHECK(run.stationary);
    CHECK(run.local_equilibrium);
    const bool low = std::abs(run.tau1 + 1) < 1e-3 && std::abs(run.tau2 + 1) < 1e-3;
    const bool high = std::abs(run.tau1 - 1) < 1e-3 && std::abs(run.tau2 - 1) < 1e-3;
    CHECK((low || high));
  }
  for (const ToyRun& run : result.unregularized) {
    CHECK_FALSE((run.stationary && run.local_equilibrium));
  }
}

TEST_CASE("sampled-vs-learned smoke run") {
  ExperimentConfig cfg = tiny_config();
  cfg.trials_svl = 2;
  cfg.svl_sweep = {1, 3};
  cfg.svl_evader_candidates = 4;
  cfg.svl_learn_steps = 10;
  const SampledVsLearnedResult result = exp_sampled_vs_learned(cfg);
  REQUIRE(result.baseline.size() == 2);
  CHECK(result.baseline[0].n1 == 1);
  CHECK(result.baseline[1].values.size() == 2);
  CHECK(result.learned.values.size() == 2);
  for (double v : result.learned.values) CHECK(std::isfinite(v));
  // SEM recomputable from the stored per-trial values.
  const MeanSem ms = result.baseline[1].stats();
  const double mean = (result.baseline[1].values[0] + result.baseline[1].values[1]) / 2;
  CHECK(ms.mean == doctest::Approx(mean));
}

TEST_CASE("equilibrium convergence smoke run") {
  ExperimentConfig cfg = tiny_config();
  cfg.states_eq = 2;
  cfg.play.steps = 50;
  const ConvergenceResult result = exp_equilibrium_convergence(cfg);
  REQUIRE(result.pure.size() == 2);
  REQUIRE(result.lifted.size() == 2);
  CHECK(result.pure[0].trace.size() <= 50);
  CHECK(std::isfinite(result.pure_value.mean));
  CHECK(std::isfinite(result.lifted_value.mean));
}

TEST_CASE("open-loop tournament smoke run") {
  ExperimentConfig cfg = tiny_config();
  cfg.states_open = 2;
  cfg.play.steps = 30;
  const TournamentGrid grid = exp_open_loop_tournament(cfg);
  for (int pv = 0; pv < 2; ++pv) {
    for (int ev = 0; ev < 2; ++ev) {
      CHECK(grid.cell[pv][ev].values.size() == 2);
      for (double v : grid.cell[pv][ev].values) CHECK(std::isfinite(v));
    }
  }
}

TEST_CASE("receding-horizon tournament smoke run") {
  ExperimentConfig cfg = tiny_config();
  cfg.states_rh = 1;
  const RecedingHorizonResult result = exp_receding_horizon_tournament(cfg);
  for (int pv = 0; pv < 2; ++pv)
    for (int ev = 0; ev < 2; ++ev) CHECK(result.grid.cell[pv][ev].values.size() == 1);
  CHECK(result.mean_plan_ms > 0.0);
}

TEST_CASE("trial counts follow the preset unless overridden") {
  ExperimentConfig cfg = tiny_config();
  CHECK_FALSE(cfg.paper);
  CHECK(cfg.preset().open_loop_states == 20);
  cfg.paper = true;
  CHECK(cfg.preset().open_loop_states == 100);
  CHECK(cfg.preset().selfplay_turns == 2500);
}

}  // TEST_SUITE
