#pragma once

#include <array>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "liftgame/generator.hpp"
#include "liftgame/lifted_game.hpp"
#include "liftgame/tag_env.hpp"
#include "liftgame/training.hpp"
#include "liftgame/util.hpp"

namespace liftgame {

// Trial counts for the Monte Carlo studies; the CI preset trades fidelity for
// runtime.
struct ExperimentPreset {
  int sampled_vs_learned_trials = 50;
  int eq_convergence_states = 20;
  int open_loop_states = 100;
  int receding_states = 5;
  int selfplay_turns = 2500;
};
ExperimentPreset paper_preset();
ExperimentPreset ci_preset();

struct ExperimentConfig {
  TagEnvSpec env;
  uint64_t seed = 0;
  int threads = 1;
  bool paper = false;
  std::string output_dir;  // empty: keep results in memory only
  GradientPlayConfig play;
  TrainConfig train;
  LiftedGameConfig lifted;
  QpSettings qp;
  int lifted_candidates = 2;

  // Trial-count overrides; negative values fall back to the preset.
  int trials_svl = -1;
  int states_eq = -1;
  int states_open = -1;
  int states_rh = -1;
  int turns_selfplay = -1;
  int rh_updates = 500;
  int rh_interval = 9;
  std::vector<int> svl_sweep;  // baseline candidate counts; empty: 1..20
  int svl_evader_candidates = 20;
  int svl_learned_candidates = 2;
  int svl_learn_steps = 150;
  int toy_starts = 100;
  int toy_step_cap = 3000;
  double toy_rate = 0.05;

  ExperimentPreset preset() const { return paper ? paper_preset() : ci_preset(); }
};

struct TournamentResult {
  std::vector<double> values;
  MeanSem stats() const { return mean_sem(values); }
};

// Grid indexed [pursuer][evader] with 0 = lifted, 1 = pure.
struct TournamentGrid {
  std::array<std::array<TournamentResult, 2>, 2> cell;
  static const char* variant_name(int v) { return v == 0 ? "lifted" : "pure"; }
};

struct EpisodeRecord {
  uint64_t seed = 0;
  std::string pursuer_label, evader_label;
  std::vector<int> sampled1, sampled2;  // chosen candidate per strategy update
  std::vector<Vec> states1, states2;    // executed states, including the initial one
  std::vector<Eigen::Vector2d> controls1, controls2;
  double value = 0.0;  // f1 evaluated on the closed-loop trajectories
  double mean_plan_ms = 0.0;
};

// A decision maker in decentralized play: produces its own candidates and
// mixing weights from the joint state. Implementations own their RNG so no
// information leaks between the two roles.
class Policy {
 public:
  virtual ~Policy() = default;
  struct Plan {
    std::vector<Vec> candidates;  // flattened trajectories for this role
    Vec mix;
  };
  virtual Plan plan(const Vec& x1, const Vec& x2, int role) = 0;
  virtual std::string label() const = 0;
};

// Solves its own game from scratch at every call via gradient play with
// randomly initialized reference bundles.
class GradientPlayPolicy : public Policy {
 public:
  GradientPlayPolicy(std::shared_ptr<const LiftedGame> game, int n1, int n2,
                     GradientPlayConfig cfg, uint64_t seed, std::string label);
  Plan plan(const Vec& x1, const Vec& x2, int role) override;
  std::string label() const override { return label_; }

 private:
  std::shared_ptr<const LiftedGame> game_;
  int n1_, n2_;
  GradientPlayConfig cfg_;
  Rng rng_;
  std::string label_;
};

// Evaluates pre-trained reference generators and one forward pass.
class GeneratorPolicy : public Policy {
 public:
  GeneratorPolicy(std::shared_ptr<const LiftedGame> game, GeneratorParams theta1,
                  GeneratorParams theta2, std::string label);
  Plan plan(const Vec& x1, const Vec& x2, int role) override;
  std::string label() const override { return label_; }
  double total_plan_ms() const { return total_plan_ms_; }
  int plans() const { return plans_; }

 private:
  std::shared_ptr<const LiftedGame> game_;
  GeneratorParams theta1_, theta2_;
  std::string label_;
  double total_plan_ms_ = 0.0;
  int plans_ = 0;
};

// Receding-horizon play: each player replans every `replan_interval` steps,
// samples one candidate from its own mixed strategy, and commits to it until
// the next replan.
EpisodeRecord mpgp_simulate(Policy& pursuer, Policy& evader, const Vec& x1, const Vec& x2,
                            int strategy_updates, int replan_interval, const TagEnvSpec& env,
                            Rng& rng_pursuer, Rng& rng_evader);

struct SweepPoint {
  int n1 = 0;
  std::vector<double> values;
  MeanSem stats() const { return mean_sem(values); }
};

struct SampledVsLearnedResult {
  std::vector<SweepPoint> baseline;  // one entry per swept candidate count
  SweepPoint learned;                // fixed candidate budget, learned by gradient play
};
SampledVsLearnedResult exp_sampled_vs_learned(const ExperimentConfig& config);

struct ConvergenceRun {
  std::vector<double> trace;      // L1 per iteration
  double converged_value = 0.0;   // mean over the trailing window
  double drift = 0.0;             // relative change between the two last windows
};
struct ConvergenceResult {
  std::vector<ConvergenceRun> pure, lifted;
  MeanSem pure_value, lifted_value;  // across states
};
ConvergenceResult exp_equilibrium_convergence(const ExperimentConfig& config);

TournamentGrid exp_open_loop_tournament(const ExperimentConfig& config);

struct RecedingHorizonResult {
  TournamentGrid grid;
  GeneratorParams lifted_theta1, lifted_theta2, pure_theta1, pure_theta2;
  double mean_plan_ms = 0.0;
};
RecedingHorizonResult exp_receding_horizon_tournament(const ExperimentConfig& config);

SelfPlayResult exp_self_play(const ExperimentConfig& config, std::ostream* log = nullptr);

struct ToyRun {
  double tau1 = 0.0, tau2 = 0.0;
  bool stationary = false;         // trajectories stopped moving before the cap
  bool local_equilibrium = false;  // no feasible probe deviation improves either player
  int steps = 0;
};
struct ToyResult {
  std::vector<ToyRun> regularized, unregularized;
};
// Scalar interval game; the regularized variant settles at the two corner
// equilibria while the unregularized zero-sum variant has none to reach.
ToyResult exp_toy_interval(const ExperimentConfig& config);

// Scalar game on [-1, 1] with f1 = (t1 - t2)^2 and, when regularized,
// f2 = -f1 - t2^2. References live in trajectory space (hinge penalty mode).
LiftedGame make_toy_game(bool regularized, LiftedGameConfig config = {}, QpSettings qp = {});

// CSV/JSON exports used by the CLI.
void write_grid_outputs(const TournamentGrid& grid, const std::string& dir,
                        const std::string& stem);
void write_sweep_outputs(const SampledVsLearnedResult& result, const std::string& dir);
void write_convergence_outputs(const ConvergenceResult& result, const std::string& dir);
void write_episode_json(const EpisodeRecord& episode, const std::string& path);

}  // namespace liftgame
