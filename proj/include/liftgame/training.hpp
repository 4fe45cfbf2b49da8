#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "liftgame/generator.hpp"
#include "liftgame/lifted_game.hpp"
#include "liftgame/tag_env.hpp"
#include "liftgame/util.hpp"

namespace liftgame {

struct TrainConfig {
  double rate1 = 1e-2;
  double rate2 = 1e-2;
  int batch_size = 0;  // 0: full dataset per iteration
  int iterations = 200;
  int dataset_size = 32;
  int n1 = 2;
  int n2 = 2;
  uint64_t seed = 0;
  double penalty_weight = 1e-2;
  int checkpoint_every = 0;  // 0: disabled
  std::string checkpoint_dir;
  std::vector<int> hidden = {64, 64};
  int threads = 1;
  // self-play settings
  int turns = 2500;
  int replan_interval = 9;
  int window = 500;
  double stop_grad_tol = 0.0;  // 0: run the full budget

  void validate() const;
};

struct Dataset {
  std::vector<std::pair<Vec, Vec>> states;  // joint initial configurations
  int size() const { return static_cast<int>(states.size()); }
};

// Positions uniform over the arena, velocities uniform over the speed
// polytope, restricted to QP-feasible states; reproducible per seed.
Dataset sample_dataset(const TagEnvSpec& env, int d, uint64_t seed);

struct TrainCheckpoint {
  GeneratorParams theta1, theta2;
  int iteration = 0;
  std::string rng_state;
};

void save_checkpoint(const TrainCheckpoint& ck, const std::string& path);
TrainCheckpoint load_checkpoint(const std::string& path);

struct TrainResult {
  GeneratorParams theta1, theta2;
  std::vector<double> loss_trace;   // batch-mean L1 per iteration
  std::vector<double> loss2_trace;  // batch-mean L2 (the exact negative under tag costs)
  std::vector<double> grad_norm1, grad_norm2;
  int degenerate_skips = 0;
};

// Simultaneous gradient descent on both generators over the dataset; both
// parameter updates in one iteration are evaluated at the pre-update
// iterate. An optional line-JSON log receives one record per iteration.
TrainResult train_offline(const TrainConfig& config, const TagEnvSpec& env,
                          const LiftedGame& game, std::ostream* log = nullptr,
                          const TrainCheckpoint* resume = nullptr);

GeneratorShape tag_generator_shape(const TagEnvSpec& env, const LiftedGame& game, int player,
                                   int n_refs, const std::vector<int>& hidden);

struct SelfPlayResult {
  GeneratorParams theta1, theta2;
  std::vector<double> value_trace;      // realized value per turn
  std::vector<double> grad_norm1, grad_norm2;
  std::vector<double> window_mean;      // moving-window value mean per turn
  std::vector<double> window_sem;
  double mean_forward_ms = 0.0;         // plan latency, gradient work excluded
  int infeasible_turns = 0;             // executed steps violating limits (always 0)
};

// Receding-horizon self-play: one simultaneous gradient step per turn on the
// current joint state, then both players execute their sampled candidates.
SelfPlayResult self_play_learn(const TrainConfig& config, const TagEnvSpec& env,
                               const LiftedGame& game, std::ostream* log = nullptr);

}  // namespace liftgame
