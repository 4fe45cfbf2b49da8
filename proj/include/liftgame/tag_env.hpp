#pragma once

#include <Eigen/Core>

#include <utility>
#include <vector>

#include "liftgame/geometry.hpp"
#include "liftgame/traj_opt.hpp"
#include "liftgame/util.hpp"

namespace liftgame {

struct PlayerState {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();

  Vec vec() const {
    Vec v(4);
    v << position, velocity;
    return v;
  }
  static PlayerState from_vec(const Eigen::Ref<const Vec>& v) {
    return {v.head<2>(), v.segment<2>(2)};
  }
};

// Two-player tag in a convex arena. The paper fixes only the horizon; the
// remaining numeric defaults live here.
struct TagEnvSpec {
  std::vector<Eigen::Vector2d> arena_vertices = regular_polygon(5, 1.0, M_PI / 2.0);
  double v_max = 0.8;
  int speed_sides = 8;
  double u_max = 1.0;
  double dt = 0.25;
  int horizon = 20;
  double control_weight = 0.1;  // effort-difference regularizer w_u
  double min_separation = 0.2;

  TrajLayout layout() const { return {horizon, 4, 2}; }
};

TrajEnvironment environment(const TagEnvSpec& spec);

// Exact zero-order hold: p' = p + v dt + u dt^2 / 2, v' = v + u dt.
PlayerState step(const PlayerState& x, const Eigen::Vector2d& u, double dt);

// f1 = mean squared distance + w_u * mean control-effort difference.
double pursuer_cost(const Trajectory& tau1, const Trajectory& tau2, const TagEnvSpec& spec);
double evader_cost(const Trajectory& tau1, const Trajectory& tau2, const TagEnvSpec& spec);

// Gradients of f1 w.r.t. both flattened trajectories (f2's are the negatives).
std::pair<Vec, Vec> pursuer_cost_gradients(const Trajectory& tau1, const Trajectory& tau2,
                                           const TagEnvSpec& spec);

// Uniform over arena/speed polytopes, restricted to states that can brake to
// rest inside the arena so the trajectory QP is always feasible.
PlayerState sample_player_state(const TagEnvSpec& spec, Rng& rng);
std::pair<PlayerState, PlayerState> sample_initial_state(const TagEnvSpec& spec, Rng& rng);

}  // namespace liftgame
