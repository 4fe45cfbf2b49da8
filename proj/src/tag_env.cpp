#include "liftgame/tag_env.hpp"

#include <cmath>

namespace liftgame {

TrajEnvironment environment(const TagEnvSpec& spec) {
  if (spec.v_max <= 0 || spec.u_max <= 0 || spec.dt <= 0 || spec.horizon < 1)
    throw ConfigError("TagEnvSpec: limits and horizon must be positive");
  TrajEnvironment env;
  env.position_limits = polygon_halfspaces(spec.arena_vertices);
  env.velocity_limits = inscribed_norm_polytope(spec.speed_sides, spec.v_max);
  env.control_limit = spec.u_max;
  env.dt = spec.dt;
  env.layout = spec.layout();
  return env;
}

PlayerState step(const PlayerState& x, const Eigen::Vector2d& u, double dt) {
  PlayerState next;
  next.position = x.position + dt * x.velocity + 0.5 * dt * dt * u;
  next.velocity = x.velocity + dt * u;
  return next;
}

double pursuer_cost(const Trajectory& tau1, const Trajectory& tau2, const TagEnvSpec& spec) {
  const int T = tau1.layout.horizon;
  if (T != tau2.layout.horizon) throw ConfigError("pursuer_cost: horizon mismatch");
  double dist = 0.0;
  double effort = 0.0;
  for (int t = 0; t < T; ++t) {
    dist += (tau1.state(t).head(2) - tau2.state(t).head(2)).squaredNorm();
    effort += tau1.control(t).squaredNorm() - tau2.control(t).squaredNorm();
  }
  return (dist + spec.control_weight * effort) / T;
}

double evader_cost(const Trajectory& tau1, const Trajectory& tau2, const TagEnvSpec& spec) {
  return -pursuer_cost(tau1, tau2, spec);
}

std::pair<Vec, Vec> pursuer_cost_gradients(const Trajectory& tau1, const Trajectory& tau2,
                                           const TagEnvSpec& spec) {
  const TrajLayout& l = tau1.layout;
  const int T = l.horizon;
  Vec g1 = Vec::Zero(l.dim());
  Vec g2 = Vec::Zero(tau2.layout.dim());
  const double wp = 2.0 / T;
  const double wu = 2.0 * spec.control_weight / T;
  for (int t = 0; t < T; ++t) {
    const Eigen::Vector2d dp = tau1.state(t).head(2) - tau2.state(t).head(2);
    g1.segment(l.state_start(t), 2) = wp * dp;
    g2.segment(tau2.layout.state_start(t), 2) = -wp * dp;
    g1.segment(l.control_start(t), 2) = wu * tau1.control(t);
    g2.segment(tau2.layout.control_start(t), 2) = -wu * tau2.control(t);
  }
  return {g1, g2};
}

PlayerState sample_player_state(const TagEnvSpec& spec, Rng& rng) {
  const HalfspaceSet arena = polygon_halfspaces(spec.arena_vertices);
  const HalfspaceSet speed = inscribed_norm_polytope(spec.speed_sides, spec.v_max);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    PlayerState x;
    x.position = sample_in_polytope(arena, rng);
    x.velocity = sample_in_polytope(speed, rng);
    // Max-deceleration stop point: braking with u = -u_max v / |v|_inf keeps
    // the velocity direction fixed, so feasibility reduces to the stop point
    // staying in the (convex) arena.
    const double vinf = x.velocity.lpNorm<Eigen::Infinity>();
    const Eigen::Vector2d stop = x.position + x.velocity * (vinf / (2.0 * spec.u_max));
    if (arena.violation(stop) <= -1e-9) return x;
  }
  throw ConfigError("sample_player_state: rejection sampling failed");
}

std::pair<PlayerState, PlayerState> sample_initial_state(const TagEnvSpec& spec, Rng& rng) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    PlayerState a = sample_player_state(spec, rng);
    PlayerState b = sample_player_state(spec, rng);
    if ((a.position - b.position).norm() >= spec.min_separation) return {a, b};
  }
  throw ConfigError("sample_initial_state: rejection sampling failed");
}

}  // namespace liftgame
