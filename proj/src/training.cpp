#include "liftgame/training.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace liftgame {

using nlohmann::json;

void TrainConfig::validate() const {
  if (rate1 < 0 || rate2 < 0) throw ConfigError("TrainConfig: negative learning rate");
  if (iterations < 1 || dataset_size < 1) throw ConfigError("TrainConfig: empty budget");
  if (n1 < 1 || n2 < 1) throw ConfigError("TrainConfig: candidate counts must be >= 1");
  if (turns < 1 || replan_interval < 1 || window < 1)
    throw ConfigError("TrainConfig: bad self-play settings");
}

Dataset sample_dataset(const TagEnvSpec& env, int d, uint64_t seed) {
  if (d < 1) throw ConfigError("sample_dataset: d must be >= 1");
  Dataset out;
  out.states.reserve(d);
  Rng rng(seed);
  for (int k = 0; k < d; ++k) {
    auto [a, b] = sample_initial_state(env, rng);
    out.states.emplace_back(a.vec(), b.vec());
  }
  return out;
}

GeneratorShape tag_generator_shape(const TagEnvSpec& env, const LiftedGame& game, int player,
                                   int n_refs, const std::vector<int>& hidden) {
  GeneratorShape shape;
  shape.input_dim = 8;
  shape.hidden = hidden;
  shape.n_refs = n_refs;
  shape.ref_dim = game.optimizer(player).ref_dim();
  // Control references live in the input box; goal references in the arena.
  const bool control_mode = shape.ref_dim == env.layout().horizon * env.layout().control_dim;
  double radius = 0.0;
  for (const auto& v : env.arena_vertices) radius = std::max(radius, v.norm());
  shape.head_scale = control_mode ? env.u_max : radius;
  shape.input_scale.resize(8);
  shape.input_scale << radius, radius, env.v_max, env.v_max, radius, radius, env.v_max, env.v_max;
  return shape;
}

void save_checkpoint(const TrainCheckpoint& ck, const std::string& path) {
  json j;
  j["iteration"] = ck.iteration;
  j["rng_state"] = ck.rng_state;
  j["theta1"] = params_to_json(ck.theta1);
  j["theta2"] = params_to_json(ck.theta2);
  std::ofstream out(path);
  if (!out) throw ConfigError("save_checkpoint: cannot open " + path);
  out << j.dump() << "\n";
}

TrainCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_checkpoint: cannot open " + path);
  json j = json::parse(in);
  TrainCheckpoint ck;
  ck.iteration = j.at("iteration").get<int>();
  ck.rng_state = j.at("rng_state").get<std::string>();
  ck.theta1 = params_from_json(j.at("theta1"));
  ck.theta2 = params_from_json(j.at("theta2"));
  return ck;
}

namespace {

struct SampleGrads {
  GeneratorParams g1, g2;
  double loss1 = 0.0;
  double loss2 = 0.0;
  bool ok = false;
  bool degenerate = false;
};

}  // namespace

TrainResult train_offline(const TrainConfig& config, const TagEnvSpec& env, const LiftedGame& game,
                          std::ostream* log, const TrainCheckpoint* resume) {
  config.validate();
  const Dataset data = sample_dataset(env, config.dataset_size, derive_seed(config.seed, 1000));

  TrainResult result;
  if (resume) {
    result.theta1 = resume->theta1;
    result.theta2 = resume->theta2;
  } else {
    result.theta1 = init_params(tag_generator_shape(env, game, 1, config.n1, config.hidden), 1,
                                derive_seed(config.seed, 1));
    result.theta2 = init_params(tag_generator_shape(env, game, 2, config.n2, config.hidden), 2,
                                derive_seed(config.seed, 2));
  }
  const int start = resume ? resume->iteration : 0;

  const int d = data.size();
  const int batch = (config.batch_size <= 0 || config.batch_size >= d) ? d : config.batch_size;

  for (int iter = start; iter < config.iterations; ++iter) {
    std::vector<int> entries(batch);
    for (int b = 0; b < batch; ++b) entries[b] = (iter * batch + b) % d;

    std::vector<SampleGrads> slots(batch);
    parallel_for(batch, config.threads, [&](int b) {
      const auto& [x1, x2] = data.states[entries[b]];
      SampleGrads& slot = slots[b];
      try {
        const ReferenceBundle xi1 = generate(result.theta1, x1, x2);
        const ReferenceBundle xi2 = generate(result.theta2, x1, x2);
        const LiftedSolution sol = game.forward(xi1, xi2, x1, x2);
        auto [gx1, gx2] = game.own_gradients(sol);
        auto [p1, pg1] = game.penalty_terms(sol, 1);
        auto [p2, pg2] = game.penalty_terms(sol, 2);
        (void)p1;
        (void)p2;
        for (size_t i = 0; i < gx1.size(); ++i) gx1[i] += pg1[i];
        for (size_t j = 0; j < gx2.size(); ++j) gx2[j] += pg2[j];
        slot.g1 = generate_vjp(result.theta1, x1, x2, gx1);
        slot.g2 = generate_vjp(result.theta2, x1, x2, gx2);
        slot.loss1 = sol.loss1;
        slot.loss2 = sol.loss2;
        slot.ok = true;
      } catch (const DegenerateError&) {
        slot.degenerate = true;
      }
    });

    GeneratorParams acc1 = init_params(result.theta1.shape, 1, 0);
    GeneratorParams acc2 = init_params(result.theta2.shape, 2, 0);
    for (auto& p : {&acc1, &acc2}) {
      for (size_t l = 0; l < p->weights.size(); ++l) {
        p->weights[l].setZero();
        p->biases[l].setZero();
      }
    }
    double loss_sum = 0.0;
    double loss2_sum = 0.0;
    int n_ok = 0;
    for (const SampleGrads& slot : slots) {  // fixed-order reduction
      if (slot.degenerate) {
        ++result.degenerate_skips;
        continue;
      }
      if (!slot.ok) continue;
      acc1.axpy(1.0, slot.g1);
      acc2.axpy(1.0, slot.g2);
      loss_sum += slot.loss1;
      loss2_sum += slot.loss2;
      ++n_ok;
    }
    if (n_ok == 0) throw ConvergenceError("train_offline: all batch samples degenerate", 0.0);
    const double inv = 1.0 / n_ok;
    for (auto& p : {&acc1, &acc2}) {
      for (size_t l = 0; l < p->weights.size(); ++l) {
        p->weights[l] *= inv;
        p->biases[l] *= inv;
      }
    }

    const double mean_loss = loss_sum * inv;
    result.loss_trace.push_back(mean_loss);
    result.loss2_trace.push_back(loss2_sum * inv);
    result.grad_norm1.push_back(std::sqrt(acc1.squared_norm()));
    result.grad_norm2.push_back(std::sqrt(acc2.squared_norm()));

    if (!std::isfinite(mean_loss)) {
      if (!config.checkpoint_dir.empty()) {
        save_checkpoint({result.theta1, result.theta2, iter, ""},
                        config.checkpoint_dir + "/abort_checkpoint.json");
      }
      std::ostringstream msg;
      msg << "train_offline: non-finite loss at iteration " << iter;
      throw ConvergenceError(msg.str(), mean_loss);
    }

    if (log) {
      json rec{{"iteration", iter},
               {"mean_loss1", mean_loss},
               {"grad_norm1", result.grad_norm1.back()},
               {"grad_norm2", result.grad_norm2.back()},
               {"skipped", result.degenerate_skips}};
      (*log) << rec.dump() << "\n";
    }

    // Both updates use the pre-update parameters.
    result.theta1.axpy(-config.rate1, acc1);
    result.theta2.axpy(-config.rate2, acc2);

    if (config.checkpoint_every > 0 && !config.checkpoint_dir.empty() &&
        (iter + 1) % config.checkpoint_every == 0) {
      save_checkpoint({result.theta1, result.theta2, iter + 1, ""},
                      config.checkpoint_dir + "/checkpoint_" + std::to_string(iter + 1) + ".json");
    }
  }
  return result;
}

SelfPlayResult self_play_learn(const TrainConfig& config, const TagEnvSpec& env,
                               const LiftedGame& game, std::ostream* log) {
  config.validate();
  Rng init_rng(derive_seed(config.seed, 7));
  auto [s1, s2] = sample_initial_state(env, init_rng);
  Vec x1 = s1.vec();
  Vec x2 = s2.vec();

  SelfPlayResult result;
  result.theta1 = init_params(tag_generator_shape(env, game, 1, config.n1, config.hidden), 1,
                              derive_seed(config.seed, 1));
  result.theta2 = init_params(tag_generator_shape(env, game, 2, config.n2, config.hidden), 2,
                              derive_seed(config.seed, 2));
  Rng exec_rng1(derive_seed(config.seed, 11));
  Rng exec_rng2(derive_seed(config.seed, 12));

  const TrajLayout layout = env.layout();
  const HalfspaceSet arena = polygon_halfspaces(env.arena_vertices);
  const HalfspaceSet speed = inscribed_norm_polytope(env.speed_sides, env.v_max);

  double forward_ms_total = 0.0;
  LiftedSolution sol;
  for (int turn = 0; turn < config.turns; ++turn) {
    const auto t0 = std::chrono::steady_clock::now();
    const ReferenceBundle xi1 = generate(result.theta1, x1, x2);
    const ReferenceBundle xi2 = generate(result.theta2, x1, x2);
    sol = game.forward(xi1, xi2, x1, x2);
    const auto t1 = std::chrono::steady_clock::now();
    forward_ms_total += std::chrono::duration<double, std::milli>(t1 - t0).count();

    double gn1 = 0.0, gn2 = 0.0;
    try {
      auto [gx1, gx2] = game.own_gradients(sol);
      auto [p1v, pg1] = game.penalty_terms(sol, 1);
      auto [p2v, pg2] = game.penalty_terms(sol, 2);
      (void)p1v;
      (void)p2v;
      for (size_t i = 0; i < gx1.size(); ++i) gx1[i] += pg1[i];
      for (size_t j = 0; j < gx2.size(); ++j) gx2[j] += pg2[j];
      GeneratorParams g1 = generate_vjp(result.theta1, x1, x2, gx1);
      GeneratorParams g2 = generate_vjp(result.theta2, x1, x2, gx2);
      gn1 = std::sqrt(g1.squared_norm());
      gn2 = std::sqrt(g2.squared_norm());
      result.theta1.axpy(-config.rate1, g1);
      result.theta2.axpy(-config.rate2, g2);
    } catch (const DegenerateError&) {
      // Leave the parameters untouched for this turn.
    }
    result.grad_norm1.push_back(gn1);
    result.grad_norm2.push_back(gn2);

    // Each player samples a candidate from its own mixing weights with its
    // private stream, then both execute for the replanning interval.
    const int c1 = sample_categorical(sol.mix.q1, exec_rng1);
    const int c2 = sample_categorical(sol.mix.q2, exec_rng2);
    const Trajectory plan1{layout, sol.tau1(c1)};
    const Trajectory plan2{layout, sol.tau2(c2)};

    PlayerState p1 = PlayerState::from_vec(x1);
    PlayerState p2 = PlayerState::from_vec(x2);
    double dist = 0.0, effort = 0.0;
    for (int k = 0; k < config.replan_interval; ++k) {
      const Eigen::Vector2d u1 = plan1.control(k);
      const Eigen::Vector2d u2 = plan2.control(k);
      dist += (p1.position - p2.position).squaredNorm();
      effort += u1.squaredNorm() - u2.squaredNorm();
      p1 = step(p1, u1, env.dt);
      p2 = step(p2, u2, env.dt);
      if (!arena.contains(p1.position, 1e-6) || !arena.contains(p2.position, 1e-6) ||
          !speed.contains(p1.velocity, 1e-6) || !speed.contains(p2.velocity, 1e-6)) {
        ++result.infeasible_turns;
      }
    }
    x1 = p1.vec();
    x2 = p2.vec();
    const double value = (dist + env.control_weight * effort) / config.replan_interval;
    result.value_trace.push_back(value);

    const int w = std::min<int>(config.window, static_cast<int>(result.value_trace.size()));
    std::vector<double> window_vals(result.value_trace.end() - w, result.value_trace.end());
    const MeanSem ms = mean_sem(window_vals);
    result.window_mean.push_back(ms.mean);
    result.window_sem.push_back(ms.sem);

    if (log) {
      json rec{{"turn", turn},           {"value", value},
               {"window_mean", ms.mean}, {"window_sem", ms.sem},
               {"grad_norm1", gn1},      {"grad_norm2", gn2}};
      (*log) << rec.dump() << "\n";
    }
    if (config.stop_grad_tol > 0 && gn1 < config.stop_grad_tol && gn2 < config.stop_grad_tol) break;
  }
  result.mean_forward_ms = forward_ms_total / std::max<size_t>(1, result.value_trace.size());
  return result;
}

}  // namespace liftgame
