#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "liftgame/experiments.hpp"
#include "liftgame/serialization.hpp"
#include "liftgame/training.hpp"

using namespace liftgame;
using nlohmann::json;

namespace {

int log_level() {
  const char* env = std::getenv("LIFTGAME_LOG");
  if (!env) return 1;
  const std::string v(env);
  if (v == "quiet") return 0;
  if (v == "debug") return 2;
  return 1;
}

void info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[liftgame] " << msg << "\n";
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return json::parse(in);  // parse errors carry line/column diagnostics
}

// Dotted-path override: "train.rate1=0.05" or "solver.penalty=hinge".
void apply_override(json& config, const std::string& entry) {
  const auto eq = entry.find('=');
  if (eq == std::string::npos) throw ConfigError("override must look like key.path=value: " + entry);
  const std::string path = entry.substr(0, eq);
  const std::string value = entry.substr(eq + 1);
  json* node = &config;
  size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw ConfigError("bad override path: " + path);
    if (dot == std::string::npos) {
      try {
        (*node)[key] = json::parse(value);
      } catch (const json::parse_error&) {
        (*node)[key] = value;  // plain string
      }
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

TagEnvSpec env_from_json(const json& j) {
  TagEnvSpec spec;
  if (j.contains("arena_vertices")) {
    spec.arena_vertices.clear();
    for (const auto& v : j.at("arena_vertices"))
      spec.arena_vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
  } else {
    const int sides = j.value("arena_sides", 5);
    const double radius = j.value("arena_circumradius", 1.0);
    spec.arena_vertices = regular_polygon(sides, radius, M_PI / 2.0);
  }
  spec.v_max = j.value("v_max", spec.v_max);
  spec.speed_sides = j.value("speed_sides", spec.speed_sides);
  spec.u_max = j.value("u_max", spec.u_max);
  spec.dt = j.value("dt", spec.dt);
  spec.horizon = j.value("horizon", spec.horizon);
  spec.control_weight = j.value("control_weight", spec.control_weight);
  spec.min_separation = j.value("min_separation", spec.min_separation);
  return spec;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  if (j.contains("env")) cfg.env = env_from_json(j.at("env"));
  cfg.seed = j.value("seed", 0);
  cfg.threads = j.value("threads", 1);
  cfg.paper = j.value("preset", std::string("ci")) == "paper";
  cfg.output_dir = j.value("output_dir", std::string());

  const json solver = j.value("solver", json::object());
  cfg.lifted_candidates = solver.value("candidates", 2);
  cfg.lifted.entering_label = solver.value("entering_label", 0);
  cfg.lifted.shift_margin = solver.value("shift_margin", 1.0);
  cfg.lifted.penalty_weight = solver.value("penalty_weight", 1e-2);
  cfg.lifted.threads = cfg.threads;
  const std::string penalty = solver.value("penalty", std::string("dual"));
  if (penalty == "dual") cfg.lifted.penalty = StickyMode::kDual;
  else if (penalty == "hinge") cfg.lifted.penalty = StickyMode::kHinge;
  else if (penalty == "none") cfg.lifted.penalty = StickyMode::kNone;
  else throw ConfigError("solver.penalty must be dual, hinge, or none");
  cfg.play.steps = solver.value("steps", 400);
  cfg.play.rate1 = solver.value("rate", 0.25);
  cfg.play.rate2 = solver.value("rate", 0.25);
  cfg.play.rate1 = solver.value("rate1", cfg.play.rate1);
  cfg.play.rate2 = solver.value("rate2", cfg.play.rate2);
  cfg.play.stop_grad_tol = solver.value("stop_grad_tol", 1e-6);

  const json qp = j.value("qp", json::object());
  cfg.qp.rho = qp.value("rho", cfg.qp.rho);
  cfg.qp.sigma = qp.value("sigma", cfg.qp.sigma);
  cfg.qp.eps_primal = qp.value("eps_primal", cfg.qp.eps_primal);
  cfg.qp.eps_dual = qp.value("eps_dual", cfg.qp.eps_dual);
  cfg.qp.max_iterations = qp.value("max_iterations", cfg.qp.max_iterations);

  const json train = j.value("train", json::object());
  cfg.train.rate1 = train.value("rate1", cfg.train.rate1);
  cfg.train.rate2 = train.value("rate2", cfg.train.rate2);
  cfg.train.iterations = train.value("iterations", cfg.train.iterations);
  cfg.train.dataset_size = train.value("dataset_size", cfg.train.dataset_size);
  cfg.train.batch_size = train.value("batch_size", cfg.train.batch_size);
  cfg.train.n1 = train.value("n1", cfg.train.n1);
  cfg.train.n2 = train.value("n2", cfg.train.n2);
  cfg.train.hidden = train.value("hidden", cfg.train.hidden);
  cfg.train.penalty_weight = cfg.lifted.penalty_weight;
  cfg.train.checkpoint_every = train.value("checkpoint_every", 0);
  cfg.train.turns = train.value("turns", cfg.train.turns);
  cfg.train.replan_interval = train.value("replan_interval", cfg.train.replan_interval);
  cfg.train.window = train.value("window", cfg.train.window);
  cfg.train.seed = cfg.seed;
  cfg.train.threads = cfg.threads;

  const json trials = j.value("trials", json::object());
  cfg.trials_svl = trials.value("sampled_vs_learned", -1);
  cfg.states_eq = trials.value("equilibrium_convergence", -1);
  cfg.states_open = trials.value("open_loop", -1);
  cfg.states_rh = trials.value("receding_horizon", -1);
  cfg.turns_selfplay = trials.value("selfplay_turns", -1);
  cfg.rh_updates = trials.value("rh_updates", cfg.rh_updates);
  cfg.rh_interval = trials.value("rh_interval", cfg.rh_interval);
  cfg.svl_learn_steps = trials.value("svl_learn_steps", cfg.svl_learn_steps);
  cfg.svl_evader_candidates = trials.value("svl_evader_candidates", cfg.svl_evader_candidates);
  if (trials.contains("svl_sweep")) cfg.svl_sweep = trials.at("svl_sweep").get<std::vector<int>>();
  cfg.toy_starts = trials.value("toy_starts", cfg.toy_starts);
  cfg.toy_step_cap = trials.value("toy_step_cap", cfg.toy_step_cap);
  return cfg;
}

void persist_config(const json& config, const std::string& output_dir) {
  if (output_dir.empty()) return;
  std::filesystem::create_directories(output_dir);
  std::ofstream out(output_dir + "/config.json");
  out << config.dump(2) << "\n";
}

void print_grid(const TournamentGrid& grid, const std::string& title) {
  std::printf("%s (game value f1, mean +/- SEM)\n", title.c_str());
  std::printf("%-10s %-22s %-22s\n", "pursuer", "evader=lifted", "evader=pure");
  for (int pv = 0; pv < 2; ++pv) {
    const MeanSem l = grid.cell[pv][0].stats();
    const MeanSem p = grid.cell[pv][1].stats();
    std::printf("%-10s %8.4f +/- %-8.4f %8.4f +/- %-8.4f\n", TournamentGrid::variant_name(pv),
                l.mean, l.sem, p.mean, p.sem);
  }
}

int run_experiment(const json& raw, const ExperimentConfig& cfg, const std::string& experiment) {
  persist_config(raw, cfg.output_dir);
  const auto t0 = std::chrono::steady_clock::now();
  if (experiment == "toy_interval") {
    const ToyResult result = exp_toy_interval(cfg);
    int low = 0, high = 0, bad = 0, unreg_settled = 0;
    for (const auto& run : result.regularized) {
      if (run.stationary && run.local_equilibrium && run.tau1 < 0) ++low;
      else if (run.stationary && run.local_equilibrium && run.tau1 > 0) ++high;
      else ++bad;
    }
    for (const auto& run : result.unregularized)
      if (run.stationary && run.local_equilibrium) ++unreg_settled;
    std::printf("toy interval game over %zu starts\n", result.regularized.size());
    std::printf("  regularized limits: (-1,-1) x%d, (1,1) x%d, other x%d\n", low, high, bad);
    std::printf("  unregularized runs reaching a local equilibrium: %d\n", unreg_settled);
  } else if (experiment == "sampled_vs_learned") {
    const SampledVsLearnedResult result = exp_sampled_vs_learned(cfg);
    write_sweep_outputs(result, cfg.output_dir);
    std::printf("sampled-vs-learned pursuer (lower value favors the pursuer)\n");
    for (const auto& point : result.baseline) {
      const MeanSem ms = point.stats();
      std::printf("  sampled n1=%-3d value %8.4f +/- %.4f\n", point.n1, ms.mean, ms.sem);
    }
    const MeanSem lm = result.learned.stats();
    std::printf("  learned n1=%-3d value %8.4f +/- %.4f\n", result.learned.n1, lm.mean, lm.sem);
  } else if (experiment == "equilibrium_convergence") {
    const ConvergenceResult result = exp_equilibrium_convergence(cfg);
    write_convergence_outputs(result, cfg.output_dir);
    std::printf("converged game value over %zu states\n", result.pure.size());
    std::printf("  pure   %8.4f +/- %.4f\n", result.pure_value.mean, result.pure_value.sem);
    std::printf("  lifted %8.4f +/- %.4f\n", result.lifted_value.mean, result.lifted_value.sem);
  } else if (experiment == "open_loop_tournament") {
    const TournamentGrid grid = exp_open_loop_tournament(cfg);
    write_grid_outputs(grid, cfg.output_dir, "open_loop");
    print_grid(grid, "open-loop competition");
  } else if (experiment == "receding_horizon_tournament") {
    const RecedingHorizonResult result = exp_receding_horizon_tournament(cfg);
    write_grid_outputs(result.grid, cfg.output_dir, "receding_horizon");
    print_grid(result.grid, "receding-horizon competition");
    std::printf("mean plan latency: %.2f ms\n", result.mean_plan_ms);
  } else if (experiment == "self_play") {
    std::ofstream log;
    if (!cfg.output_dir.empty()) {
      std::filesystem::create_directories(cfg.output_dir);
      log.open(cfg.output_dir + "/self_play_log.jsonl");
    }
    const SelfPlayResult result = exp_self_play(cfg, log.is_open() ? &log : nullptr);
    std::printf("self-play over %zu turns\n", result.value_trace.size());
    std::printf("  final windowed value %8.4f +/- %.4f\n", result.window_mean.back(),
                result.window_sem.back());
    std::printf("  mean forward latency %.2f ms, infeasible steps %d\n", result.mean_forward_ms,
                result.infeasible_turns);
  } else {
    std::cerr << "unknown experiment: " << experiment << "\n"
              << "known: toy_interval sampled_vs_learned equilibrium_convergence "
                 "open_loop_tournament receding_horizon_tournament self_play\n";
    return 2;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  info("experiment finished in " + std::to_string(secs) + " s");
  return 0;
}

int cmd_solve_bimatrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot open " << path << "\n";
    return 2;
  }
  bimatrix::CostMatrixPair pair;
  try {
    pair = bimatrix::read_matrix_pair(in);
  } catch (const std::exception& e) {
    std::cerr << "malformed matrix file: " << e.what() << "\n";
    return 2;
  }
  const bimatrix::BimatrixSolution sol = bimatrix::bmg(pair);
  auto [ok, viol] = bimatrix::verify_equilibrium(pair, sol.q1, sol.q2);
  std::printf("q1:");
  for (int i = 0; i < sol.q1.size(); ++i) std::printf(" %.12g", sol.q1[i]);
  std::printf("\nq2:");
  for (int j = 0; j < sol.q2.size(); ++j) std::printf(" %.12g", sol.q2[j]);
  std::printf("\nverification residual: %.3e (%s)\n", viol, ok ? "equilibrium" : "VIOLATED");
  return ok ? 0 : 1;
}

int cmd_train(const json& raw, const ExperimentConfig& cfg) {
  if (cfg.output_dir.empty()) throw ConfigError("train requires an output directory");
  persist_config(raw, cfg.output_dir);
  const LiftedGame game = make_tag_game(cfg.env, RefMode::kControl, cfg.lifted, cfg.qp);
  std::ofstream log(cfg.output_dir + "/train_log.jsonl");
  TrainConfig train = cfg.train;
  train.checkpoint_dir = cfg.output_dir;
  const TrainResult result = train_offline(train, cfg.env, game, &log);
  save_params(result.theta1, cfg.output_dir + "/theta1.json");
  save_params(result.theta2, cfg.output_dir + "/theta2.json");
  std::printf("trained %d iterations; final mean L1 %.4f; checkpoints in %s\n",
              static_cast<int>(result.loss_trace.size()), result.loss_trace.back(),
              cfg.output_dir.c_str());
  if (result.degenerate_skips > 0)
    info("skipped " + std::to_string(result.degenerate_skips) + " degenerate gradient samples");
  return 0;
}

int cmd_play(const json& raw, const ExperimentConfig& cfg, const std::string& ck1,
             const std::string& ck2) {
  persist_config(raw, cfg.output_dir);
  auto game = std::make_shared<const LiftedGame>(
      make_tag_game(cfg.env, RefMode::kControl, cfg.lifted, cfg.qp));
  const GeneratorParams theta1 = load_params(ck1);
  const GeneratorParams theta2 = load_params(ck2);
  GeneratorPolicy pursuer(game, theta1, theta2, "generator");
  GeneratorPolicy evader(game, theta1, theta2, "generator");
  Rng state_rng(derive_seed(cfg.seed, 1));
  auto [a, b] = sample_initial_state(cfg.env, state_rng);
  Rng rng_p(derive_seed(cfg.seed, 2));
  Rng rng_e(derive_seed(cfg.seed, 3));
  const EpisodeRecord ep = mpgp_simulate(pursuer, evader, a.vec(), b.vec(), cfg.rh_updates,
                                         cfg.rh_interval, cfg.env, rng_p, rng_e);
  std::printf("episode value %.4f over %zu steps; mean plan latency %.2f ms\n", ep.value,
              ep.controls1.size(), ep.mean_plan_ms);
  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    write_episode_json(ep, cfg.output_dir + "/episode.json");
    info("episode written to " + cfg.output_dir + "/episode.json");
  }
  return 0;
}

int cmd_dump_trajectories(const json& raw, const ExperimentConfig& cfg) {
  if (cfg.output_dir.empty()) throw ConfigError("dump-trajectories requires an output directory");
  persist_config(raw, cfg.output_dir);
  const LiftedGame game = make_tag_game(cfg.env, RefMode::kControl, cfg.lifted, cfg.qp);
  Rng rng(derive_seed(cfg.seed, 1));
  auto [a, b] = sample_initial_state(cfg.env, rng);
  const GradientPlayResult played =
      game.gradient_play(a.vec(), b.vec(), cfg.lifted_candidates, cfg.lifted_candidates,
                         cfg.play, rng);
  write_solution_json(played.last, cfg.output_dir + "/solution.json");
  std::printf("lifted solution (value %.4f) written to %s/solution.json\n", played.last.loss1,
              cfg.output_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lifted trajectory games: learned mixed strategies for pursuit-evasion"};
  app.require_subcommand(1);

  std::string config_path, experiment, output_dir, preset;
  uint64_t seed = 0;
  int threads = 0;
  std::vector<std::string> overrides;
  bool seed_set = false, threads_set = false;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON configuration file");
    cmd->add_option("--seed", seed, "master seed")->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--threads", threads, "worker thread cap")
        ->each([&](const std::string&) { threads_set = true; });
    cmd->add_option("--output-dir", output_dir, "directory for results");
    cmd->add_option("--preset", preset, "trial-count preset: paper or ci");
    cmd->add_option("--set", overrides, "dotted-path config overrides (key.path=value)");
  };

  CLI::App* run = app.add_subcommand("run", "run a named experiment");
  add_common(run);
  run->add_option("--experiment", experiment, "experiment name");

  CLI::App* train = app.add_subcommand("train", "train reference generators offline");
  add_common(train);

  CLI::App* play = app.add_subcommand("play", "receding-horizon episode from checkpoints");
  add_common(play);
  std::string ck1, ck2;
  play->add_option("--checkpoint1", ck1, "pursuer generator checkpoint")->required();
  play->add_option("--checkpoint2", ck2, "evader generator checkpoint")->required();

  CLI::App* solve = app.add_subcommand("solve-bimatrix", "solve a matrix-pair game from a file");
  std::string matrix_file;
  solve->add_option("file", matrix_file, "plain-text matrix pair")->required();

  CLI::App* dump = app.add_subcommand("dump-trajectories", "write one lifted solution as JSON");
  add_common(dump);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve_bimatrix(matrix_file);

    json raw = load_config(config_path);
    if (seed_set) raw["seed"] = seed;
    if (threads_set) raw["threads"] = threads;
    if (!output_dir.empty()) raw["output_dir"] = output_dir;
    if (!preset.empty()) raw["preset"] = preset;
    if (!experiment.empty()) raw["experiment"] = experiment;
    for (const std::string& entry : overrides) apply_override(raw, entry);

    const ExperimentConfig cfg = config_from_json(raw);
    if (run->parsed()) {
      const std::string name = raw.value("experiment", std::string());
      if (name.empty()) {
        std::cerr << "no experiment named (use --experiment or config)\n";
        return 2;
      }
      return run_experiment(raw, cfg, name);
    }
    if (train->parsed()) return cmd_train(raw, cfg);
    if (play->parsed()) return cmd_play(raw, cfg, ck1, ck2);
    if (dump->parsed()) return cmd_dump_trajectories(raw, cfg);
  } catch (const json::parse_error& e) {
    std::cerr << "config parse error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
