#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "liftgame/bimatrix.hpp"
#include "liftgame/experiments.hpp"
#include "liftgame/generator.hpp"
#include "liftgame/lifted_game.hpp"
#include "liftgame/tag_env.hpp"
#include "liftgame/traj_opt.hpp"
#include "liftgame/training.hpp"

namespace py = pybind11;
using namespace liftgame;

namespace {

// Stable handle bundling the tag world, its optimizer, and the lifted game.
struct TagGame {
  TagEnvSpec spec;
  std::shared_ptr<const LiftedGame> game;
  uint64_t rng_seed = 0;

  TagGame(TagEnvSpec s, const std::string& mode, LiftedGameConfig cfg) : spec(std::move(s)) {
    const RefMode ref_mode = mode == "goal" ? RefMode::kGoal : RefMode::kControl;
    game = std::make_shared<const LiftedGame>(make_tag_game(spec, ref_mode, cfg));
  }
};

}  // namespace

PYBIND11_MODULE(_liftgame, m) {
  m.doc() = "Lifted trajectory games: mixed strategies over learned trajectory candidates";

  py::register_exception<InfeasibleError>(m, "InfeasibleError");
  py::register_exception<ConvergenceError>(m, "SolverConvergenceError");
  py::register_exception<DegenerateError>(m, "DegenerateSolutionError");

  // --- bimatrix games -------------------------------------------------------
  py::class_<bimatrix::BimatrixSolution>(m, "BimatrixSolution")
      .def_readonly("p1", &bimatrix::BimatrixSolution::p1)
      .def_readonly("p2", &bimatrix::BimatrixSolution::p2)
      .def_readonly("q1", &bimatrix::BimatrixSolution::q1)
      .def_readonly("q2", &bimatrix::BimatrixSolution::q2)
      .def_readonly("support1", &bimatrix::BimatrixSolution::support1)
      .def_readonly("support2", &bimatrix::BimatrixSolution::support2)
      .def_readonly("strictly_complementary",
                    &bimatrix::BimatrixSolution::strictly_complementary);

  m.def(
      "solve_bimatrix",
      [](const Mat& a, const Mat& b, int entering_label, double margin) {
        return bimatrix::bmg({a, b}, entering_label, margin);
      },
      "Mixed equilibrium of a two-player cost game via Lemke-Howson pivoting", py::arg("a"),
      py::arg("b"), py::arg("entering_label") = 0, py::arg("margin") = 1.0);
  m.def(
      "bimatrix_vjp",
      [](const Mat& a, const Mat& b, const bimatrix::BimatrixSolution& sol, const Vec& q1_cot,
         const Vec& q2_cot) {
        const bimatrix::CostMatrixPair cot = bimatrix::bmg_vjp({a, b}, sol, q1_cot, q2_cot);
        return py::make_tuple(cot.a, cot.b);
      },
      "Pull equilibrium cotangents back onto the cost matrices", py::arg("a"), py::arg("b"),
      py::arg("solution"), py::arg("q1_cot"), py::arg("q2_cot"));
  m.def(
      "verify_equilibrium",
      [](const Mat& a, const Mat& b, const Vec& q1, const Vec& q2, double tol) {
        return bimatrix::verify_equilibrium({a, b}, q1, q2, tol);
      },
      py::arg("a"), py::arg("b"), py::arg("q1"), py::arg("q2"), py::arg("tol") = 1e-9);

  // --- tag environment ------------------------------------------------------
  py::class_<TagEnvSpec>(m, "TagEnvSpec")
      .def(py::init<>())
      .def_readwrite("v_max", &TagEnvSpec::v_max)
      .def_readwrite("u_max", &TagEnvSpec::u_max)
      .def_readwrite("dt", &TagEnvSpec::dt)
      .def_readwrite("horizon", &TagEnvSpec::horizon)
      .def_readwrite("control_weight", &TagEnvSpec::control_weight)
      .def_readwrite("min_separation", &TagEnvSpec::min_separation);

  py::class_<QpSolution>(m, "TrajSolution")
      .def_readonly("tau", &QpSolution::tau)
      .def_readonly("nu", &QpSolution::nu)
      .def_readonly("lam", &QpSolution::lambda)
      .def_readonly("kkt_residual", &QpSolution::kkt_residual)
      .def_readonly("iterations", &QpSolution::iterations);

  py::class_<LiftedSolution>(m, "LiftedSolution")
      .def_property_readonly("trajectories1",
                             [](const LiftedSolution& s) {
                               std::vector<Vec> out;
                               for (const auto& c : s.candidates1) out.push_back(c.tau);
                               return out;
                             })
      .def_property_readonly("trajectories2",
                             [](const LiftedSolution& s) {
                               std::vector<Vec> out;
                               for (const auto& c : s.candidates2) out.push_back(c.tau);
                               return out;
                             })
      .def_property_readonly("cost_matrix_a", [](const LiftedSolution& s) { return s.costs.a; })
      .def_property_readonly("cost_matrix_b", [](const LiftedSolution& s) { return s.costs.b; })
      .def_property_readonly("q1", [](const LiftedSolution& s) { return s.mix.q1; })
      .def_property_readonly("q2", [](const LiftedSolution& s) { return s.mix.q2; })
      .def_readonly("loss1", &LiftedSolution::loss1)
      .def_readonly("loss2", &LiftedSolution::loss2);

  py::class_<TagGame>(m, "TagGame")
      .def(py::init([](const TagEnvSpec& spec, const std::string& mode, double penalty_weight,
                       int entering_label) {
             LiftedGameConfig cfg;
             cfg.penalty_weight = penalty_weight;
             cfg.entering_label = entering_label;
             return TagGame(spec, mode, cfg);
           }),
           py::arg("spec") = TagEnvSpec(), py::arg("mode") = "control",
           py::arg("penalty_weight") = 1e-2, py::arg("entering_label") = 0)
      .def("sample_initial_state",
           [](TagGame& self, uint64_t seed) {
             Rng rng(seed);
             auto [a, b] = sample_initial_state(self.spec, rng);
             return py::make_tuple(a.vec(), b.vec());
           },
           py::arg("seed"))
      .def("solve_trajectory",
           [](const TagGame& self, const Vec& reference, const Vec& x0) {
             return self.game->optimizer(1).solve(reference, x0);
           },
           "Project one reference onto the feasible trajectory set", py::arg("reference"),
           py::arg("x0"))
      .def("trajectory_vjp",
           [](const TagGame& self, const QpSolution& sol, const Vec& cotangent) {
             return self.game->optimizer(1).vjp(sol, cotangent);
           },
           py::arg("solution"), py::arg("cotangent"))
      .def("forward",
           [](const TagGame& self, const std::vector<Vec>& refs1, const std::vector<Vec>& refs2,
              const Vec& x1, const Vec& x2) {
             return self.game->forward({1, refs1}, {2, refs2}, x1, x2);
           },
           "References -> trajectories -> cost matrices -> mixed strategies",
           py::arg("references1"), py::arg("references2"), py::arg("x1"), py::arg("x2"))
      .def("backward",
           [](const TagGame& self, const LiftedSolution& sol, int player) {
             const BundleGradient g = self.game->backward(sol, player);
             return py::make_tuple(g.xi1, g.xi2);
           },
           "Gradient of L_player w.r.t. both reference bundles", py::arg("solution"),
           py::arg("player"))
      .def("gradient_play",
           [](const TagGame& self, const Vec& x1, const Vec& x2, int n1, int n2, int steps,
              double rate, uint64_t seed) {
             GradientPlayConfig cfg;
             cfg.steps = steps;
             cfg.rate1 = cfg.rate2 = rate;
             Rng rng(seed);
             const GradientPlayResult r = self.game->gradient_play(x1, x2, n1, n2, cfg, rng);
             return py::make_tuple(r.last, r.value_trace);
           },
           py::arg("x1"), py::arg("x2"), py::arg("n1"), py::arg("n2"), py::arg("steps") = 400,
           py::arg("rate") = 0.5, py::arg("seed") = 0)
      .def("pursuer_cost", [](const TagGame& self, const Vec& tau1, const Vec& tau2) {
        return self.game->costs().cost(1, tau1, tau2);
      });

  // --- reference generators -------------------------------------------------
  py::class_<GeneratorParams>(m, "GeneratorParams")
      .def_readonly("player", &GeneratorParams::player)
      .def("parameter_count", &GeneratorParams::parameter_count)
      .def("save", &save_params, py::arg("path"));

  m.def("load_generator", &load_params, py::arg("path"));
  m.def(
      "init_generator",
      [](const TagGame& game, int player, int n_refs, const std::vector<int>& hidden,
         uint64_t seed) {
        return init_params(tag_generator_shape(game.spec, *game.game, player, n_refs, hidden),
                           player, seed);
      },
      py::arg("game"), py::arg("player"), py::arg("n_refs") = 2,
      py::arg("hidden") = std::vector<int>{64, 64}, py::arg("seed") = 0);
  m.def(
      "generate_references",
      [](const GeneratorParams& params, const Vec& x1, const Vec& x2) {
        return generate(params, x1, x2).refs;
      },
      py::arg("params"), py::arg("x1"), py::arg("x2"));

  m.def(
      "train_offline",
      [](const TagGame& game, int iterations, int dataset_size, double rate, uint64_t seed,
         int n1, int n2, const std::vector<int>& hidden) {
        TrainConfig cfg;
        cfg.iterations = iterations;
        cfg.dataset_size = dataset_size;
        cfg.rate1 = cfg.rate2 = rate;
        cfg.seed = seed;
        cfg.n1 = n1;
        cfg.n2 = n2;
        cfg.hidden = hidden;
        const TrainResult r = train_offline(cfg, game.spec, *game.game);
        return py::make_tuple(r.theta1, r.theta2, r.loss_trace);
      },
      "Simultaneous gradient descent on both reference generators", py::arg("game"),
      py::arg("iterations") = 100, py::arg("dataset_size") = 16, py::arg("rate") = 1e-2,
      py::arg("seed") = 0, py::arg("n1") = 2, py::arg("n2") = 2,
      py::arg("hidden") = std::vector<int>{64, 64});
}
