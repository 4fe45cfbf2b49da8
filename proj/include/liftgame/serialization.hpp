#pragma once

#include <json.hpp>

#include "liftgame/lifted_game.hpp"

namespace liftgame {

// JSON shape: { "x1", "x2", "references{1,2}", "trajectories{1,2}",
//   "cost_matrix_a", "cost_matrix_b", "mix{1,2}", "loss{1,2}" };
// trajectories and references are row-major per-candidate arrays.
nlohmann::json solution_to_json(const LiftedSolution& sol);

void write_solution_json(const LiftedSolution& sol, const std::string& path);

}  // namespace liftgame
