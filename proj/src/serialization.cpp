#include "liftgame/serialization.hpp"

#include <fstream>

namespace liftgame {

using nlohmann::json;

namespace {

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

json solution_to_json(const LiftedSolution& sol) {
  json j;
  j["x1"] = vec_to_json(sol.x1);
  j["x2"] = vec_to_json(sol.x2);
  json refs1 = json::array(), refs2 = json::array();
  for (const Vec& r : sol.xi1.refs) refs1.push_back(vec_to_json(r));
  for (const Vec& r : sol.xi2.refs) refs2.push_back(vec_to_json(r));
  j["references1"] = std::move(refs1);
  j["references2"] = std::move(refs2);
  json taus1 = json::array(), taus2 = json::array();
  for (const auto& c : sol.candidates1) taus1.push_back(vec_to_json(c.tau));
  for (const auto& c : sol.candidates2) taus2.push_back(vec_to_json(c.tau));
  j["trajectories1"] = std::move(taus1);
  j["trajectories2"] = std::move(taus2);
  j["cost_matrix_a"] = mat_to_json(sol.costs.a);
  j["cost_matrix_b"] = mat_to_json(sol.costs.b);
  j["mix1"] = vec_to_json(sol.mix.q1);
  j["mix2"] = vec_to_json(sol.mix.q2);
  j["loss1"] = sol.loss1;
  j["loss2"] = sol.loss2;
  return j;
}

void write_solution_json(const LiftedSolution& sol, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_solution_json: cannot open " + path);
  out << solution_to_json(sol).dump() << "\n";
}

}  // namespace liftgame
