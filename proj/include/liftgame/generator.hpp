#pragma once

#include <Eigen/Core>
#include <json.hpp>

#include <string>
#include <vector>

#include "liftgame/lifted_game.hpp"
#include "liftgame/util.hpp"

namespace liftgame {

// Multilayer perceptron mapping the joint initial state to one player's
// reference bundle: tanh hidden layers, then a tanh output head scaled to
// the reference bounds.
struct GeneratorShape {
  int input_dim = 8;
  std::vector<int> hidden = {64, 64};
  int n_refs = 2;
  int ref_dim = 0;
  double head_scale = 1.0;  // output in [-head_scale, head_scale]
  Vec input_scale;          // elementwise normalization divisors

  int output_dim() const { return n_refs * ref_dim; }
  std::vector<int> layer_dims() const;
};

struct GeneratorParams {
  GeneratorShape shape;
  int player = 1;
  std::vector<Mat> weights;
  std::vector<Vec> biases;

  int parameter_count() const;
  double squared_norm() const;
  void axpy(double scale, const GeneratorParams& direction);  // this += scale * direction
};

// Weights and biases i.i.d. uniform on [-0.1, 0.1], reproducible per seed.
GeneratorParams init_params(const GeneratorShape& shape, int player, uint64_t seed);

ReferenceBundle generate(const GeneratorParams& params, const Vec& x1, const Vec& x2);

// Exact reverse-mode gradient of generate w.r.t. the parameters, seeded by a
// per-candidate cotangent on the bundle. Returned in parameter shape.
GeneratorParams generate_vjp(const GeneratorParams& params, const Vec& x1, const Vec& x2,
                             const std::vector<Vec>& bundle_cotangent);

// JSON checkpoint (shape header + row-major weights); round-trips exactly.
nlohmann::json params_to_json(const GeneratorParams& params);
GeneratorParams params_from_json(const nlohmann::json& j);
void save_params(const GeneratorParams& params, const std::string& path);
GeneratorParams load_params(const std::string& path);

}  // namespace liftgame
