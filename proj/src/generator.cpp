#include "liftgame/generator.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace liftgame {

using nlohmann::json;

std::vector<int> GeneratorShape::layer_dims() const {
  std::vector<int> dims;
  dims.push_back(input_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(output_dim());
  return dims;
}

int GeneratorParams::parameter_count() const {
  int count = 0;
  for (size_t l = 0; l < weights.size(); ++l)
    count += static_cast<int>(weights[l].size() + biases[l].size());
  return count;
}

double GeneratorParams::squared_norm() const {
  double s = 0.0;
  for (size_t l = 0; l < weights.size(); ++l)
    s += weights[l].squaredNorm() + biases[l].squaredNorm();
  return s;
}

void GeneratorParams::axpy(double scale, const GeneratorParams& direction) {
  if (direction.weights.size() != weights.size())
    throw ConfigError("GeneratorParams::axpy: layer count mismatch");
  for (size_t l = 0; l < weights.size(); ++l) {
    weights[l] += scale * direction.weights[l];
    biases[l] += scale * direction.biases[l];
  }
}

GeneratorParams init_params(const GeneratorShape& shape, int player, uint64_t seed) {
  if (shape.input_dim < 1 || shape.ref_dim < 1 || shape.n_refs < 1)
    throw ConfigError("init_params: bad shape");
  for (int h : shape.hidden)
    if (h < 1) throw ConfigError("init_params: zero-width layer");
  if (shape.input_scale.size() != 0 && shape.input_scale.size() != shape.input_dim)
    throw ConfigError("init_params: input_scale dimension mismatch");

  GeneratorParams params;
  params.shape = shape;
  params.player = player;
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  const std::vector<int> dims = shape.layer_dims();
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    Mat w(dims[l + 1], dims[l]);
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c) w(r, c) = u(rng);
    Vec b(dims[l + 1]);
    for (int r = 0; r < b.size(); ++r) b[r] = u(rng);
    params.weights.push_back(std::move(w));
    params.biases.push_back(std::move(b));
  }
  return params;
}

namespace {

Vec normalized_input(const GeneratorParams& params, const Vec& x1, const Vec& x2) {
  Vec z(x1.size() + x2.size());
  z << x1, x2;
  if (z.size() != params.shape.input_dim)
    throw ConfigError("generate: input dimension mismatch");
  if (params.shape.input_scale.size() == z.size())
    z = z.cwiseQuotient(params.shape.input_scale);
  return z;
}

// Forward pass keeping post-activation values for the backward sweep.
std::vector<Vec> activations(const GeneratorParams& params, const Vec& input) {
  const size_t layers = params.weights.size();
  std::vector<Vec> acts(layers + 1);
  acts[0] = input;
  for (size_t l = 0; l < layers; ++l) {
    Vec pre = params.weights[l] * acts[l] + params.biases[l];
    if (l + 1 == layers) {
      acts[l + 1] = params.shape.head_scale * pre.array().tanh();
    } else {
      acts[l + 1] = pre.array().tanh();
    }
  }
  return acts;
}

}  // namespace

ReferenceBundle generate(const GeneratorParams& params, const Vec& x1, const Vec& x2) {
  const Vec z = normalized_input(params, x1, x2);
  const std::vector<Vec> acts = activations(params, z);
  return ReferenceBundle::unflatten(params.player, acts.back(), params.shape.n_refs,
                                    params.shape.ref_dim);
}

GeneratorParams generate_vjp(const GeneratorParams& params, const Vec& x1, const Vec& x2,
                             const std::vector<Vec>& bundle_cotangent) {
  ReferenceBundle cot;
  cot.refs = bundle_cotangent;
  Vec out_cot = cot.flatten();
  if (out_cot.size() != params.shape.output_dim())
    throw ConfigError("generate_vjp: cotangent dimension mismatch");

  const Vec z = normalized_input(params, x1, x2);
  const std::vector<Vec> acts = activations(params, z);
  const size_t layers = params.weights.size();

  GeneratorParams grads;
  grads.shape = params.shape;
  grads.player = params.player;
  grads.weights.resize(layers);
  grads.biases.resize(layers);

  // Output head: y = s*tanh(pre), dy/dpre = s - y^2/s.
  const double s = params.shape.head_scale;
  Vec delta = out_cot.cwiseProduct(
      (Vec::Constant(out_cot.size(), s) - acts[layers].cwiseAbs2() / s));
  for (size_t l = layers; l-- > 0;) {
    grads.weights[l] = delta * acts[l].transpose();
    grads.biases[l] = delta;
    if (l > 0) {
      delta = (params.weights[l].transpose() * delta)
                  .cwiseProduct(Vec::Ones(acts[l].size()) - acts[l].cwiseAbs2());
    }
  }
  return grads;
}

json params_to_json(const GeneratorParams& params) {
  json j;
  j["input_dim"] = params.shape.input_dim;
  j["hidden"] = params.shape.hidden;
  j["n_refs"] = params.shape.n_refs;
  j["ref_dim"] = params.shape.ref_dim;
  j["head_scale"] = params.shape.head_scale;
  j["player"] = params.player;
  j["input_scale"] = std::vector<double>(params.shape.input_scale.data(),
                                         params.shape.input_scale.data() +
                                             params.shape.input_scale.size());
  json layers = json::array();
  for (size_t l = 0; l < params.weights.size(); ++l) {
    json layer;
    layer["rows"] = params.weights[l].rows();
    layer["cols"] = params.weights[l].cols();
    std::vector<double> w;
    w.reserve(params.weights[l].size());
    for (int r = 0; r < params.weights[l].rows(); ++r)
      for (int c = 0; c < params.weights[l].cols(); ++c) w.push_back(params.weights[l](r, c));
    layer["weights"] = w;
    layer["bias"] = std::vector<double>(params.biases[l].data(),
                                        params.biases[l].data() + params.biases[l].size());
    layers.push_back(std::move(layer));
  }
  j["layers"] = std::move(layers);
  return j;
}

GeneratorParams params_from_json(const json& j) {
  GeneratorParams params;
  params.shape.input_dim = j.at("input_dim").get<int>();
  params.shape.hidden = j.at("hidden").get<std::vector<int>>();
  params.shape.n_refs = j.at("n_refs").get<int>();
  params.shape.ref_dim = j.at("ref_dim").get<int>();
  params.shape.head_scale = j.at("head_scale").get<double>();
  params.player = j.at("player").get<int>();
  const auto scale = j.at("input_scale").get<std::vector<double>>();
  params.shape.input_scale = Eigen::Map<const Vec>(scale.data(), scale.size());
  for (const auto& layer : j.at("layers")) {
    const int rows = layer.at("rows").get<int>();
    const int cols = layer.at("cols").get<int>();
    const auto w = layer.at("weights").get<std::vector<double>>();
    const auto b = layer.at("bias").get<std::vector<double>>();
    if (static_cast<int>(w.size()) != rows * cols || static_cast<int>(b.size()) != rows)
      throw ConfigError("params_from_json: corrupt layer");
    Mat wm(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) wm(r, c) = w[r * cols + c];
    params.weights.push_back(std::move(wm));
    params.biases.push_back(Eigen::Map<const Vec>(b.data(), rows));
  }
  return params;
}

void save_params(const GeneratorParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("save_params: cannot open " + path);
  out << params_to_json(params).dump(2) << "\n";
}

GeneratorParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_params: cannot open " + path);
  return params_from_json(json::parse(in));
}

}  // namespace liftgame
