#pragma once

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "liftgame/bimatrix.hpp"
#include "liftgame/tag_env.hpp"
#include "liftgame/traj_opt.hpp"
#include "liftgame/util.hpp"

namespace liftgame {

// Joint cost structure f_1, f_2 over flattened trajectory pairs.
class CostModel {
 public:
  virtual ~CostModel() = default;
  virtual double cost(int player, const Vec& tau1, const Vec& tau2) const = 0;
  // Gradients of cost(player, .) w.r.t. tau1 and tau2.
  virtual void gradient(int player, const Vec& tau1, const Vec& tau2, Vec& g_tau1,
                        Vec& g_tau2) const = 0;
};

class TagCostModel : public CostModel {
 public:
  explicit TagCostModel(TagEnvSpec spec) : spec_(std::move(spec)) {}
  double cost(int player, const Vec& tau1, const Vec& tau2) const override;
  void gradient(int player, const Vec& tau1, const Vec& tau2, Vec& g_tau1,
                Vec& g_tau2) const override;
  const TagEnvSpec& spec() const { return spec_; }

 private:
  TagEnvSpec spec_;
};

// Collection of trajectory references for one player.
struct ReferenceBundle {
  int player = 1;  // 1 or 2
  std::vector<Vec> refs;

  int count() const { return static_cast<int>(refs.size()); }
  Vec flatten() const;
  static ReferenceBundle unflatten(int player, const Vec& flat, int n_refs, int ref_dim);
};

struct LiftedSolution {
  ReferenceBundle xi1, xi2;
  Vec x1, x2;
  std::vector<QpSolution> candidates1, candidates2;
  bimatrix::CostMatrixPair costs;   // A_ij = f1(tau1^i, tau2^j), B_ij = f2
  bimatrix::BimatrixSolution mix;
  double loss1 = 0.0;  // q1' A q2
  double loss2 = 0.0;  // q1' B q2

  const Vec& tau1(int i) const { return candidates1[i].tau; }
  const Vec& tau2(int j) const { return candidates2[j].tau; }
};

// Per-candidate cotangents on both players' reference bundles.
struct BundleGradient {
  std::vector<Vec> xi1;
  std::vector<Vec> xi2;
};

enum class StickyMode { kNone, kHinge, kDual };
enum class RefMode { kControl, kGoal };

struct LiftedGameConfig {
  StickyMode penalty = StickyMode::kDual;
  double penalty_weight = 1e-2;
  int entering_label = 0;
  double shift_margin = 1.0;
  int threads = 1;
  double ref_init_scale = 1.0;  // random-initialization spread, fraction of the box
};

struct GradientPlayConfig {
  int steps = 400;
  double rate1 = 0.25;
  double rate2 = 0.25;
  double stop_grad_tol = 1e-6;
};

struct GradientPlayResult {
  ReferenceBundle xi1, xi2;
  std::vector<double> value_trace;  // L1 per step
  bool converged = false;
  int steps_taken = 0;
  double grad_norm1 = 0.0, grad_norm2 = 0.0;
  LiftedSolution last;
};

// References -> candidate trajectories -> cost matrices -> mixing weights ->
// expected losses, with an exact reverse pass through every stage. Both
// players may share one optimizer when their constraint structure matches.
class LiftedGame {
 public:
  using RefSampler = std::function<Vec(Rng&)>;

  LiftedGame(std::shared_ptr<const TrajOptimizer> opt1, std::shared_ptr<const TrajOptimizer> opt2,
             std::shared_ptr<const CostModel> costs, LiftedGameConfig config = {});

  LiftedSolution forward(const ReferenceBundle& xi1, const ReferenceBundle& xi2, const Vec& x1,
                         const Vec& x2, const LiftedSolution* warm = nullptr) const;

  // Gradient of L_which w.r.t. both reference bundles, chaining the direct
  // cost-matrix path and the indirect path through the mixing weights.
  BundleGradient backward(const LiftedSolution& sol, int which) const;

  // dL_player/dxi_player alone; cheaper than backward when the opponent's
  // side is not needed.
  std::vector<Vec> own_bundle_gradient(const LiftedSolution& sol, int player) const;

  // (dL1/dxi1, dL2/dxi2) in one pass; the simultaneous-play directions.
  std::pair<std::vector<Vec>, std::vector<Vec>> own_gradients(const LiftedSolution& sol) const;

  // Weighted sticky-penalty value and per-candidate gradients for one player.
  std::pair<double, std::vector<Vec>> penalty_terms(const LiftedSolution& sol, int player) const;

  GradientPlayResult gradient_play(const Vec& x1, const Vec& x2, int n1, int n2,
                                   const GradientPlayConfig& cfg, Rng& rng) const;
  GradientPlayResult gradient_play(ReferenceBundle xi1, ReferenceBundle xi2, const Vec& x1,
                                   const Vec& x2, const GradientPlayConfig& cfg) const;

  const TrajOptimizer& optimizer(int player) const { return player == 1 ? *opt1_ : *opt2_; }
  const CostModel& costs() const { return *costs_; }
  const LiftedGameConfig& config() const { return config_; }
  void set_ref_samplers(RefSampler s1, RefSampler s2);
  ReferenceBundle sample_bundle(int player, int n, Rng& rng) const;

 private:
  std::shared_ptr<const TrajOptimizer> opt1_, opt2_;
  std::shared_ptr<const CostModel> costs_;
  LiftedGameConfig config_;
  RefSampler sampler1_, sampler2_;
};

// Assembled tag game: shared optimizer, tag costs, and the mode-appropriate
// reference sampler (uniform control signals, or uniform arena goals).
LiftedGame make_tag_game(const TagEnvSpec& spec, RefMode mode, LiftedGameConfig config = {},
                         QpSettings qp = {});

}  // namespace liftgame
