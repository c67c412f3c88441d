#pragma once

#include "tflab/attention.hpp"
#include "tflab/numerics.hpp"
#include "tflab/spectral.hpp"
#include "tflab/weights.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace tflab {

// Token ensembles are d x n matrices with one unit-norm token per column.

enum class System { Oja, SingleHead, MultiHead };

std::string_view to_string(System s);
System parse_system(std::string_view s);

struct StepConfig {
  double eta = 1.0;
  Mask mask = Mask::Full;
  bool scaled = true;
  System system = System::MultiHead;

  void validate() const;
};

/// One layer's update x_i -> normalize(x_i + eta * y_i(x)); drive() returns
/// the columns y_i.
class UpdateMap {
 public:
  static UpdateMap oja(Matrix f);
  /// Needs a square value block (d_k = d).
  static UpdateMap single_head(HeadWeights head, Mask mask, bool scaled);
  static UpdateMap multihead(LayerWeights layer, Mask mask, bool scaled);
  /// Picks the constructor for cfg.system; Oja uses the assembled layer matrix.
  static UpdateMap for_layer(const LayerWeights& layer, const StepConfig& cfg);

  Matrix drive(const Matrix& x) const;
  Matrix step(const Matrix& x, double eta) const;
  System system() const { return system_; }
  Eigen::Index dim() const;

 private:
  System system_ = System::Oja;
  Matrix f_;
  LayerWeights layer_;
  Mask mask_ = Mask::Full;
  bool scaled_ = false;
};

Matrix step_oja(const Matrix& x, const Matrix& f, double eta);
Matrix step_single_head(const Matrix& x, const HeadWeights& w, double eta, Mask mask, bool scaled);
Matrix step_multihead(const Matrix& x, const LayerWeights& w, double eta, Mask mask, bool scaled);

struct Trajectory {
  std::vector<Matrix> states;
  StepConfig config;
};

/// Applies layer t at step t, then the shared layer t_extra more times.
/// Throws ProlongUnsharedModel when t_extra > 0 on an unshared model.
Trajectory run(const Matrix& x0, const ModelWeights& model, const StepConfig& cfg,
               Eigen::Index t_extra = 0);

/// Gaussian columns normalized to the unit sphere.
Matrix random_tokens(Eigen::Index d, Eigen::Index n, std::uint64_t seed);

double intertoken_diameter(const Matrix& x);

enum class LimitKind { Consensus, PlanarRotation, Undecided };

std::string_view to_string(LimitKind k);

struct LimitBehavior {
  LimitKind kind = LimitKind::Undecided;
  Vector direction;  // set for Consensus
};

/// Consensus: final diameter below tol_cons, every token within tol_cons of a
/// common direction, and that direction stationary over the last step.
/// PlanarRotation: every final token within tol_plane of span(P) while the mean
/// alignment with Re v1 keeps swinging over the second half of the run.
LimitBehavior detect_limit_behavior(const Trajectory& traj, const SpectralClassification& spec,
                                    double tol_cons = 1e-6, double tol_plane = 1e-3);

}  // namespace tflab
