#pragma once

#include "tflab/attention.hpp"
#include "tflab/numerics.hpp"
#include "tflab/weights.hpp"

#include <cstdint>
#include <string>

namespace tflab {

/// w_r and w_l are normalized on use; w_l defaults to w_r when left empty.
struct SteeringSpec {
  Vector w_r;
  Vector w_l;
  double sigma = 0.0;
};

struct SteeringReport {
  LayerMatrix modified;
  Complex lambda1;
  double gap = 0.0;
  double corr_v1_wr = 0.0;
  bool pseudo_inverse = false;
  std::string warning;
};

struct SteeredLayer {
  LayerWeights layer;
  SteeringReport report;
};

/// F_O + sigma w_r w_l^T F_V^{-1}. F_V^{-1} is replaced by the pseudo-inverse
/// once cond(F_V) exceeds 1e10. Throws OrthogonalPair when sigma != 0 and
/// |<w_l, w_r>| < 1e-10. sigma == 0 leaves F_O bitwise unchanged.
SteeredLayer steer_output_matrix(const LayerWeights& w, const SteeringSpec& spec);

/// Spec that moves only eigenvalue j (0-based, must be real) of the layer
/// matrix by `shift`: w_r = v_j, w_l = u_j / |u_j| for the left eigenvector
/// u_j, sigma = shift / <w_l, w_r>.
SteeringSpec eigenpair_steering(const LayerWeights& w, Eigen::Index j, double shift);

/// Copy of the model whose last layer carries the steered output matrix.
ModelWeights steer_model(const ModelWeights& model, const SteeringSpec& spec, SteeringReport* report);

struct AlignmentReport {
  SteeringReport steering;
  double gamma_mod = 0.0;         // mean |corr(x_i(T), v1 of the steered layer)|
  double gamma_wr = 0.0;          // mean |corr(x_i(T), w_r)|
  double gamma_unmodified = 0.0;  // same run without steering, against its own v1
  double gamma_unmodified_wr = 0.0;
};

struct VerifyConfig {
  Eigen::Index ensemble_size = 1000;
  std::uint64_t seed = 0;
  Mask mask = Mask::Full;
  double eta = 1.0;
  bool scaled = true;
  Eigen::Index sequence_length = 64;
  int workers = 1;
};

AlignmentReport steer_and_verify(const ModelWeights& model, const SteeringSpec& spec,
                                 const VerifyConfig& cfg);

}  // namespace tflab
