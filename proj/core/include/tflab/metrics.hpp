#pragma once

#include "tflab/attention.hpp"
#include "tflab/numerics.hpp"
#include "tflab/spectral.hpp"
#include "tflab/weights.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace tflab {

enum class Variant { Real, Complex };

std::string_view to_string(Variant v);

struct DirectionStats {
  double psi = 0, rho = 0, gamma = 0, psi_std = 0, gamma_std = 0;
};

/// Per-token correlations with span(Q) (orthonormal columns) before and after
/// a layer, reduced to psi (mean increment), rho (fraction strictly
/// increasing) and gamma (mean correlation after).
DirectionStats direction_stats(const Matrix& before, const Matrix& after, const Matrix& orthonormal);

struct LayerRecord {
  int layer = 0;
  double psi = 0, psi_mean = 0, rho = 0, rho_mean = 0, gamma = 0, gamma_mean = 0;
  double psi_std = 0, gamma_std = 0;
  Variant variant = Variant::Real;
  CaseLabel label = CaseLabel::Case1;
  double gap = 0;
};

/// Real variant against v1 when spec's basis has one column, complex variant
/// (projection onto the two-column basis) otherwise. Mean fields are left 0.
LayerRecord psi_rho_gamma(const Matrix& before, const Matrix& after,
                          const SpectralClassification& spec);

struct MeanRecord {
  double psi_mean = 0, rho_mean = 0, gamma_mean = 0;
};

/// Average over all eigendirections of L: weight 1/d per real eigenvector and
/// 2/d per conjugate pair, whose plane [Re v, Im v] is handled as one basis.
MeanRecord mean_over_eigendirections(const Matrix& before, const Matrix& after, const LayerMatrix& l);

/// Bases and weights used by mean_over_eigendirections.
struct WeightedBasis {
  Matrix orthonormal;
  double weight = 0;
};
std::vector<WeightedBasis> eigendirection_bases(const EigenSystem& es);

struct SweepConfig {
  Eigen::Index ensemble_size = 10000;
  std::uint64_t seed = 0;
  Mask mask = Mask::Full;
  double eta = 1.0;
  bool scaled = true;
  // Tokens are simulated as independent sequences of this many tokens.
  Eigen::Index sequence_length = 64;
  Eigen::Index t_extra = 0;
  double rel_tol = 1e-6;
  double corr_tol = 0.95;
  int workers = 1;
};

struct MetricSeries {
  std::vector<LayerRecord> records;
  Eigen::Index ensemble_size = 0;
};

/// Splits [0, ensemble) into sequences of `length` tokens; a trailing
/// single-token remainder joins the previous sequence.
std::vector<Eigen::Index> sequence_sizes(Eigen::Index ensemble, Eigen::Index length);

/// Runs the multihead dynamics over every layer (plus t_extra repeats of a
/// shared layer) and records psi/rho/gamma with their baselines per layer.
MetricSeries layer_sweep(const ModelWeights& model, const SweepConfig& cfg);

struct CumulativeRecord {
  int layer = 0;
  double gamma_cum = 0, gamma_cum_mean = 0;
};

/// |corr(x_i(t+1), v1 of F_t...F_1)| averaged over the ensemble, with the
/// all-eigendirection baseline.
std::vector<CumulativeRecord> cumulative_alignment(const ModelWeights& model, const SweepConfig& cfg);

}  // namespace tflab
