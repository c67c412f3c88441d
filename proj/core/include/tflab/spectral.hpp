#pragma once

#include "tflab/numerics.hpp"
#include "tflab/weights.hpp"

#include <string_view>
#include <vector>

namespace tflab {

enum class CaseLabel { Case1, Case2, Case3 };

std::string_view to_string(CaseLabel c);

struct SpectralClassification {
  CaseLabel label;
  Complex lambda1;
  ProjectionBasis basis;
  double gap = 0.0;
  bool near_degenerate = false;
  // |<v1, w>| for the next eigendirection w distinct from v1's conjugate
  // partner: v2 when lambda1 is real, v3 when it opens a conjugate pair.
  double corr_v1_v2 = 0.0;
};

/// Case 1: lambda1 real and Re-gap above relTol*|Re lambda1|. Case 2: lambda1
/// complex, lambda2 its conjugate, and Re lambda1 clear of Re lambda3. Case 3
/// otherwise. The basis is [Re v1] for Case 1, [Re v1, Im v1] for Case 2 and,
/// for Case 3, the real parts spanning the two leading directions.
SpectralClassification classify(const LayerMatrix& l, double rel_tol = 1e-6,
                                double corr_tol = 0.95);

/// Row t holds Re(lambda_1..lambda_k) of layer t.
std::vector<std::vector<double>> spectral_gap_series(const ModelWeights& model, Eigen::Index k);

/// F_t ... F_1 for each t. `layer.f` is the product divided by exp(log_scale);
/// the scale only moves away from zero once entries leave [1e-150, 1e150].
struct CumulativeProduct {
  LayerMatrix layer;
  double log_scale = 0.0;
};

std::vector<CumulativeProduct> cumulative_products(const ModelWeights& model);

}  // namespace tflab
