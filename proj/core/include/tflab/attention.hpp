#pragma once

#include "tflab/numerics.hpp"
#include "tflab/weights.hpp"

#include <string_view>

namespace tflab {

enum class Mask { Full, Causal, Uniform };

std::string_view to_string(Mask m);
/// Throws InvalidArgument for anything other than full/causal/uniform.
Mask parse_mask(std::string_view s);

struct AttentionMatrix {
  Matrix entries;  // n x n, row-stochastic
  int head_index = 0;
};

/// Softmax attention for tokens stored as the columns of `x`.
/// Scores are <F_Q x_i, F_K x_j>, divided by sqrt(d_k) when `scaled`. Masked
/// terms are left out of the normalizer, so every row sums to one.
AttentionMatrix attention(const Matrix& x, const HeadWeights& head, Mask mask, bool scaled,
                          int head_index = 0);

/// Same as above with the score matrix already formed (n x n, unscaled).
Matrix softmax_rows(const Matrix& scores, Mask mask);

/// Number of singular values above tol * sigma_max.
int attention_rank(const Matrix& a, double tol = 1e-10);

}  // namespace tflab
