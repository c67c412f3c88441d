#pragma once

#include "tflab/numerics.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace tflab {

/// Per-head projections in the column-token convention, each d_k x d.
struct HeadWeights {
  Matrix query;
  Matrix key;
  Matrix value;

  Eigen::Index head_dim() const { return value.rows(); }
  Eigen::Index model_dim() const { return value.cols(); }
};

struct LayerWeights {
  std::vector<HeadWeights> heads;
  Matrix output;  // d x d
  int index = 0;

  Eigen::Index model_dim() const { return output.rows(); }
  Eigen::Index num_heads() const { return static_cast<Eigen::Index>(heads.size()); }
  /// Throws ShapeMismatch unless the heads tile the d rows of the value stack.
  void validate() const;
};

struct ModelWeights {
  std::vector<LayerWeights> layers;
  Eigen::Index d = 0;
  Eigen::Index heads = 0;
  bool shared = false;

  Eigen::Index num_layers() const { return static_cast<Eigen::Index>(layers.size()); }
  void validate() const;
};

/// F = F_O F_V together with its sorted eigensystem.
struct LayerMatrix {
  Matrix f;
  EigenSystem eigen;
  double spectral_gap = 0.0;
};

/// Re(l1) - Re(l2) for real l1, Re(l1) - Re(l3) when l1 opens a conjugate pair.
/// Zero when the spectrum is too short to define it.
double spectral_gap(const EigenSystem& es);

/// d x d matrix whose rows [h*d_k, (h+1)*d_k) hold head h's value block.
Matrix value_stack(const LayerWeights& w);

LayerMatrix make_layer_matrix(Matrix f);
LayerMatrix assemble_layer_matrix(const LayerWeights& w);

/// Single-head layer whose value matrix is Q diag(spectrum) Q^T for a seeded
/// random orthogonal Q, with identity output matrix and query/key drawn with
/// standard deviation `qk_scale / sqrt(d)`.
LayerWeights synthesize_symmetric(Eigen::Index d, const std::vector<double>& spectrum,
                                  std::uint64_t seed, double qk_scale = 1.0);

/// Gaussian weights with standard deviation scale / sqrt(d). A shared model
/// repeats one drawn layer T times.
ModelWeights synthesize_random(Eigen::Index d, Eigen::Index heads, Eigen::Index layers,
                               std::uint64_t seed, double scale, bool shared = false);

/// Model of `layers` copies of one layer (flagged shared).
ModelWeights replicate_layer(const LayerWeights& layer, Eigen::Index layers);

/// Writes the container directory (manifest.txt plus one little-endian binary
/// file per matrix). Shared models store a single layer's files and refer to
/// them from every layer entry.
void save_model(const ModelWeights& w, const std::filesystem::path& dir);
ModelWeights load_model(const std::filesystem::path& dir);

bool bitwise_equal(const Matrix& a, const Matrix& b);
bool bitwise_equal(const ModelWeights& a, const ModelWeights& b);

}  // namespace tflab
