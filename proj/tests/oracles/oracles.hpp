#pragma once

// Reference implementations used only by the tests. They avoid the library's
// code paths: extended precision, explicit loops, and textbook algorithms.

#include "tflab/attention.hpp"
#include "tflab/numerics.hpp"
#include "tflab/weights.hpp"

#include <complex>
#include <functional>
#include <vector>

namespace oracle {

using tflab::Matrix;
using tflab::Vector;
using ld = long double;
using cld = std::complex<long double>;

// Characteristic polynomial by Faddeev-LeVerrier, roots by Durand-Kerner with
// a Newton polish. Adequate for d <= 8 with well separated spectra.
std::vector<ld> charpoly(const Matrix& f);
std::vector<cld> poly_roots(const std::vector<ld>& monic);
tflab::ComplexVector eigenvalues(const Matrix& f);

ld determinant(const Matrix& f);

// softmax(<Q x_i, K x_j> [/ sqrt(d_k)]) written out term by term.
Matrix attention(const Matrix& x, const Matrix& q, const Matrix& k, tflab::Mask mask, bool scaled);

Matrix oja_step(const Matrix& x, const Matrix& f, double eta);
Matrix single_head_step(const Matrix& x, const tflab::HeadWeights& w, double eta, tflab::Mask mask,
                        bool scaled);
// Sum over heads of F_O * pad(F_V^h) * X * A_h^T, each head padded to d x d.
Matrix multihead_step(const Matrix& x, const tflab::LayerWeights& w, double eta, tflab::Mask mask,
                      bool scaled);
Matrix padded_layer_matrix(const tflab::LayerWeights& w);

using StepFn = std::function<Matrix(const Matrix&)>;

// Jacobian of `step` at a fixed point x restricted to the tangent space of the
// sphere product. Tangent frames come from Householder reflections and
// perturbations are retracted by normalization.
Matrix tangent_jacobian(const Matrix& x, const StepFn& step, double h = 1e-6);

// Per-token |corr| with the span of `basis` (any full-rank columns), in long double.
std::vector<ld> span_corr(const Matrix& x, const Matrix& basis);

struct Stats {
  double psi = 0, rho = 0, gamma = 0;
};
Stats termwise_stats(const Matrix& before, const Matrix& after, const Matrix& basis);

// m-clustering equilibrium of the unscaled single-head map with theta_i = 1:
// tokens sit on m random directions and F_V = X G^+ + (I - G G^+) with
// G = X A(X)^T, so that X = F_V X A^T holds exactly.
struct ClusteringFixture {
  Matrix x;
  tflab::HeadWeights head;
};
ClusteringFixture clustering_fixture(Eigen::Index d, Eigen::Index m, Eigen::Index n, std::uint64_t seed);

// Greedy nearest match between two multisets of the same size.
double match_distance(const tflab::ComplexVector& a, const tflab::ComplexVector& b);

}  // namespace oracle
