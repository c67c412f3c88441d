#pragma once

#include "tflab/dynamics.hpp"
#include "tflab/numerics.hpp"
#include "tflab/weights.hpp"

#include <string>
#include <vector>

namespace tflab {

/// max_i |(I - x_i x_i^T) y_i| for the drive y of `map`.
double residual_at(const Matrix& x, const UpdateMap& map);

struct EigenClass {
  int label = 0;  // 1 radial, 2 along other eigenvectors, 3 inter-token
  Complex value;
  Eigen::Index multiplicity = 0;
  bool extrinsic = false;
};

/// Closed-form Jacobian eigenvalues at the consensus x_i = v_k (k is 0-based)
/// of symmetric F. Throws SingularDenominator if |1 + eta*lambda_k| < 1e-12.
std::vector<EigenClass> consensus_jacobian_eigs(const Matrix& f, Eigen::Index k, double eta,
                                                Eigen::Index n);

/// Repeats each class value by its multiplicity.
ComplexVector expand_classes(const std::vector<EigenClass>& classes, bool intrinsic_only = true);

/// Central differences of the full update map in stacked coordinates (nd x nd).
Matrix numerical_jacobian(const Matrix& x, const UpdateMap& map, double eta, double h = 1e-6);

/// Orthonormal basis (nd x n(d-1)) of the tangent space of the sphere product at x.
Matrix tangent_basis(const Matrix& x);

/// B^T J B with J differenced along the retracted tangent directions.
Matrix intrinsic_jacobian(const Matrix& x, const UpdateMap& map, double eta, double h = 1e-6);

struct BipartitePattern {
  Eigen::Index k = 0;   // eigenvector index, 0-based
  Eigen::Index n1 = 0;  // tokens at +v_k
  Eigen::Index n2 = 0;  // tokens at -v_k

  Eigen::Index n() const { return n1 + n2; }
  double nu() const { return static_cast<double>(n1 - n2) / static_cast<double>(n()); }
};

struct BipartiteConstants {
  double alpha1 = 1, alpha2 = 1, beta1 = 0, beta2 = 0, gamma1 = 0, gamma2 = 0;
};

/// First n1 columns v_k, remaining n2 columns -v_k.
Matrix bipartite_state(const Vector& vk, const BipartitePattern& p);

BipartiteConstants bipartite_constants(const HeadWeights& w, const Vector& vk,
                                       const BipartitePattern& p, bool scaled = false);

enum class EquilibriumClass { Consensus, Bipartite, Polygonal, Clustering };

std::string to_string(EquilibriumClass c);

struct BipartiteCoefficients {
  Eigen::Index j = 0;
  double a = 0, b = 0, c = 0, d = 0;
  Complex mu_plus, mu_minus;
};

struct EquilibriumReport {
  EquilibriumClass cls = EquilibriumClass::Consensus;
  Eigen::Index k = 0;
  BipartitePattern pattern;
  std::vector<EigenClass> classes;
  ComplexVector closed_form;  // intrinsic part, expanded
  ComplexVector oracle;       // spectrum of the finite-difference intrinsic Jacobian
  double oracle_distance = 0.0;
  bool stable = false;
  std::string reason;
  std::vector<double> eta_bounds;
  std::vector<BipartiteCoefficients> coefficients;
  BipartiteConstants constants;
};

/// Consensus at eigenvector k of symmetric F for the Oja system; when `map`
/// is given its intrinsic Jacobian at the consensus is used as the oracle.
EquilibriumReport consensus_stability(const Matrix& f, Eigen::Index k, double eta, Eigen::Index n,
                                      const UpdateMap* map = nullptr);

/// Bipartite equilibrium +-v_k of the unscaled single-head system with value
/// matrix f_v. Throws EtaOutOfRange unless eta < min(1/lambda_1, 1/|lambda_d|).
EquilibriumReport bipartite_stability(const Matrix& f_v, const HeadWeights& w,
                                      const BipartitePattern& p, double eta,
                                      bool with_oracle = true);

/// 1 - eta*nu*lambda_k + eta*lambda_1.
double oja_bipartite_instability_certificate(const Matrix& f, const BipartitePattern& p,
                                             double eta);

/// -(1/(2n^2)) s^T F s with s the token sum.
double lyapunov_W(const Matrix& x, const Matrix& f);

/// Antipodal pairs {u, -u} for each column u of `directions`.
Matrix polygonal_state(const Matrix& directions);

struct ClusteringVerdict {
  bool holds = false;
  double pointwise_residual = 0.0;
  double min_singular = 0.0;
  double scale = 0.0;
  int clusters = 0;
  int attention_rank = 0;
};

/// x_i = theta_i F_V sum_j A_ij x_j and singularity of
/// I - (Theta (x) I)(A (x) I)(I (x) F_V), with A the head's attention at x.
ClusteringVerdict verify_clustering(const Matrix& x, const std::vector<double>& thetas,
                                    const HeadWeights& w, double tol, Mask mask = Mask::Full,
                                    bool scaled = false);

}  // namespace tflab
