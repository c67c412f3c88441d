#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>

namespace tflab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Eigenpairs of a real square matrix.
///
/// Values are ordered by descending real part; equal real parts are ordered by
/// descending |Im| and then +Im before -Im, so conjugate pairs sit next to each
/// other. Column k of `vectors` is a unit-norm eigenvector for `values[k]`,
/// rotated so that its largest-magnitude entry is real and positive.
struct EigenSystem {
  ComplexVector values;
  ComplexMatrix vectors;

  Eigen::Index size() const { return values.size(); }
  bool is_real(Eigen::Index k, double tol = 1e-12) const;
  /// Real part of eigenvector k.
  Vector real_vector(Eigen::Index k) const { return vectors.col(k).real(); }
};

/// Real d x r basis (r in {1, 2}) of a subspace used for projected correlations.
class ProjectionBasis {
 public:
  /// Throws DegenerateBasis if the columns are not numerically independent.
  explicit ProjectionBasis(Matrix columns);

  const Matrix& columns() const { return columns_; }
  Eigen::Index rank() const { return columns_.cols(); }
  Eigen::Index dim() const { return columns_.rows(); }
  /// Orthonormal basis of the same span.
  const Matrix& orthonormal() const { return orthonormal_; }

 private:
  Matrix columns_;
  Matrix orthonormal_;
};

/// Throws InvalidArgument when any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);

/// Eigendecomposition of a square matrix; see EigenSystem for the ordering and
/// phase conventions. Exactly symmetric input uses the self-adjoint solver so
/// the eigenvectors come out orthonormal.
EigenSystem eig(const Matrix& f);

/// |<a,b>| / (|a| |b|), clamped to [0, 1].
double abs_corr(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

/// Orthogonal projection of x onto span(P): P (P^T P)^{-1} P^T x.
Vector project(const Eigen::Ref<const Vector>& x, const ProjectionBasis& p);

/// x / |x|; throws NearZeroNorm when |x| <= 1e-14.
Vector l2_normalize(const Eigen::Ref<const Vector>& x);

/// Normalizes every column in place. Throws NearZeroNorm naming the column.
void normalize_columns(Matrix& x);

/// |<x, P x>| / |x||P x| computed through an orthonormal basis Q: |Q^T x| / |x|.
/// Returns 0 when x has no component in the span.
double projected_corr(const Eigen::Ref<const Vector>& x, const Matrix& orthonormal);

/// Haar-distributed random orthogonal matrix (QR of a Gaussian matrix with the
/// sign of R's diagonal folded in).
Matrix random_orthogonal(Eigen::Index d, std::uint64_t seed);

/// Greedy nearest-neighbour matching of two complex multisets. Returns the
/// largest pairing distance, or +inf when the sizes differ.
double multiset_distance(const ComplexVector& a, const ComplexVector& b);

}  // namespace tflab
