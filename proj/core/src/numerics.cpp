#include "tflab/numerics.hpp"

#include "tflab/error.hpp"
#include "tflab/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace tflab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::DegenerateBasis: return "DegenerateBasis";
    case ErrorKind::NearZeroNorm: return "NearZeroNorm";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::InvalidSpectrum: return "InvalidSpectrum";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ProlongUnsharedModel: return "ProlongUnsharedModel";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::SingularDenominator: return "SingularDenominator";
    case ErrorKind::EtaOutOfRange: return "EtaOutOfRange";
    case ErrorKind::OrthogonalPair: return "OrthogonalPair";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

bool EigenSystem::is_real(Eigen::Index k, double tol) const {
  return std::abs(values[k].imag()) <= tol * std::max(1.0, std::abs(values[k]));
}

namespace {

// Smallest singular value relative to the largest.
double relative_min_singular(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0.0;
  return s[s.size() - 1] / s[0];
}

void fix_phase(ComplexMatrix& vectors) {
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    auto col = vectors.col(k);
    const double norm = col.norm();
    if (norm > 0.0) col /= norm;
    double best = 0.0;
    for (Eigen::Index i = 0; i < col.size(); ++i) best = std::max(best, std::abs(col[i]));
    // First entry within rounding of the maximum, so near-ties resolve by index.
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col[i]) >= best * (1.0 - 1e-9)) {
        pivot = i;
        break;
      }
    }
    if (best > 0.0) col *= std::conj(col[pivot]) / std::abs(col[pivot]);
    col[pivot] = Complex(col[pivot].real(), 0.0);
  }
}

EigenSystem sorted_system(const ComplexVector& values, const ComplexMatrix& vectors) {
  const auto n = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const Complex& x = values[a];
    const Complex& y = values[b];
    if (x.real() != y.real()) return x.real() > y.real();
    if (std::abs(x.imag()) != std::abs(y.imag())) return std::abs(x.imag()) > std::abs(y.imag());
    return x.imag() > y.imag();
  });
  EigenSystem out;
  out.values.resize(n);
  out.vectors.resize(vectors.rows(), n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = values[order[static_cast<std::size_t>(k)]];
    out.vectors.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
  }
  fix_phase(out.vectors);
  return out;
}

}  // namespace

ProjectionBasis::ProjectionBasis(Matrix columns) : columns_(std::move(columns)) {
  if (columns_.cols() < 1 || columns_.cols() > 2 || columns_.rows() < columns_.cols()) {
    throw Error(ErrorKind::DegenerateBasis, "projection basis must have 1 or 2 columns");
  }
  require_finite(columns_, "projection basis");
  Eigen::JacobiSVD<Matrix> svd(columns_);
  const auto& s = svd.singularValues();
  if (s[s.size() - 1] <= 1e-10) {
    throw Error(ErrorKind::DegenerateBasis,
                "smallest singular value " + std::to_string(s[s.size() - 1]) + " <= 1e-10");
  }
  Eigen::HouseholderQR<Matrix> qr(columns_);
  orthonormal_ = qr.householderQ() * Matrix::Identity(columns_.rows(), columns_.cols());
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, std::string(what) + " has non-finite entries");
  }
}

EigenSystem eig(const Matrix& f) {
  if (f.rows() != f.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "eig needs a square matrix");
  }
  require_finite(f, "eig input");
  if (f.size() == 0) return {};

  const double scale = f.cwiseAbs().maxCoeff();
  const double asym = (f - f.transpose()).cwiseAbs().maxCoeff();
  if (asym <= 1e-13 * scale) {
    const Matrix sym = 0.5 * (f + f.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorKind::NonConvergence, "symmetric eigensolver did not converge");
    }
    return sorted_system(solver.eigenvalues().cast<Complex>(),
                         solver.eigenvectors().cast<Complex>());
  }

  Eigen::EigenSolver<Matrix> solver(f, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NonConvergence, "real Schur reduction did not converge");
  }
  return sorted_system(solver.eigenvalues(), solver.eigenvectors());
}

double abs_corr(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw Error(ErrorKind::ZeroVector, "correlation with a zero vector");
  }
  return std::clamp(std::abs(a.dot(b)) / (na * nb), 0.0, 1.0);
}

Vector project(const Eigen::Ref<const Vector>& x, const ProjectionBasis& p) {
  const Matrix& cols = p.columns();
  const Matrix gram = cols.transpose() * cols;
  Eigen::LDLT<Matrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success || relative_min_singular(gram) <= 1e-20) {
    throw Error(ErrorKind::DegenerateBasis, "P^T P is numerically singular");
  }
  return cols * ldlt.solve(cols.transpose() * x);
}

Vector l2_normalize(const Eigen::Ref<const Vector>& x) {
  const double n = x.norm();
  if (!(n > 1e-14)) {
    throw Error(ErrorKind::NearZeroNorm, "vector norm " + std::to_string(n) + " <= 1e-14");
  }
  return x / n;
}

void normalize_columns(Matrix& x) {
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    const double n = x.col(i).norm();
    if (!(n > 1e-14)) {
      throw Error(ErrorKind::NearZeroNorm, "token " + std::to_string(i) + " annihilated (norm " +
                                               std::to_string(n) + ")");
    }
    x.col(i) /= n;
  }
}

double projected_corr(const Eigen::Ref<const Vector>& x, const Matrix& orthonormal) {
  const double nx = x.norm();
  if (nx == 0.0) throw Error(ErrorKind::ZeroVector, "correlation with a zero vector");
  return std::clamp((orthonormal.transpose() * x).norm() / nx, 0.0, 1.0);
}

Matrix random_orthogonal(Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

double multiset_distance(const ComplexVector& a, const ComplexVector& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::vector<bool> used(static_cast<std::size_t>(b.size()), false);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index pick = -1;
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double dist = std::abs(a[i] - b[j]);
      if (dist < best) {
        best = dist;
        pick = j;
      }
    }
    used[static_cast<std::size_t>(pick)] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace tflab
