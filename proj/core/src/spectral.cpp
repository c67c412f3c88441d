#include "tflab/spectral.hpp"

#include "tflab/error.hpp"

#include <cmath>
#include <string>

namespace tflab {

std::string_view to_string(CaseLabel c) {
  switch (c) {
    case CaseLabel::Case1: return "Case1";
    case CaseLabel::Case2: return "Case2";
    case CaseLabel::Case3: return "Case3";
  }
  return "Case3";
}

namespace {

double complex_corr(const ComplexMatrix& v, Eigen::Index a, Eigen::Index b) {
  const double na = v.col(a).norm();
  const double nb = v.col(b).norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::min(1.0, std::abs(v.col(a).dot(v.col(b))) / (na * nb));
}

ProjectionBasis basis_or_first(Matrix cols, const Vector& first) {
  try {
    return ProjectionBasis(std::move(cols));
  } catch (const Error&) {
    return ProjectionBasis(Matrix(first));
  }
}

}  // namespace

SpectralClassification classify(const LayerMatrix& l, double rel_tol, double corr_tol) {
  const EigenSystem& es = l.eigen;
  const Eigen::Index d = es.size();
  if (d == 0) throw Error(ErrorKind::InvalidArgument, "empty eigensystem");

  const Complex l1 = es.values[0];
  const double scale = std::abs(l1.real());
  const bool real1 = es.is_real(0);
  const Vector re1 = es.real_vector(0);
  Matrix pair(d, 2);

  CaseLabel label = CaseLabel::Case3;
  if (real1) {
    if (d == 1 || l1.real() - es.values[1].real() > rel_tol * scale) label = CaseLabel::Case1;
  } else if (d >= 2 && std::abs(es.values[1] - std::conj(l1)) <= 1e-10 * std::max(1.0, std::abs(l1))) {
    if (d == 2 || l1.real() - es.values[2].real() > rel_tol * scale) label = CaseLabel::Case2;
  }

  const Eigen::Index other = real1 ? 1 : 2;
  const double corr = other < d ? complex_corr(es.vectors, 0, other) : 0.0;
  const double gap = spectral_gap(es);

  bool near = label == CaseLabel::Case3 || gap <= rel_tol * scale;
  if (real1 && d >= 2 && es.is_real(1) && corr > corr_tol) near = true;

  Matrix cols;
  if (label == CaseLabel::Case1 || d == 1) {
    cols = re1;
  } else if (!real1) {
    pair << re1, es.vectors.col(0).imag();
    cols = pair;
  } else {
    pair << re1, es.real_vector(1);
    cols = pair;
  }

  return SpectralClassification{label, l1, basis_or_first(std::move(cols), re1), gap, near, corr};
}

std::vector<std::vector<double>> spectral_gap_series(const ModelWeights& model, Eigen::Index k) {
  if (k < 1 || k > model.d) {
    throw Error(ErrorKind::InvalidArgument, "k must lie in [1, d]");
  }
  std::vector<std::vector<double>> rows;
  rows.reserve(model.layers.size());
  for (const auto& layer : model.layers) {
    const LayerMatrix lm = assemble_layer_matrix(layer);
    std::vector<double> row(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) row[static_cast<std::size_t>(j)] = lm.eigen.values[j].real();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<CumulativeProduct> cumulative_products(const ModelWeights& model) {
  if (model.layers.empty()) throw Error(ErrorKind::InvalidArgument, "model has no layers");
  std::vector<CumulativeProduct> out;
  out.reserve(model.layers.size());
  Matrix acc;
  double log_scale = 0.0;
  for (std::size_t t = 0; t < model.layers.size(); ++t) {
    const Matrix f = assemble_layer_matrix(model.layers[t]).f;
    acc = t == 0 ? f : Matrix(f * acc);
    if (!acc.allFinite()) {
      throw Error(ErrorKind::Overflow, "cumulative product overflowed at layer " + std::to_string(t));
    }
    const double top = acc.cwiseAbs().maxCoeff();
    if (top > 1e150 || (top > 0.0 && top < 1e-150)) {
      acc /= top;
      log_scale += std::log(top);
    }
    out.push_back({make_layer_matrix(acc), log_scale});
  }
  return out;
}

}  // namespace tflab
