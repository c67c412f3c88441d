#include "tflab/attention.hpp"

#include "tflab/error.hpp"

#include <cmath>
#include <string>

namespace tflab {

std::string_view to_string(Mask m) {
  switch (m) {
    case Mask::Full: return "full";
    case Mask::Causal: return "causal";
    case Mask::Uniform: return "uniform";
  }
  return "full";
}

Mask parse_mask(std::string_view s) {
  if (s == "full") return Mask::Full;
  if (s == "causal") return Mask::Causal;
  if (s == "uniform") return Mask::Uniform;
  throw Error(ErrorKind::InvalidArgument, "unknown mask '" + std::string(s) + "'");
}

Matrix softmax_rows(const Matrix& scores, Mask mask) {
  const Eigen::Index n = scores.rows();
  Matrix a = Matrix::Zero(n, n);
  if (mask == Mask::Uniform) {
    a.setConstant(1.0 / static_cast<double>(n));
    return a;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index last = mask == Mask::Causal ? i + 1 : n;
    const double top = scores.row(i).head(last).maxCoeff();
    double total = 0.0;
    for (Eigen::Index j = 0; j < last; ++j) {
      a(i, j) = std::exp(scores(i, j) - top);
      total += a(i, j);
    }
    a.row(i).head(last) /= total;
  }
  return a;
}

AttentionMatrix attention(const Matrix& x, const HeadWeights& head, Mask mask, bool scaled,
                          int head_index) {
  if (x.cols() == 0) throw Error(ErrorKind::ShapeMismatch, "empty token ensemble");
  if (head.query.cols() != x.rows() || head.key.cols() != x.rows() ||
      head.query.rows() != head.key.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "query/key blocks do not match token dimension");
  }
  AttentionMatrix out;
  out.head_index = head_index;
  if (mask == Mask::Uniform) {
    out.entries = softmax_rows(Matrix(x.cols(), x.cols()), mask);
    return out;
  }
  Matrix scores = (head.query * x).transpose() * (head.key * x);
  if (scaled) scores /= std::sqrt(static_cast<double>(head.query.rows()));
  out.entries = softmax_rows(scores, mask);
  return out;
}

int attention_rank(const Matrix& a, double tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > tol * s[0]) ++rank;
  return rank;
}

}  // namespace tflab
