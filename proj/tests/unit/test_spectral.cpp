#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"
#include "tflab/spectral.hpp"

#include <algorithm>
#include <cmath>

using namespace tflab;
using testing_support::gaussian;

namespace {

// V diag(values) V^-1 with prescribed unit eigenvector columns.
Matrix with_eigenpairs(const Matrix& v, const Vector& values) {
  return v * values.asDiagonal() * v.inverse();
}

LayerWeights identity_output_layer(const Matrix& f) {
  LayerWeights w;
  const Eigen::Index d = f.rows();
  w.heads.push_back({Matrix::Identity(d, d), Matrix::Identity(d, d), f});
  w.output = Matrix::Identity(d, d);
  return w;
}

Matrix complex_dominant(double re, double im, const std::vector<double>& rest, std::uint64_t seed) {
  const Eigen::Index d = 2 + static_cast<Eigen::Index>(rest.size());
  Matrix b = Matrix::Zero(d, d);
  b.topLeftCorner(2, 2) << re, -im, im, re;
  for (std::size_t i = 0; i < rest.size(); ++i) b(2 + i, 2 + i) = rest[i];
  const Matrix q = random_orthogonal(d, seed);
  return q * b * q.transpose();
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("nearly collinear leading eigenvectors flag a de facto Case 3") {
  const double c = 0.9799;
  Matrix v = Matrix::Identity(5, 5);
  v.col(1) << c, std::sqrt(1 - c * c), 0, 0, 0;
  const Matrix q = random_orthogonal(5, 3);
  const Matrix f = with_eigenpairs(q * v, Vector{{3.8624, 3.7738, 1.0, 0.2, -0.7}});
  const SpectralClassification s = classify(make_layer_matrix(f));
  CHECK(s.label == CaseLabel::Case1);
  CHECK(s.near_degenerate);
  CHECK(s.corr_v1_v2 == doctest::Approx(c).epsilon(1e-8));
  CHECK(s.gap == doctest::Approx(3.8624 - 3.7738).epsilon(1e-8));
  CHECK(s.basis.rank() == 1);
}

TEST_CASE("complex dominant pair is Case 2 with an invariant plane") {
  const Matrix f = complex_dominant(1.5489, 0.0598, {1.1, 0.3, -0.9}, 5);
  const LayerMatrix l = make_layer_matrix(f);
  const SpectralClassification s = classify(l);
  CHECK(s.label == CaseLabel::Case2);
  CHECK(std::abs(s.lambda1 - Complex(1.5489, 0.0598)) < 1e-10);
  CHECK(s.basis.rank() == 2);
  CHECK(s.gap == doctest::Approx(1.5489 - 1.1));
  const Matrix& q = s.basis.orthonormal();
  for (int c = 0; c < 2; ++c) {
    const Vector fp = f * q.col(c);
    CHECK((fp - q * (q.transpose() * fp)).norm() <= 1e-8 * fp.norm());
  }
}

TEST_CASE("diag(3,2,1) is a clean Case 1") {
  const SpectralClassification s = classify(make_layer_matrix(Vector{{3.0, 2.0, 1.0}}.asDiagonal()));
  CHECK(s.label == CaseLabel::Case1);
  CHECK(s.gap == doctest::Approx(1.0));
  CHECK_FALSE(s.near_degenerate);
  CHECK(s.basis.rank() == 1);
}

TEST_CASE("tied real leading eigenvalues are Case 3 with a two-column basis") {
  const Matrix q = random_orthogonal(4, 9);
  const Matrix f = q * Vector{{2.0, 2.0, 1.0, -1.0}}.asDiagonal() * q.transpose();
  const SpectralClassification s = classify(make_layer_matrix(f));
  CHECK(s.label == CaseLabel::Case3);
  CHECK(s.near_degenerate);
  CHECK(s.basis.rank() == 2);
}

TEST_CASE("classification is invariant under positive scaling") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Matrix f = gaussian(6, 6, seed);
    const CaseLabel base = classify(make_layer_matrix(f)).label;
    for (double c : {1e-3, 0.5, 7.0, 1e4}) CHECK(classify(make_layer_matrix(c * f)).label == base);
  }
}

TEST_CASE("spectral gap series") {
  const ModelWeights shared = synthesize_random(6, 2, 4, 1, 1.0, true);
  const auto rows = spectral_gap_series(shared, 3);
  for (const auto& r : rows) CHECK(r == rows[0]);

  ModelWeights m = synthesize_random(5, 1, 4, 2, 1.0);
  m.layers[2] = synthesize_symmetric(5, {5, 1, 0.5, -0.5, -1}, 3);
  m.layers[2].index = 2;
  const auto series = spectral_gap_series(m, 5);
  CHECK(series[2][0] - series[2][1] == doctest::Approx(4.0).epsilon(1e-8));

  for (Eigen::Index t = 0; t < 4; ++t) {
    const ComplexVector want = oracle::eigenvalues(oracle::padded_layer_matrix(m.layers[t]));
    std::vector<double> re;
    for (Eigen::Index i = 0; i < want.size(); ++i) re.push_back(want[i].real());
    std::sort(re.rbegin(), re.rend());
    for (std::size_t i = 0; i < re.size(); ++i) CHECK(std::abs(series[t][i] - re[i]) <= 1e-8);
  }
}

TEST_CASE("cumulative products") {
  const ModelWeights m = synthesize_random(5, 1, 3, 6, 1.0);
  const auto cum = cumulative_products(m);
  REQUIRE(cum.size() == 3);
  const Matrix f1 = assemble_layer_matrix(m.layers[0]).f;
  CHECK(bitwise_equal(cum[0].layer.f, f1));
  const Matrix prod = assemble_layer_matrix(m.layers[2]).f * assemble_layer_matrix(m.layers[1]).f * f1;
  CHECK((cum[2].layer.f * std::exp(cum[2].log_scale) - prod).norm() <= 1e-10 * prod.norm());

  const LayerWeights sym = synthesize_symmetric(4, {2, -1.5, 0.5, 0.1}, 1);
  const auto cubes = cumulative_products(replicate_layer(sym, 3));
  const std::vector<double> want{8, 0.125, 0.001, -3.375};
  for (int k = 0; k < 4; ++k)
    CHECK(cubes[2].layer.eigen.values[k].real() == doctest::Approx(want[k]).epsilon(1e-10));
}

TEST_CASE("shared cumulative principal direction equals v1") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const LayerWeights sym = synthesize_symmetric(5, {3, 1, 0.5, -0.5, -2}, seed);
    const Vector v1 = assemble_layer_matrix(sym).eigen.real_vector(0);
    for (const auto& c : cumulative_products(replicate_layer(sym, 6)))
      CHECK(abs_corr(c.layer.eigen.real_vector(0), v1) >= 1 - 1e-8);
  }
}

TEST_CASE("long products are rescaled instead of overflowing") {
  const Matrix q = random_orthogonal(4, 4);
  const Matrix f = q * Vector{{1e8, 3e7, 1e7, 1e6}}.asDiagonal() * q.transpose();
  const auto cum = cumulative_products(replicate_layer(identity_output_layer(f), 48));
  const Vector v1 = make_layer_matrix(f).eigen.real_vector(0);
  CHECK(cum.back().layer.f.allFinite());
  // 1e8^48 overflows a double; the scale carries what the matrix cannot.
  const double total = cum.back().log_scale + std::log(std::abs(cum.back().layer.eigen.values(0)));
  CHECK(total == doctest::Approx(48 * std::log(1e8)).epsilon(1e-10));
  CHECK(cum.back().log_scale > 0);
  CHECK(abs_corr(cum.back().layer.eigen.real_vector(0), v1) >= 1 - 1e-8);
}

}
