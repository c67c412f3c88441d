#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"
#include "tflab/error.hpp"
#include "tflab/steering.hpp"

#include <cmath>

using namespace tflab;
using testing_support::gaussian;

TEST_SUITE("steering") {

TEST_CASE("zero gain leaves the output matrix bitwise unchanged") {
  const LayerWeights w = testing_support::random_layer(6, 2, 1);
  const Vector wr = gaussian(6, 1, 2).col(0);
  const SteeredLayer s = steer_output_matrix(w, {wr, {}, 0.0});
  CHECK(bitwise_equal(s.layer.output, w.output));
}

TEST_CASE("modified layer matrix equals F plus the rank-1 term") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LayerWeights w = testing_support::random_layer(6, 3, seed);
    const Vector wr = gaussian(6, 1, seed + 50).col(0).normalized();
    const Vector wl = (wr + 0.3 * gaussian(6, 1, seed + 60).col(0)).normalized();
    const double sigma = 3.7;
    const SteeredLayer s = steer_output_matrix(w, {wr, wl, sigma});
    const Matrix want = oracle::padded_layer_matrix(w) + sigma * wr * wl.transpose();
    const Matrix got = assemble_layer_matrix(s.layer).f;
    CHECK((got - want).norm() <= 1e-10 * want.norm());
    CHECK_FALSE(s.report.pseudo_inverse);
  }
}

TEST_CASE("large gain makes w_r the principal direction") {
  const LayerWeights w = testing_support::random_layer(6, 2, 7);
  const double l1 = std::abs(assemble_layer_matrix(w).eigen.values[0]);
  const Vector wr = gaussian(6, 1, 8).col(0).normalized();
  const SteeredLayer s = steer_output_matrix(w, {wr, {}, 50 * l1});
  CHECK(s.report.corr_v1_wr > 0.99);
  const LayerMatrix explicit_sum = make_layer_matrix(oracle::padded_layer_matrix(w) + 50 * l1 * wr * wr.transpose());
  CHECK(s.report.gap == doctest::Approx(explicit_sum.spectral_gap).epsilon(1e-8));
  CHECK(std::abs(s.report.lambda1 - explicit_sum.eigen.values[0]) <= 1e-8 * std::abs(s.report.lambda1));
}

TEST_CASE("alignment is monotone along the gain ladder") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const LayerWeights w = testing_support::random_layer(8, 2, seed);
    const double l1 = std::abs(assemble_layer_matrix(w).eigen.values[0]);
    const Vector wr = gaussian(8, 1, seed + 3).col(0);
    double last = 0;
    for (double f : {2.0, 5.0, 10.0, 50.0, 100.0}) {
      const double c = steer_output_matrix(w, {wr, {}, f * l1}).report.corr_v1_wr;
      CHECK(c >= last - 1e-12);
      last = c;
    }
  }
}

TEST_CASE("eigenpair steering moves exactly one eigenvalue") {
  const LayerWeights w = testing_support::random_layer(6, 2, 11);
  const EigenSystem before = assemble_layer_matrix(w).eigen;
  for (Eigen::Index j = 0; j < 6; ++j) {
    if (!before.is_real(j)) continue;
    const SteeringSpec spec = eigenpair_steering(w, j, 2.5);
    const EigenSystem after = steer_output_matrix(w, spec).report.modified.eigen;
    ComplexVector want = before.values;
    want[j] += 2.5;
    CHECK(oracle::match_distance(after.values, want) <= 1e-8 * std::max(1.0, want.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("orthogonal pair is rejected") {
  const LayerWeights w = testing_support::random_layer(4, 1, 1);
  try {
    steer_output_matrix(w, {testing_support::unit(4, 0), testing_support::unit(4, 1), 1.0});
    FAIL("expected OrthogonalPair");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OrthogonalPair);
  }
}

TEST_CASE("singular value stack falls back to the pseudo-inverse") {
  LayerWeights w = testing_support::random_layer(4, 2, 3);
  w.heads[1].value.setZero();
  const Vector wr = gaussian(4, 1, 1).col(0);
  const SteeredLayer s = steer_output_matrix(w, {wr, {}, 2.0});
  CHECK(s.report.pseudo_inverse);
  CHECK_FALSE(s.report.warning.empty());
  CHECK(s.layer.output.allFinite());
}

TEST_CASE("only the last output matrix changes") {
  const ModelWeights m = synthesize_random(6, 2, 4, 5, 1.0, true);
  SteeringReport rep;
  const ModelWeights s = steer_model(m, {gaussian(6, 1, 1).col(0), {}, 10.0}, &rep);
  CHECK_FALSE(s.shared);
  for (Eigen::Index t = 0; t < 4; ++t) {
    for (std::size_t h = 0; h < 2; ++h) {
      CHECK(bitwise_equal(s.layers[t].heads[h].query, m.layers[t].heads[h].query));
      CHECK(bitwise_equal(s.layers[t].heads[h].value, m.layers[t].heads[h].value));
    }
    if (t < 3) CHECK(bitwise_equal(s.layers[t].output, m.layers[t].output));
  }
  CHECK_FALSE(bitwise_equal(s.layers[3].output, m.layers[3].output));
}

TEST_CASE("steering toward v1 does not hurt alignment; mild gain changes little") {
  const ModelWeights m = synthesize_random(8, 2, 3, 2, 1.0);
  const LayerMatrix last = assemble_layer_matrix(m.layers.back());
  VerifyConfig cfg;
  cfg.ensemble_size = 200;
  if (last.eigen.is_real(0)) {
    const double l1 = std::abs(last.eigen.values[0]);
    const AlignmentReport r = steer_and_verify(m, {last.eigen.real_vector(0), {}, 5 * l1}, cfg);
    CHECK(r.gamma_mod >= r.gamma_unmodified);
  }
  const AlignmentReport mild = steer_and_verify(m, {gaussian(8, 1, 4).col(0), {}, 1e-3}, cfg);
  CHECK(std::abs(mild.gamma_mod - mild.gamma_unmodified) <= 0.05);
}

}
