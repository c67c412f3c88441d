#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"
#include "tflab/dynamics.hpp"
#include "tflab/error.hpp"
#include "tflab/metrics.hpp"

#include <cmath>

using namespace tflab;
using testing_support::gaussian;

namespace {

LayerWeights identity_output(const Matrix& f) {
  const Eigen::Index d = f.rows();
  LayerWeights w;
  w.heads.push_back({Matrix::Identity(d, d), Matrix::Identity(d, d), f});
  w.output = Matrix::Identity(d, d);
  return w;
}

// Weighted per-direction loop over the eigensystem, using the oracle statistics.
oracle::Stats baseline_by_loop(const Matrix& before, const Matrix& after, const Matrix& f) {
  Eigen::EigenSolver<Matrix> es(f);
  const Eigen::Index d = f.rows();
  oracle::Stats total;
  for (Eigen::Index k = 0; k < d; ++k) {
    const Complex lam = es.eigenvalues()[k];
    if (lam.imag() < -1e-12) continue;
    Matrix basis;
    double weight = 1.0 / static_cast<double>(d);
    if (std::abs(lam.imag()) <= 1e-12) {
      basis = es.eigenvectors().col(k).real();
    } else {
      basis.resize(d, 2);
      basis << es.eigenvectors().col(k).real(), es.eigenvectors().col(k).imag();
      weight *= 2;
    }
    const oracle::Stats s = oracle::termwise_stats(before, after, basis);
    total.psi += weight * s.psi;
    total.rho += weight * s.rho;
    total.gamma += weight * s.gamma;
  }
  return total;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("identity layer: no increment, no strict increase") {
  const Matrix x = random_tokens(4, 10, 1);
  const auto spec = classify(make_layer_matrix(Vector{{3.0, 2.0, 1.0, 0.5}}.asDiagonal()));
  const LayerRecord r = psi_rho_gamma(x, x, spec);
  CHECK(r.psi == 0.0);
  CHECK(r.rho == 0.0);
  const oracle::Stats s = oracle::termwise_stats(x, x, spec.basis.columns());
  CHECK(r.gamma == doctest::Approx(s.gamma).epsilon(1e-14));
  CHECK(r.variant == Variant::Real);
}

TEST_CASE("perfect alignment gives gamma 1") {
  const auto spec = classify(make_layer_matrix(Vector{{3.0, 2.0, 1.0}}.asDiagonal()));
  Matrix after(3, 4);
  after << 1, -1, 1, -1, 0, 0, 0, 0, 0, 0, 0, 0;
  CHECK(psi_rho_gamma(random_tokens(3, 4, 2), after, spec).gamma == 1.0);
}

TEST_CASE("statistics match the termwise oracle") {
  Matrix before(3, 4), after(3, 4);
  before << 0.6, 0, 1, 0.3, 0.8, 0.6, 0, 0.4, 0, 0.8, 0, 0.866;
  after << 0.8, 0.1, 0.9, 0.2, 0.6, 0.7, 0.1, 0.5, 0, 0.7, 0.4, 0.84;
  before.colwise().normalize();
  after.colwise().normalize();
  const LayerMatrix l = make_layer_matrix(Vector{{2.0, 1.0, 0.5}}.asDiagonal());
  const LayerRecord r = psi_rho_gamma(before, after, classify(l));
  const oracle::Stats s = oracle::termwise_stats(before, after, testing_support::unit(3, 0));
  CHECK(r.psi == doctest::Approx(s.psi).epsilon(1e-14));
  CHECK(r.rho == doctest::Approx(s.rho));
  CHECK(r.gamma == doctest::Approx(s.gamma).epsilon(1e-14));

  const MeanRecord m = mean_over_eigendirections(before, after, l);
  const oracle::Stats b = baseline_by_loop(before, after, l.f);
  CHECK(m.psi_mean == doctest::Approx(b.psi).epsilon(1e-12));
  CHECK(m.rho_mean == doctest::Approx(b.rho));
  CHECK(m.gamma_mean == doctest::Approx(b.gamma).epsilon(1e-12));
}

TEST_CASE("complex variant projects onto the conjugate plane") {
  const Matrix q = random_orthogonal(4, 3);
  Matrix b = Matrix::Zero(4, 4);
  b.topLeftCorner(2, 2) << 1.2, -0.5, 0.5, 1.2;
  b(2, 2) = 0.4;
  b(3, 3) = -0.3;
  const LayerMatrix l = make_layer_matrix(q * b * q.transpose());
  const auto spec = classify(l);
  const Matrix before = random_tokens(4, 12, 5), after = random_tokens(4, 12, 6);
  const LayerRecord r = psi_rho_gamma(before, after, spec);
  CHECK(r.variant == Variant::Complex);
  const oracle::Stats s = oracle::termwise_stats(before, after, q.leftCols(2));
  CHECK(r.psi == doctest::Approx(s.psi).epsilon(1e-12));
  CHECK(r.rho == doctest::Approx(s.rho));
  CHECK(r.gamma == doctest::Approx(s.gamma).epsilon(1e-12));
}

TEST_CASE("baselines on random layers match the per-direction loop") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix f = gaussian(4, 4, seed);
    const LayerMatrix l = make_layer_matrix(f);
    const Matrix before = random_tokens(4, 9, seed + 1), after = random_tokens(4, 9, seed + 2);
    const MeanRecord m = mean_over_eigendirections(before, after, l);
    const oracle::Stats b = baseline_by_loop(before, after, f);
    CHECK(m.psi_mean == doctest::Approx(b.psi).epsilon(1e-10));
    CHECK(m.rho_mean == doctest::Approx(b.rho).epsilon(1e-12));
    CHECK(m.gamma_mean == doctest::Approx(b.gamma).epsilon(1e-10));
  }
}

TEST_CASE("baseline degenerate cases") {
  Matrix x1(1, 3), y1(1, 3);
  x1 << 1, -1, 1;
  y1 << -1, 1, 1;
  const LayerMatrix one = make_layer_matrix(Matrix::Constant(1, 1, 2.0));
  const MeanRecord m1 = mean_over_eigendirections(x1, y1, one);
  const LayerRecord r1 = psi_rho_gamma(x1, y1, classify(one));
  CHECK(m1.gamma_mean == r1.gamma);
  CHECK(m1.psi_mean == r1.psi);

  const Matrix before = random_tokens(3, 5, 7), after = random_tokens(3, 5, 8);
  const MeanRecord mi = mean_over_eigendirections(before, after, make_layer_matrix(2.0 * Matrix::Identity(3, 3)));
  CHECK(mi.gamma_mean == doctest::Approx(after.cwiseAbs().mean()).epsilon(1e-14));
}

TEST_CASE("increment antisymmetry and sign invariance") {
  const auto spec = classify(make_layer_matrix(gaussian(5, 5, 3)));
  const Matrix a = random_tokens(5, 11, 1), b = random_tokens(5, 11, 2);
  CHECK(std::abs(psi_rho_gamma(a, b, spec).psi + psi_rho_gamma(b, a, spec).psi) <= 1e-12);
  CHECK(psi_rho_gamma(a, b, spec).gamma == doctest::Approx(psi_rho_gamma(-a, -b, spec).gamma).epsilon(1e-15));
  const Vector v1 = spec.basis.columns().col(0);
  const double g1 = direction_stats(a, b, v1.normalized()).gamma;
  const double g2 = direction_stats(a, b, -v1.normalized()).gamma;
  CHECK(g1 == doctest::Approx(g2).epsilon(1e-15));
}

TEST_CASE("two-token single-layer sweep by hand") {
  const ModelWeights m = synthesize_random(3, 1, 1, 4, 1.0);
  SweepConfig cfg;
  cfg.ensemble_size = 2;
  cfg.seed = 9;
  const MetricSeries s = layer_sweep(m, cfg);
  REQUIRE(s.records.size() == 1);
  const Matrix x0 = random_tokens(3, 2, mix_seed(9, 0));
  const Matrix x1 = oracle::multihead_step(x0, m.layers[0], 1.0, Mask::Full, true);
  const LayerMatrix l = assemble_layer_matrix(m.layers[0]);
  const oracle::Stats want = oracle::termwise_stats(x0, x1, classify(l).basis.columns());
  CHECK(s.records[0].psi == doctest::Approx(want.psi).epsilon(1e-12));
  CHECK(s.records[0].rho == doctest::Approx(want.rho));
  CHECK(s.records[0].gamma == doctest::Approx(want.gamma).epsilon(1e-12));
  const oracle::Stats base = baseline_by_loop(x0, x1, l.f);
  CHECK(s.records[0].gamma_mean == doctest::Approx(base.gamma).epsilon(1e-10));
}

TEST_CASE("shared symmetric Case 1 model aligns tokens with v1") {
  const ModelWeights m = replicate_layer(identity_output(assemble_layer_matrix(
                                             synthesize_symmetric(6, {4, 0.5, 0.3, -0.2, 0.1, -0.4}, 2, 0.3))
                                             .f),
                                         12);
  SweepConfig cfg;
  cfg.ensemble_size = 256;
  cfg.t_extra = 48;
  const MetricSeries s = layer_sweep(m, cfg);
  CHECK(s.records.size() == 60);
  CHECK(s.records.back().gamma >= 0.999);
  for (const auto& r : s.records) {
    CHECK(r.rho >= 0.0);
    CHECK(r.rho <= 1.0);
    CHECK(r.gamma_mean <= 1.0);
  }
  CHECK(s.records[5].gamma >= s.records[0].gamma);
}

TEST_CASE("sweeps do not depend on the worker count") {
  const ModelWeights m = synthesize_random(8, 2, 3, 1, 1.0);
  SweepConfig cfg;
  cfg.ensemble_size = 301;
  cfg.sequence_length = 16;
  const MetricSeries a = layer_sweep(m, cfg);
  cfg.workers = 4;
  const MetricSeries b = layer_sweep(m, cfg);
  for (std::size_t t = 0; t < a.records.size(); ++t) {
    CHECK(a.records[t].psi == b.records[t].psi);
    CHECK(a.records[t].gamma_mean == b.records[t].gamma_mean);
    CHECK(a.records[t].psi_std == b.records[t].psi_std);
  }
  const auto ca = cumulative_alignment(m, cfg);
  cfg.workers = 1;
  const auto cb = cumulative_alignment(m, cfg);
  for (std::size_t t = 0; t < ca.size(); ++t) CHECK(ca[t].gamma_cum == cb[t].gamma_cum);
}

TEST_CASE("sequence sizes") {
  CHECK(sequence_sizes(10, 4) == std::vector<Eigen::Index>{4, 4, 2});
  CHECK(sequence_sizes(9, 4) == std::vector<Eigen::Index>{4, 5});
  CHECK(sequence_sizes(3, 64) == std::vector<Eigen::Index>{3});
}

TEST_CASE("cumulative alignment") {
  SweepConfig cfg;
  cfg.ensemble_size = 64;
  const ModelWeights one = synthesize_random(5, 1, 1, 3, 1.0);
  CHECK(cumulative_alignment(one, cfg)[0].gamma_cum == doctest::Approx(layer_sweep(one, cfg).records[0].gamma).epsilon(1e-14));

  const ModelWeights shared =
      replicate_layer(synthesize_symmetric(5, {3, 1, 0.5, -0.5, -2}, 1), 4);
  const auto cum = cumulative_alignment(shared, cfg);
  const auto sweep = layer_sweep(shared, cfg);
  for (std::size_t t = 0; t < cum.size(); ++t)
    CHECK(cum[t].gamma_cum == doctest::Approx(sweep.records[t].gamma).epsilon(1e-8));

  const ModelWeights m = synthesize_random(4, 2, 3, 5, 1.0);
  cfg.ensemble_size = 3;
  const auto got = cumulative_alignment(m, cfg);
  Matrix x = random_tokens(4, 3, mix_seed(cfg.seed, 0));
  Matrix prod = Matrix::Identity(4, 4);
  for (int t = 0; t < 3; ++t) {
    x = oracle::multihead_step(x, m.layers[t], 1.0, Mask::Full, true);
    prod = oracle::padded_layer_matrix(m.layers[t]) * prod;
    const auto spec = classify(make_layer_matrix(prod));
    const oracle::Stats s = oracle::termwise_stats(x, x, spec.basis.columns());
    CHECK(got[t].gamma_cum == doctest::Approx(s.gamma).epsilon(1e-10));
  }
}

TEST_CASE("sweep validation") {
  SweepConfig cfg;
  cfg.ensemble_size = 1;
  CHECK_THROWS_AS(layer_sweep(synthesize_random(4, 1, 1, 1, 1.0), cfg), Error);
  cfg.ensemble_size = 8;
  cfg.t_extra = 2;
  CHECK_THROWS_AS(layer_sweep(synthesize_random(4, 1, 2, 1, 1.0), cfg), Error);
}

}
