#include "tflab/metrics.hpp"

#include "tflab/dynamics.hpp"
#include "tflab/error.hpp"
#include "tflab/parallel.hpp"
#include "tflab/random.hpp"

#include <cmath>

namespace tflab {

std::string_view to_string(Variant v) { return v == Variant::Real ? "real" : "complex"; }

namespace {

void require_pair(const Matrix& before, const Matrix& after) {
  if (before.rows() != after.rows() || before.cols() != after.cols() || before.cols() == 0) {
    throw Error(ErrorKind::ShapeMismatch, "before/after ensembles differ in shape");
  }
}

Matrix orthonormal_of(const Matrix& cols) { return ProjectionBasis(cols).orthonormal(); }

}  // namespace

DirectionStats direction_stats(const Matrix& before, const Matrix& after, const Matrix& orthonormal) {
  require_pair(before, after);
  const Eigen::Index n = before.cols();
  std::vector<double> inc(static_cast<std::size_t>(n)), out(static_cast<std::size_t>(n));
  DirectionStats s;
  double up = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double c0 = projected_corr(before.col(i), orthonormal);
    const double c1 = projected_corr(after.col(i), orthonormal);
    inc[static_cast<std::size_t>(i)] = c1 - c0;
    out[static_cast<std::size_t>(i)] = c1;
    s.psi += c1 - c0;
    s.gamma += c1;
    if (c1 > c0) up += 1;
  }
  const auto nn = static_cast<double>(n);
  s.psi /= nn;
  s.gamma /= nn;
  s.rho = up / nn;
  double vp = 0, vg = 0;
  for (std::size_t i = 0; i < inc.size(); ++i) {
    vp += (inc[i] - s.psi) * (inc[i] - s.psi);
    vg += (out[i] - s.gamma) * (out[i] - s.gamma);
  }
  s.psi_std = std::sqrt(vp / nn);
  s.gamma_std = std::sqrt(vg / nn);
  return s;
}

LayerRecord psi_rho_gamma(const Matrix& before, const Matrix& after,
                          const SpectralClassification& spec) {
  const DirectionStats s = direction_stats(before, after, spec.basis.orthonormal());
  LayerRecord r;
  r.psi = s.psi;
  r.rho = s.rho;
  r.gamma = s.gamma;
  r.psi_std = s.psi_std;
  r.gamma_std = s.gamma_std;
  r.variant = spec.basis.rank() == 1 ? Variant::Real : Variant::Complex;
  r.label = spec.label;
  r.gap = spec.gap;
  return r;
}

std::vector<WeightedBasis> eigendirection_bases(const EigenSystem& es) {
  const Eigen::Index d = es.size();
  const auto dd = static_cast<double>(d);
  std::vector<WeightedBasis> out;
  for (Eigen::Index k = 0; k < d; ++k) {
    if (es.is_real(k)) {
      out.push_back({orthonormal_of(es.real_vector(k)), 1.0 / dd});
      continue;
    }
    Matrix plane(es.vectors.rows(), 2);
    plane << es.real_vector(k), es.vectors.col(k).imag();
    out.push_back({orthonormal_of(plane), 2.0 / dd});
    // Skip the conjugate partner that follows.
    if (k + 1 < d && std::abs(es.values[k + 1] - std::conj(es.values[k])) <=
                         1e-10 * std::max(1.0, std::abs(es.values[k]))) {
      ++k;
    }
  }
  return out;
}

MeanRecord mean_over_eigendirections(const Matrix& before, const Matrix& after, const LayerMatrix& l) {
  MeanRecord m;
  for (const auto& b : eigendirection_bases(l.eigen)) {
    const DirectionStats s = direction_stats(before, after, b.orthonormal);
    m.psi_mean += b.weight * s.psi;
    m.rho_mean += b.weight * s.rho;
    m.gamma_mean += b.weight * s.gamma;
  }
  return m;
}

std::vector<Eigen::Index> sequence_sizes(Eigen::Index ensemble, Eigen::Index length) {
  if (ensemble < 1 || length < 1) throw Error(ErrorKind::InvalidArgument, "sizes must be positive");
  std::vector<Eigen::Index> sizes;
  for (Eigen::Index at = 0; at < ensemble; at += length) sizes.push_back(std::min(length, ensemble - at));
  if (sizes.size() > 1 && sizes.back() == 1) {
    sizes.pop_back();
    sizes.back() += 1;
  }
  return sizes;
}

namespace {

struct LayerPlan {
  LayerMatrix matrix;
  Matrix primary;  // orthonormal basis for psi/rho/gamma
  std::vector<WeightedBasis> directions;
  SpectralClassification spec;
};

// Per-token values for one layer: primary before/after, weighted baseline sums.
struct TokenColumns {
  std::vector<double> before, after, psi_mean, rho_mean, gamma_mean;

  void resize(std::size_t n) {
    for (auto* v : {&before, &after, &psi_mean, &rho_mean, &gamma_mean}) v->assign(n, 0.0);
  }
};

std::vector<std::size_t> offsets_of(const std::vector<Eigen::Index>& sizes) {
  std::vector<std::size_t> off(sizes.size() + 1, 0);
  for (std::size_t s = 0; s < sizes.size(); ++s) off[s + 1] = off[s] + static_cast<std::size_t>(sizes[s]);
  return off;
}

void validate_sweep(const ModelWeights& model, const SweepConfig& cfg) {
  model.validate();
  if (cfg.ensemble_size < 2) throw Error(ErrorKind::InvalidArgument, "ensemble size must be >= 2");
  if (cfg.sequence_length < 2) throw Error(ErrorKind::InvalidArgument, "sequence length must be >= 2");
  if (cfg.t_extra > 0 && !model.shared) {
    throw Error(ErrorKind::ProlongUnsharedModel, "cannot prolong a model without shared weights");
  }
  StepConfig{cfg.eta, cfg.mask, cfg.scaled, System::MultiHead}.validate();
}

}  // namespace

MetricSeries layer_sweep(const ModelWeights& model, const SweepConfig& cfg) {
  validate_sweep(model, cfg);
  const Eigen::Index steps = model.num_layers() + cfg.t_extra;
  const auto layer_of = [&](Eigen::Index t) {
    return static_cast<std::size_t>(std::min(t, model.num_layers() - 1));
  };

  std::vector<LayerPlan> plans;
  std::vector<UpdateMap> maps;
  for (const auto& layer : model.layers) {
    LayerMatrix lm = assemble_layer_matrix(layer);
    SpectralClassification spec = classify(lm, cfg.rel_tol, cfg.corr_tol);
    Matrix primary = spec.basis.orthonormal();
    std::vector<WeightedBasis> dirs = eigendirection_bases(lm.eigen);
    plans.push_back({std::move(lm), std::move(primary), std::move(dirs), std::move(spec)});
    maps.push_back(UpdateMap::multihead(layer, cfg.mask, cfg.scaled));
  }

  const auto sizes = sequence_sizes(cfg.ensemble_size, cfg.sequence_length);
  const auto offsets = offsets_of(sizes);
  std::vector<TokenColumns> cols(static_cast<std::size_t>(steps));
  for (auto& c : cols) c.resize(static_cast<std::size_t>(cfg.ensemble_size));

  parallel_for(sizes.size(), [&](std::size_t s) {
    Matrix x = random_tokens(model.d, sizes[s], mix_seed(cfg.seed, s));
    for (Eigen::Index t = 0; t < steps; ++t) {
      const LayerPlan& plan = plans[layer_of(t)];
      Matrix next = maps[layer_of(t)].step(x, cfg.eta);
      TokenColumns& c = cols[static_cast<std::size_t>(t)];
      for (Eigen::Index i = 0; i < x.cols(); ++i) {
        const std::size_t at = offsets[s] + static_cast<std::size_t>(i);
        c.before[at] = projected_corr(x.col(i), plan.primary);
        c.after[at] = projected_corr(next.col(i), plan.primary);
        for (const auto& b : plan.directions) {
          const double c0 = projected_corr(x.col(i), b.orthonormal);
          const double c1 = projected_corr(next.col(i), b.orthonormal);
          c.psi_mean[at] += b.weight * (c1 - c0);
          c.rho_mean[at] += c1 > c0 ? b.weight : 0.0;
          c.gamma_mean[at] += b.weight * c1;
        }
      }
      x = std::move(next);
    }
  }, cfg.workers);

  MetricSeries series;
  series.ensemble_size = cfg.ensemble_size;
  const auto n = static_cast<double>(cfg.ensemble_size);
  for (Eigen::Index t = 0; t < steps; ++t) {
    const TokenColumns& c = cols[static_cast<std::size_t>(t)];
    const LayerPlan& plan = plans[layer_of(t)];
    LayerRecord r;
    r.layer = static_cast<int>(t);
    r.variant = plan.spec.basis.rank() == 1 ? Variant::Real : Variant::Complex;
    r.label = plan.spec.label;
    r.gap = plan.spec.gap;
    double up = 0;
    for (std::size_t i = 0; i < c.before.size(); ++i) {
      r.psi += c.after[i] - c.before[i];
      r.gamma += c.after[i];
      if (c.after[i] > c.before[i]) up += 1;
      r.psi_mean += c.psi_mean[i];
      r.rho_mean += c.rho_mean[i];
      r.gamma_mean += c.gamma_mean[i];
    }
    r.psi /= n;
    r.gamma /= n;
    r.rho = up / n;
    r.psi_mean /= n;
    r.rho_mean /= n;
    r.gamma_mean /= n;
    double vp = 0, vg = 0;
    for (std::size_t i = 0; i < c.before.size(); ++i) {
      const double inc = c.after[i] - c.before[i];
      vp += (inc - r.psi) * (inc - r.psi);
      vg += (c.after[i] - r.gamma) * (c.after[i] - r.gamma);
    }
    r.psi_std = std::sqrt(vp / n);
    r.gamma_std = std::sqrt(vg / n);
    series.records.push_back(r);
  }
  return series;
}

std::vector<CumulativeRecord> cumulative_alignment(const ModelWeights& model, const SweepConfig& cfg) {
  validate_sweep(model, cfg);
  if (cfg.t_extra != 0) throw Error(ErrorKind::InvalidArgument, "cumulative alignment uses T layers only");
  const auto products = cumulative_products(model);
  std::vector<Matrix> primary;
  std::vector<std::vector<WeightedBasis>> dirs;
  std::vector<UpdateMap> maps;
  for (std::size_t t = 0; t < products.size(); ++t) {
    primary.push_back(classify(products[t].layer, cfg.rel_tol, cfg.corr_tol).basis.orthonormal());
    dirs.push_back(eigendirection_bases(products[t].layer.eigen));
    maps.push_back(UpdateMap::multihead(model.layers[t], cfg.mask, cfg.scaled));
  }

  const auto sizes = sequence_sizes(cfg.ensemble_size, cfg.sequence_length);
  const auto offsets = offsets_of(sizes);
  const std::size_t T = products.size();
  const auto N = static_cast<std::size_t>(cfg.ensemble_size);
  std::vector<double> g(T * N), gm(T * N, 0.0);

  parallel_for(sizes.size(), [&](std::size_t s) {
    Matrix x = random_tokens(model.d, sizes[s], mix_seed(cfg.seed, s));
    for (std::size_t t = 0; t < T; ++t) {
      x = maps[t].step(x, cfg.eta);
      for (Eigen::Index i = 0; i < x.cols(); ++i) {
        const std::size_t at = t * N + offsets[s] + static_cast<std::size_t>(i);
        g[at] = projected_corr(x.col(i), primary[t]);
        for (const auto& b : dirs[t]) gm[at] += b.weight * projected_corr(x.col(i), b.orthonormal);
      }
    }
  }, cfg.workers);

  std::vector<CumulativeRecord> out;
  for (std::size_t t = 0; t < T; ++t) {
    CumulativeRecord r;
    r.layer = static_cast<int>(t);
    for (std::size_t i = 0; i < N; ++i) {
      r.gamma_cum += g[t * N + i];
      r.gamma_cum_mean += gm[t * N + i];
    }
    r.gamma_cum /= static_cast<double>(N);
    r.gamma_cum_mean /= static_cast<double>(N);
    out.push_back(r);
  }
  return out;
}

}  // namespace tflab
