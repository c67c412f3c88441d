#include "tflab/steering.hpp"

#include "tflab/dynamics.hpp"
#include "tflab/error.hpp"
#include "tflab/metrics.hpp"
#include "tflab/parallel.hpp"
#include "tflab/random.hpp"
#include "tflab/spectral.hpp"

#include <cmath>
#include <array>
#include <limits>

namespace tflab {

namespace {

Vector unit(const Vector& v, const char* what) {
  if (v.size() == 0 || !(v.norm() > 0.0)) {
    throw Error(ErrorKind::ZeroVector, std::string(what) + " must be a nonzero vector");
  }
  return v / v.norm();
}

double complex_corr(const ComplexVector& v, const Vector& w) {
  return std::min(1.0, std::abs(v.dot(w.cast<Complex>())) / (v.norm() * w.norm()));
}

}  // namespace

SteeredLayer steer_output_matrix(const LayerWeights& w, const SteeringSpec& spec) {
  w.validate();
  const Eigen::Index d = w.model_dim();
  const Vector wr = unit(spec.w_r, "w_r");
  const Vector wl = spec.w_l.size() == 0 ? wr : unit(spec.w_l, "w_l");
  if (wr.size() != d || wl.size() != d) throw Error(ErrorKind::ShapeMismatch, "steering vectors must have length d");
  if (!std::isfinite(spec.sigma)) throw Error(ErrorKind::InvalidArgument, "sigma must be finite");

  SteeredLayer out;
  out.layer = w;
  if (spec.sigma != 0.0) {
    if (std::abs(wl.dot(wr)) < 1e-10) {
      throw Error(ErrorKind::OrthogonalPair, "|<w_l, w_r>| < 1e-10 leaves the spectrum along w_r unchanged");
    }
    const Matrix fv = value_stack(w);
    Eigen::JacobiSVD<Matrix> svd(fv, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    Vector u;  // F_V^{-T} w_l, so that w_l^T F_V^{-1} = u^T
    if (s[s.size() - 1] > 1e-10 * s[0]) {
      u = fv.transpose().colPivHouseholderQr().solve(wl);
    } else {
      out.report.pseudo_inverse = true;
      out.report.warning = "value stack near singular; using the pseudo-inverse";
      Eigen::JacobiSVD<Matrix> svdt(fv.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
      svdt.setThreshold(1e-10);
      u = svdt.solve(wl);
    }
    out.layer.output += spec.sigma * wr * u.transpose();
  }

  out.report.modified = assemble_layer_matrix(out.layer);
  const EigenSystem& es = out.report.modified.eigen;
  out.report.lambda1 = es.values[0];
  out.report.gap = out.report.modified.spectral_gap;
  out.report.corr_v1_wr = complex_corr(es.vectors.col(0), wr);
  return out;
}

SteeringSpec eigenpair_steering(const LayerWeights& w, Eigen::Index j, double shift) {
  const LayerMatrix lm = assemble_layer_matrix(w);
  const EigenSystem& right = lm.eigen;
  if (j < 0 || j >= right.size()) throw Error(ErrorKind::InvalidArgument, "eigen index out of range");
  if (!right.is_real(j, 1e-10)) throw Error(ErrorKind::InvalidArgument, "targeted eigenvalue must be real");
  const EigenSystem left = eig(Matrix(lm.f.transpose()));
  Eigen::Index best = 0;
  double dist = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < left.size(); ++i) {
    const double dd = std::abs(left.values[i] - right.values[j]);
    if (dd < dist) {
      dist = dd;
      best = i;
    }
  }
  SteeringSpec spec;
  spec.w_r = right.real_vector(j).normalized();
  spec.w_l = left.real_vector(best).normalized();
  const double overlap = spec.w_l.dot(spec.w_r);
  if (std::abs(overlap) < 1e-10) {
    throw Error(ErrorKind::OrthogonalPair, "left and right eigenvectors are orthogonal (defective eigenvalue)");
  }
  spec.sigma = shift / overlap;
  return spec;
}

ModelWeights steer_model(const ModelWeights& model, const SteeringSpec& spec, SteeringReport* report) {
  model.validate();
  SteeredLayer s = steer_output_matrix(model.layers.back(), spec);
  ModelWeights out = model;
  out.layers.back() = std::move(s.layer);
  if (spec.sigma != 0.0 && out.layers.size() > 1) out.shared = false;
  if (report) *report = std::move(s.report);
  return out;
}

AlignmentReport steer_and_verify(const ModelWeights& model, const SteeringSpec& spec,
                                 const VerifyConfig& cfg) {
  if (cfg.ensemble_size < 1) throw Error(ErrorKind::InvalidArgument, "ensemble size must be positive");
  AlignmentReport r;
  const ModelWeights steered = steer_model(model, spec, &r.steering);
  const Vector wr = unit(spec.w_r, "w_r");
  const Matrix mod_basis = classify(r.steering.modified).basis.orthonormal();
  const Matrix own_basis = classify(assemble_layer_matrix(model.layers.back())).basis.orthonormal();

  const StepConfig step{cfg.eta, cfg.mask, cfg.scaled, System::MultiHead};
  const auto sizes = sequence_sizes(cfg.ensemble_size, std::max<Eigen::Index>(2, cfg.sequence_length));
  std::vector<std::array<double, 4>> per(sizes.size());
  parallel_for(sizes.size(), [&](std::size_t s) {
    const Matrix x0 = random_tokens(model.d, sizes[s], mix_seed(cfg.seed, s));
    const Matrix a = run(x0, steered, step).states.back();
    const Matrix b = run(x0, model, step).states.back();
    std::array<double, 4> acc{0, 0, 0, 0};
    for (Eigen::Index i = 0; i < a.cols(); ++i) {
      acc[0] += projected_corr(a.col(i), mod_basis);
      acc[1] += abs_corr(a.col(i), wr);
      acc[2] += projected_corr(b.col(i), own_basis);
      acc[3] += abs_corr(b.col(i), wr);
    }
    per[s] = acc;
  }, cfg.workers);

  std::array<double, 4> total{0, 0, 0, 0};
  for (const auto& p : per)
    for (std::size_t k = 0; k < 4; ++k) total[k] += p[k];
  const auto n = static_cast<double>(cfg.ensemble_size);
  r.gamma_mod = total[0] / n;
  r.gamma_wr = total[1] / n;
  r.gamma_unmodified = total[2] / n;
  r.gamma_unmodified_wr = total[3] / n;
  return r;
}

}  // namespace tflab
