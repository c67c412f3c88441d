#include "tflab/dynamics.hpp"

#include "tflab/error.hpp"
#include "tflab/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tflab {

std::string_view to_string(System s) {
  switch (s) {
    case System::Oja: return "oja";
    case System::SingleHead: return "single-head";
    case System::MultiHead: return "multihead";
  }
  return "multihead";
}

System parse_system(std::string_view s) {
  if (s == "oja") return System::Oja;
  if (s == "single-head") return System::SingleHead;
  if (s == "multihead") return System::MultiHead;
  throw Error(ErrorKind::InvalidArgument, "unknown system '" + std::string(s) + "'");
}

std::string_view to_string(LimitKind k) {
  switch (k) {
    case LimitKind::Consensus: return "consensus";
    case LimitKind::PlanarRotation: return "planar-rotation";
    case LimitKind::Undecided: return "undecided";
  }
  return "undecided";
}

void StepConfig::validate() const {
  if (!std::isfinite(eta) || eta <= 0.0) {
    throw Error(ErrorKind::InvalidArgument, "eta must be finite and positive");
  }
}

UpdateMap UpdateMap::oja(Matrix f) {
  if (f.rows() != f.cols()) throw Error(ErrorKind::ShapeMismatch, "F must be square");
  UpdateMap m;
  m.system_ = System::Oja;
  m.f_ = std::move(f);
  return m;
}

UpdateMap UpdateMap::single_head(HeadWeights head, Mask mask, bool scaled) {
  if (head.value.rows() != head.value.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "single-head dynamics needs a square value block");
  }
  LayerWeights layer;
  layer.heads.push_back(std::move(head));
  layer.output = Matrix::Identity(layer.heads[0].model_dim(), layer.heads[0].model_dim());
  layer.validate();
  UpdateMap m;
  m.system_ = System::SingleHead;
  m.layer_ = std::move(layer);
  m.mask_ = mask;
  m.scaled_ = scaled;
  return m;
}

UpdateMap UpdateMap::multihead(LayerWeights layer, Mask mask, bool scaled) {
  layer.validate();
  UpdateMap m;
  m.system_ = System::MultiHead;
  m.layer_ = std::move(layer);
  m.mask_ = mask;
  m.scaled_ = scaled;
  return m;
}

UpdateMap UpdateMap::for_layer(const LayerWeights& layer, const StepConfig& cfg) {
  switch (cfg.system) {
    case System::Oja: return oja(assemble_layer_matrix(layer).f);
    case System::SingleHead:
      if (layer.num_heads() != 1) {
        throw Error(ErrorKind::ShapeMismatch, "single-head system needs H = 1");
      }
      return single_head(layer.heads[0], cfg.mask, cfg.scaled);
    case System::MultiHead: return multihead(layer, cfg.mask, cfg.scaled);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown system");
}

Eigen::Index UpdateMap::dim() const {
  return system_ == System::Oja ? f_.rows() : layer_.model_dim();
}

Matrix UpdateMap::drive(const Matrix& x) const {
  if (x.rows() != dim()) throw Error(ErrorKind::ShapeMismatch, "token dimension mismatch");
  const Eigen::Index n = x.cols();
  if (system_ == System::Oja) {
    const Vector y = f_ * x.rowwise().sum() / static_cast<double>(n);
    return y.replicate(1, n);
  }
  if (system_ == System::SingleHead) {
    const auto& h = layer_.heads[0];
    const Matrix a = attention(x, h, mask_, scaled_).entries;
    return h.value * (x * a.transpose());
  }
  const Eigen::Index d = layer_.model_dim();
  const Eigen::Index dk = d / layer_.num_heads();
  Matrix stacked(d, n);
  for (Eigen::Index h = 0; h < layer_.num_heads(); ++h) {
    const auto& hw = layer_.heads[static_cast<std::size_t>(h)];
    const Matrix a = attention(x, hw, mask_, scaled_, static_cast<int>(h)).entries;
    stacked.middleRows(h * dk, dk) = hw.value * (x * a.transpose());
  }
  return layer_.output * stacked;
}

Matrix UpdateMap::step(const Matrix& x, double eta) const {
  Matrix next = x + eta * drive(x);
  normalize_columns(next);
  return next;
}

Matrix step_oja(const Matrix& x, const Matrix& f, double eta) {
  return UpdateMap::oja(f).step(x, eta);
}

Matrix step_single_head(const Matrix& x, const HeadWeights& w, double eta, Mask mask, bool scaled) {
  return UpdateMap::single_head(w, mask, scaled).step(x, eta);
}

Matrix step_multihead(const Matrix& x, const LayerWeights& w, double eta, Mask mask, bool scaled) {
  return UpdateMap::multihead(w, mask, scaled).step(x, eta);
}

Trajectory run(const Matrix& x0, const ModelWeights& model, const StepConfig& cfg,
               Eigen::Index t_extra) {
  cfg.validate();
  if (model.layers.empty()) throw Error(ErrorKind::InvalidArgument, "model has no layers");
  if (t_extra < 0) throw Error(ErrorKind::InvalidArgument, "t_extra must be non-negative");
  if (t_extra > 0 && !model.shared) {
    throw Error(ErrorKind::ProlongUnsharedModel, "cannot prolong a model without shared weights");
  }
  Trajectory traj;
  traj.config = cfg;
  traj.states.reserve(static_cast<std::size_t>(model.num_layers() + t_extra + 1));
  traj.states.push_back(x0);

  std::vector<UpdateMap> maps;
  for (const auto& layer : model.layers) maps.push_back(UpdateMap::for_layer(layer, cfg));
  const Eigen::Index total = model.num_layers() + t_extra;
  for (Eigen::Index t = 0; t < total; ++t) {
    const auto& map = maps[static_cast<std::size_t>(std::min(t, model.num_layers() - 1))];
    try {
      traj.states.push_back(map.step(traj.states.back(), cfg.eta));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NearZeroNorm) throw;
      throw Error(ErrorKind::NearZeroNorm, "layer " + std::to_string(t) + ": " + e.what());
    }
  }
  return traj;
}

Matrix random_tokens(Eigen::Index d, Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(d, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < d; ++i) x(i, j) = normal(rng);
  normalize_columns(x);
  return x;
}

double intertoken_diameter(const Matrix& x) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < x.cols(); ++i)
    for (Eigen::Index j = i + 1; j < x.cols(); ++j)
      best = std::max(best, (x.col(i) - x.col(j)).norm());
  return best;
}

namespace {

Vector mean_direction(const Matrix& x) {
  const Vector s = x.rowwise().sum();
  if (s.norm() <= 1e-14) return {};
  return s / s.norm();
}

}  // namespace

LimitBehavior detect_limit_behavior(const Trajectory& traj, const SpectralClassification& spec,
                                    double tol_cons, double tol_plane) {
  LimitBehavior out;
  const auto T = traj.states.size();
  if (T < 3) return out;
  const Matrix& last = traj.states.back();

  if (intertoken_diameter(last) < tol_cons) {
    const Vector dir = mean_direction(last);
    const Vector prev = mean_direction(traj.states[T - 2]);
    if (dir.size() > 0 && prev.size() > 0) {
      bool aligned = abs_corr(dir, prev) >= 1.0 - tol_cons;
      for (Eigen::Index i = 0; aligned && i < last.cols(); ++i)
        aligned = abs_corr(last.col(i), dir) >= 1.0 - tol_cons;
      if (aligned) {
        out.kind = LimitKind::Consensus;
        out.direction = dir;
        return out;
      }
    }
  }

  const Matrix& q = spec.basis.orthonormal();
  if (q.cols() < 2) return out;
  for (Eigen::Index i = 0; i < last.cols(); ++i)
    if (projected_corr(last.col(i), q) < 1.0 - tol_plane) return out;

  const Vector re1 = spec.basis.columns().col(0);
  std::vector<double> align;
  for (std::size_t t = T / 2; t < T; ++t) {
    const Matrix& x = traj.states[t];
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.cols(); ++i) acc += abs_corr(x.col(i), re1);
    align.push_back(acc / static_cast<double>(x.cols()));
  }
  const auto [lo, hi] = std::minmax_element(align.begin(), align.end());
  int reversals = 0;
  int last_sign = 0;
  for (std::size_t t = 1; t < align.size(); ++t) {
    const double delta = align[t] - align[t - 1];
    const int sign = delta > 0 ? 1 : (delta < 0 ? -1 : 0);
    if (sign != 0 && last_sign != 0 && sign != last_sign) ++reversals;
    if (sign != 0) last_sign = sign;
  }
  if (*hi - *lo > 10.0 * tol_plane && reversals >= 2) out.kind = LimitKind::PlanarRotation;
  return out;
}

}  // namespace tflab
