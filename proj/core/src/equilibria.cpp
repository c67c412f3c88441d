#include "tflab/equilibria.hpp"

#include "tflab/attention.hpp"
#include "tflab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tflab {

std::string to_string(EquilibriumClass c) {
  switch (c) {
    case EquilibriumClass::Consensus: return "consensus";
    case EquilibriumClass::Bipartite: return "bipartite";
    case EquilibriumClass::Polygonal: return "polygonal";
    case EquilibriumClass::Clustering: return "clustering";
  }
  return "consensus";
}

double residual_at(const Matrix& x, const UpdateMap& map) {
  const Matrix y = map.drive(x);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    const Vector r = y.col(i) - x.col(i) * x.col(i).dot(y.col(i));
    worst = std::max(worst, r.norm());
  }
  return worst;
}

namespace {

EigenSystem symmetric_eig(const Matrix& f) {
  if (f.rows() != f.cols()) throw Error(ErrorKind::ShapeMismatch, "F must be square");
  if ((f - f.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, f.cwiseAbs().maxCoeff())) {
    throw Error(ErrorKind::InvalidArgument, "F must be symmetric");
  }
  return eig(0.5 * (f + f.transpose()));
}

Vector stacked(const Matrix& x) { return Eigen::Map<const Vector>(x.data(), x.size()); }

Matrix unstacked(const Vector& v, Eigen::Index d) {
  return Eigen::Map<const Matrix>(v.data(), d, v.size() / d);
}

}  // namespace

std::vector<EigenClass> consensus_jacobian_eigs(const Matrix& f, Eigen::Index k, double eta,
                                                Eigen::Index n) {
  const EigenSystem es = symmetric_eig(f);
  const Eigen::Index d = es.size();
  if (k < 0 || k >= d) throw Error(ErrorKind::InvalidArgument, "eigen index out of range");
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "need n >= 1");
  const double lk = es.values[k].real();
  const double den = 1.0 + eta * lk;
  if (std::abs(den) < 1e-12) {
    throw Error(ErrorKind::SingularDenominator, "|1 + eta*lambda_k| < 1e-12");
  }
  const double el = eta * lk;
  std::vector<EigenClass> out;
  if (den > 0) {
    out.push_back({1, (1.0 - el + el * el) / den, n, true});
  } else {
    out.push_back({1, (-1.0 - 3.0 * el + el * el) / den, 1, true});
    out.push_back({1, (-1.0 - el + el * el) / den, n - 1, true});
  }
  for (Eigen::Index h = 0; h < d; ++h) {
    if (h == k) continue;
    out.push_back({2, (1.0 + eta * es.values[h].real()) / std::abs(den), 1, false});
  }
  out.push_back({3, 1.0 / std::abs(den), n * d - d - n + 1, false});
  return out;
}

ComplexVector expand_classes(const std::vector<EigenClass>& classes, bool intrinsic_only) {
  Eigen::Index total = 0;
  for (const auto& c : classes)
    if (!(intrinsic_only && c.extrinsic)) total += c.multiplicity;
  ComplexVector out(total);
  Eigen::Index at = 0;
  for (const auto& c : classes) {
    if (intrinsic_only && c.extrinsic) continue;
    for (Eigen::Index m = 0; m < c.multiplicity; ++m) out[at++] = c.value;
  }
  return out;
}

Matrix numerical_jacobian(const Matrix& x, const UpdateMap& map, double eta, double h) {
  const Eigen::Index d = x.rows();
  const Eigen::Index nd = x.size();
  const Vector base = stacked(x);
  Matrix j(nd, nd);
  for (Eigen::Index c = 0; c < nd; ++c) {
    Vector plus = base, minus = base;
    plus[c] += h;
    minus[c] -= h;
    j.col(c) = (stacked(map.step(unstacked(plus, d), eta)) -
                stacked(map.step(unstacked(minus, d), eta))) / (2.0 * h);
  }
  return j;
}

Matrix tangent_basis(const Matrix& x) {
  const Eigen::Index d = x.rows();
  const Eigen::Index n = x.cols();
  Matrix b = Matrix::Zero(n * d, n * (d - 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::HouseholderQR<Matrix> qr(Matrix(x.col(i)));
    const Matrix q = qr.householderQ();
    b.block(i * d, i * (d - 1), d, d - 1) = q.rightCols(d - 1);
  }
  return b;
}

Matrix intrinsic_jacobian(const Matrix& x, const UpdateMap& map, double eta, double h) {
  const Eigen::Index d = x.rows();
  const Matrix b = tangent_basis(x);
  const Vector base = stacked(x);
  Matrix jb(b.rows(), b.cols());
  for (Eigen::Index c = 0; c < b.cols(); ++c) {
    Matrix plus = unstacked(base + h * b.col(c), d);
    Matrix minus = unstacked(base - h * b.col(c), d);
    normalize_columns(plus);
    normalize_columns(minus);
    jb.col(c) = (stacked(map.step(plus, eta)) - stacked(map.step(minus, eta))) / (2.0 * h);
  }
  return b.transpose() * jb;
}

Matrix bipartite_state(const Vector& vk, const BipartitePattern& p) {
  Matrix x(vk.size(), p.n());
  for (Eigen::Index i = 0; i < p.n(); ++i) x.col(i) = i < p.n1 ? Vector(vk) : Vector(-vk);
  return x;
}

BipartiteConstants bipartite_constants(const HeadWeights& w, const Vector& vk,
                                       const BipartitePattern& p, bool scaled) {
  double score = (w.query * vk).dot(w.key * vk);
  if (scaled) score /= std::sqrt(static_cast<double>(w.query.rows()));
  BipartiteConstants c;
  c.alpha1 = std::exp(score);
  c.alpha2 = std::exp(-score);
  const auto n1 = static_cast<double>(p.n1);
  const auto n2 = static_cast<double>(p.n2);
  c.beta1 = n1 * c.alpha1 + n2 * c.alpha2;
  c.beta2 = n1 * c.alpha2 + n2 * c.alpha1;
  c.gamma1 = (n1 * c.alpha1 - n2 * c.alpha2) / c.beta1;
  c.gamma2 = (n2 * c.alpha1 - n1 * c.alpha2) / c.beta2;
  return c;
}

namespace {

void attach_oracle(EquilibriumReport& r, const Matrix& x, const UpdateMap& map, double eta) {
  r.oracle = eig(intrinsic_jacobian(x, map, eta)).values;
  r.oracle_distance = multiset_distance(r.closed_form, r.oracle);
}

}  // namespace

EquilibriumReport consensus_stability(const Matrix& f, Eigen::Index k, double eta, Eigen::Index n,
                                      const UpdateMap* map) {
  EquilibriumReport r;
  r.cls = EquilibriumClass::Consensus;
  r.k = k;
  r.classes = consensus_jacobian_eigs(f, k, eta, n);
  r.closed_form = expand_classes(r.classes);
  const EigenSystem es = symmetric_eig(f);
  const double l1 = es.values[0].real();
  const double ld = es.values[es.size() - 1].real();
  r.eta_bounds = {2.0 / std::abs(l1 + ld), 1.0 / (2.0 * std::max(l1, std::abs(ld)))};

  double radius = 0.0;
  for (Eigen::Index i = 0; i < r.closed_form.size(); ++i)
    radius = std::max(radius, std::abs(r.closed_form[i]));
  if (radius < 1.0) {
    r.stable = true;
    r.reason = "all intrinsic eigenvalues inside the unit disk";
  } else if (radius > 1.0) {
    r.reason = "intrinsic eigenvalue of modulus " + std::to_string(radius) + " > 1";
  } else {
    r.reason = "marginal: intrinsic spectral radius equals 1";
  }
  if (map) {
    Matrix x(f.rows(), n);
    x.colwise() = es.real_vector(k);
    attach_oracle(r, x, *map, eta);
  }
  return r;
}

EquilibriumReport bipartite_stability(const Matrix& f_v, const HeadWeights& w,
                                      const BipartitePattern& p, double eta, bool with_oracle) {
  const EigenSystem es = symmetric_eig(f_v);
  const Eigen::Index d = es.size();
  if (p.k < 0 || p.k >= d || p.n1 < 1 || p.n2 < 0 || p.n1 < p.n2) {
    throw Error(ErrorKind::InvalidArgument, "bipartite pattern needs n1 >= n2 >= 0, n1 >= 1");
  }
  const double l1 = es.values[0].real();
  const double ld = es.values[d - 1].real();
  const double bound = std::min(l1 > 0 ? 1.0 / l1 : std::numeric_limits<double>::infinity(),
                                1.0 / std::abs(ld));
  if (!(eta > 0.0 && eta < bound)) {
    throw Error(ErrorKind::EtaOutOfRange,
                "eta must lie in (0, min(1/lambda_1, 1/|lambda_d|)) = (0, " + std::to_string(bound) + ")");
  }

  EquilibriumReport r;
  r.cls = EquilibriumClass::Bipartite;
  r.k = p.k;
  r.pattern = p;
  r.eta_bounds = {bound};
  const Vector vk = es.real_vector(p.k);
  const double lk = es.values[p.k].real();
  const BipartiteConstants c = bipartite_constants(w, vk, p, false);
  r.constants = c;
  const bool has2 = p.n2 > 0;
  const double den1 = 1.0 + eta * lk * c.gamma1;
  const double den2 = has2 ? 1.0 + eta * lk * c.gamma2 : 1.0;

  auto class1 = [&](double g, double den) {
    const double x = eta * lk * g;
    return (1.0 - (1.0 - x) * x) / den;
  };
  r.classes.push_back({1, class1(c.gamma1, den1), p.n1, true});
  if (has2) r.classes.push_back({1, class1(c.gamma2, den2), p.n2, true});

  const auto n1 = static_cast<double>(p.n1);
  const auto n2 = static_cast<double>(p.n2);
  bool cond2 = true;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (j == p.k) continue;
    const double lj = es.values[j].real();
    BipartiteCoefficients q;
    q.j = j;
    q.a = (1.0 + eta * n1 * (c.alpha1 / c.beta1) * lj) / den1;
    if (has2) {
      q.b = eta * n2 * (c.alpha2 / c.beta1) * lj / den1;
      q.c = eta * n1 * (c.alpha2 / c.beta2) * lj / den2;
      q.d = (1.0 + eta * n2 * (c.alpha1 / c.beta2) * lj) / den2;
      const Complex disc = std::sqrt(Complex((q.a - q.d) * (q.a - q.d) + 4.0 * q.b * q.c, 0.0));
      q.mu_plus = 0.5 * (q.a + q.d + disc);
      q.mu_minus = 0.5 * (q.a + q.d - disc);
      const double det = q.a * q.d - q.b * q.c;
      if (!(det < 1.0 && q.a + q.d < 1.0 + det)) cond2 = false;
      r.classes.push_back({2, q.mu_plus, 1, false});
      r.classes.push_back({2, q.mu_minus, 1, false});
    } else {
      // One-sided pattern: the 2x2 block collapses to the scalar a_j.
      q.mu_plus = q.mu_minus = q.a;
      if (!(std::abs(q.a) < 1.0)) cond2 = false;
      r.classes.push_back({2, q.a, 1, false});
    }
    r.coefficients.push_back(q);
  }
  r.classes.push_back({3, 1.0 / den1, (p.n1 - 1) * (d - 1), false});
  if (has2) r.classes.push_back({3, 1.0 / den2, (p.n2 - 1) * (d - 1), false});
  r.closed_form = expand_classes(r.classes);

  auto cond1_holds = [&](double g, double den) {
    const double x = eta * lk * g;
    return std::abs(1.0 - (1.0 - x) * x) / den < 1.0;
  };
  const bool cond1 = cond1_holds(c.gamma1, den1) && (!has2 || cond1_holds(c.gamma2, den2));
  const bool cond3 = 1.0 / den1 < 1.0 && (!has2 || 1.0 / den2 < 1.0);
  r.stable = cond1 && cond2 && cond3;
  if (r.stable) {
    r.reason = "conditions 1-3 hold";
  } else {
    r.reason = "fails";
    if (!cond1) r.reason += " condition 1";
    if (!cond2) r.reason += " condition 2";
    if (!cond3) r.reason += " condition 3";
  }

  if (with_oracle) {
    const HeadWeights head{w.query, w.key, f_v};
    const UpdateMap map = UpdateMap::single_head(head, Mask::Full, false);
    attach_oracle(r, bipartite_state(vk, p), map, eta);
  }
  return r;
}

double oja_bipartite_instability_certificate(const Matrix& f, const BipartitePattern& p,
                                             double eta) {
  const EigenSystem es = symmetric_eig(f);
  if (p.k < 0 || p.k >= es.size() || p.n() < 1) {
    throw Error(ErrorKind::InvalidArgument, "bad bipartite pattern");
  }
  return 1.0 - eta * p.nu() * es.values[p.k].real() + eta * es.values[0].real();
}

double lyapunov_W(const Matrix& x, const Matrix& f) {
  const Vector s = x.rowwise().sum();
  const auto n = static_cast<double>(x.cols());
  return -s.dot(f * s) / (2.0 * n * n);
}

Matrix polygonal_state(const Matrix& directions) {
  Matrix x(directions.rows(), 2 * directions.cols());
  for (Eigen::Index i = 0; i < directions.cols(); ++i) {
    const Vector u = l2_normalize(directions.col(i));
    x.col(2 * i) = u;
    x.col(2 * i + 1) = -u;
  }
  return x;
}

ClusteringVerdict verify_clustering(const Matrix& x, const std::vector<double>& thetas,
                                    const HeadWeights& w, double tol, Mask mask, bool scaled) {
  const Eigen::Index d = x.rows();
  const Eigen::Index n = x.cols();
  if (static_cast<Eigen::Index>(thetas.size()) != n) {
    throw Error(ErrorKind::ShapeMismatch, "need one theta per token");
  }
  if (w.value.rows() != d || w.value.cols() != d) {
    throw Error(ErrorKind::ShapeMismatch, "value block must be d x d");
  }
  const Matrix a = attention(x, w, mask, scaled).entries;
  const Matrix drive = w.value * (x * a.transpose());

  ClusteringVerdict v;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = (x.col(i) - thetas[static_cast<std::size_t>(i)] * drive.col(i)).norm();
    v.pointwise_residual = std::max(v.pointwise_residual, r);
  }

  Matrix m = Matrix::Identity(n * d, n * d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      m.block(i * d, j * d, d, d) -= thetas[static_cast<std::size_t>(i)] * a(i, j) * w.value;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  v.min_singular = s[s.size() - 1];
  v.scale = std::max(1.0, s[0]);

  std::vector<Vector> reps;
  for (Eigen::Index i = 0; i < n; ++i) {
    bool seen = false;
    for (const auto& u : reps) seen = seen || (u - x.col(i)).norm() <= 1e-9;
    if (!seen) reps.emplace_back(x.col(i));
  }
  v.clusters = static_cast<int>(reps.size());
  v.attention_rank = attention_rank(a, 1e-10);
  v.holds = v.pointwise_residual <= tol && v.min_singular <= tol * v.scale;
  return v;
}

}  // namespace tflab
