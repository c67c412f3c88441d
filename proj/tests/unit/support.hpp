#pragma once

#include "tflab/numerics.hpp"
#include "tflab/random.hpp"
#include "tflab/weights.hpp"

#include <random>
#include <vector>

namespace testing_support {

using tflab::Matrix;
using tflab::Vector;

inline Matrix gaussian(Eigen::Index r, Eigen::Index c, std::uint64_t seed, double sd = 1.0) {
  tflab::Rng rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = g(rng);
  return m;
}

inline Vector unit(Eigen::Index d, Eigen::Index i) { return Vector::Unit(d, i); }

inline tflab::HeadWeights random_head(Eigen::Index dk, Eigen::Index d, std::uint64_t seed,
                                      double sd = 1.0) {
  return {gaussian(dk, d, seed, sd), gaussian(dk, d, seed + 1, sd), gaussian(dk, d, seed + 2, sd)};
}

inline tflab::LayerWeights random_layer(Eigen::Index d, Eigen::Index heads, std::uint64_t seed) {
  tflab::LayerWeights w;
  const double sd = 1.0 / std::sqrt(static_cast<double>(d));
  for (Eigen::Index h = 0; h < heads; ++h)
    w.heads.push_back(random_head(d / heads, d, seed + 10 * static_cast<std::uint64_t>(h), sd));
  w.output = gaussian(d, d, seed + 999, sd);
  return w;
}

}  // namespace testing_support
