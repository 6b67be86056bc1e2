#pragma once

#include <cmath>
#include <random>
#include <span>

#include "hsipnp/conv3d.hpp"
#include "hsipnp/cube.hpp"

namespace oracle {

inline hsipnp::Cube random_cube(hsipnp::Extent e, std::mt19937_64& rng, double lo = 0.0,
                                double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  hsipnp::Cube c(e);
  for (double& v : c.data()) v = u(rng);
  return c;
}

inline hsipnp::FeatureTensor random_tensor(std::size_t channels, hsipnp::Extent e,
                                           std::mt19937_64& rng, double lo = -1.0,
                                           double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  hsipnp::FeatureTensor t(channels, e);
  for (double& v : t.data()) v = u(rng);
  return t;
}

inline void randomize(hsipnp::Kernel3d& k, std::mt19937_64& rng, double scale = 0.5) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& w : k.weights()) w = u(rng);
  for (double& b : k.bias()) b = u(rng);
}

inline double rel_err(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

}  // namespace oracle
