#pragma once

// x-update by brute force: assemble D column by column from apply() on unit
// vectors, form D^T D + rho I and solve it with a textbook Cholesky.

#include <cmath>
#include <vector>

#include "hsipnp/degrade.hpp"

namespace oracle {

inline hsipnp::Cube direct_x_update(const hsipnp::degrade::TaskOperator& op,
                                    const hsipnp::Cube& y, const hsipnp::Cube& x_tilde,
                                    double rho) {
  const std::size_t n = x_tilde.size();
  const std::size_t m = y.size();
  std::vector<double> d(m * n);  // column-major
  hsipnp::Cube e(x_tilde.extent());
  for (std::size_t j = 0; j < n; ++j) {
    e.data()[j] = 1.0;
    const hsipnp::Cube col = hsipnp::degrade::apply(op, e);
    e.data()[j] = 0.0;
    for (std::size_t i = 0; i < m; ++i) d[j * m + i] = col.data()[i];
  }
  std::vector<double> a(n * n), b(n);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q <= p; ++q) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += d[p * m + i] * d[q * m + i];
      a[p * n + q] = a[q * n + p] = s + (p == q ? rho : 0.0);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += d[p * m + i] * y.data()[i];
    b[p] = s + rho * x_tilde.data()[p];
  }
  // A = L L^T, stored in the lower triangle of a.
  for (std::size_t j = 0; j < n; ++j) {
    double s = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) s -= a[j * n + k] * a[j * n + k];
    a[j * n + j] = std::sqrt(s);
    for (std::size_t i = j + 1; i < n; ++i) {
      double t = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) t -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = t / a[j * n + j];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= a[i * n + k] * b[k];
    b[i] /= a[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) b[i] -= a[k * n + i] * b[k];
    b[i] /= a[i * n + i];
  }
  hsipnp::Cube x(x_tilde.extent());
  for (std::size_t i = 0; i < n; ++i) x.data()[i] = b[i];
  return x;
}

}  // namespace oracle
