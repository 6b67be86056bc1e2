#pragma once

// Straightforward recomputations of the quality indices: scalar loops, a
// direct 11x11 weighted window sum for SSIM and the arccos form of SAM.

#include <cmath>
#include <vector>

#include "hsipnp/cube.hpp"

namespace oracle {

inline double naive_psnr(const hsipnp::Cube& g, const hsipnp::Cube& p) {
  double total = 0.0;
  for (std::size_t b = 0; b < g.bands(); ++b) {
    double sse = 0.0;
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) sse += std::pow(g(r, c, b) - p(r, c, b), 2);
    const double mse = sse / static_cast<double>(g.rows() * g.cols());
    total += mse == 0.0 ? 100.0 : std::min(100.0, -10.0 * std::log10(mse));
  }
  return total / static_cast<double>(g.bands());
}

inline double naive_ssim(const hsipnp::Cube& g, const hsipnp::Cube& p) {
  double w[11][11];
  double norm = 0.0;
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) {
      w[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2.0 * 1.5 * 1.5));
      norm += w[i][j];
    }
  const double c1 = 1e-4, c2 = 9e-4;
  double total = 0.0;
  for (std::size_t b = 0; b < g.bands(); ++b) {
    double band_sum = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r + 11 <= g.rows(); ++r)
      for (std::size_t c = 0; c + 11 <= g.cols(); ++c) {
        double mx = 0, my = 0;
        for (int i = 0; i < 11; ++i)
          for (int j = 0; j < 11; ++j) {
            mx += w[i][j] / norm * g(r + i, c + j, b);
            my += w[i][j] / norm * p(r + i, c + j, b);
          }
        double vx = 0, vy = 0, cxy = 0;
        for (int i = 0; i < 11; ++i)
          for (int j = 0; j < 11; ++j) {
            const double dx = g(r + i, c + j, b) - mx, dy = p(r + i, c + j, b) - my;
            vx += w[i][j] / norm * dx * dx;
            vy += w[i][j] / norm * dy * dy;
            cxy += w[i][j] / norm * dx * dy;
          }
        band_sum += (2 * mx * my + c1) * (2 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        ++count;
      }
    total += band_sum / static_cast<double>(count);
  }
  return total / static_cast<double>(g.bands());
}

inline double naive_sam(const hsipnp::Cube& g, const hsipnp::Cube& p) {
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) {
      double gp = 0, gg = 0, pp = 0;
      for (std::size_t b = 0; b < g.bands(); ++b) {
        gp += g(r, c, b) * p(r, c, b);
        gg += g(r, c, b) * g(r, c, b);
        pp += p(r, c, b) * p(r, c, b);
      }
      if (gg == 0 || pp == 0) continue;
      total += std::acos(std::max(-1.0, std::min(1.0, gp / std::sqrt(gg * pp))));
      ++n;
    }
  return total / static_cast<double>(n);
}

}  // namespace oracle
