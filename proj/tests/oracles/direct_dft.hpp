#pragma once

#include <cmath>
#include <complex>
#include <vector>

namespace oracle {

/// O(n^2) unnormalized forward 2D DFT of a real row-major plane.
inline std::vector<std::complex<double>> direct_dft2(const std::vector<double>& x,
                                                     std::size_t rows, std::size_t cols) {
  std::vector<std::complex<double>> out(rows * cols);
  for (std::size_t u = 0; u < rows; ++u)
    for (std::size_t v = 0; v < cols; ++v) {
      std::complex<double> acc = 0.0;
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
          const double angle = -2.0 * M_PI *
                               (static_cast<double>(u * r) / static_cast<double>(rows) +
                                static_cast<double>(v * c) / static_cast<double>(cols));
          acc += x[r * cols + c] * std::polar(1.0, angle);
        }
      out[u * cols + v] = acc;
    }
  return out;
}

}  // namespace oracle
