#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace hsipnp {

using Spectrum = std::vector<std::complex<double>>;

/// Unnormalized forward 2D DFT of a row-major rows x cols real plane.
Spectrum fft2_band(std::span<const double> plane, std::size_t rows, std::size_t cols);
/// Complex-input forward 2D DFT.
Spectrum fft2(std::span<const std::complex<double>> plane, std::size_t rows, std::size_t cols);
/// Inverse 2D DFT scaled by 1/(rows*cols); returns the real part.
std::vector<double> ifft2_band(std::span<const std::complex<double>> spectrum, std::size_t rows,
                               std::size_t cols);
/// Inverse 2D DFT scaled by 1/(rows*cols).
Spectrum ifft2(std::span<const std::complex<double>> spectrum, std::size_t rows, std::size_t cols);

}  // namespace hsipnp
