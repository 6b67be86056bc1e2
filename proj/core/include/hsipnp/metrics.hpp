#pragma once

#include <cstddef>
#include <vector>

#include "hsipnp/cube.hpp"

namespace hsipnp::metrics {

// All metrics assume data normalized to a peak of 1.0.

/// Returned for a band with zero error.
inline constexpr double kPsnrCap = 100.0;

/// 10 log10(1 / MSE_b) per band, capped at kPsnrCap.
std::vector<double> psnr_per_band(const Cube& gt, const Cube& pred);
/// Mean of psnr_per_band.
double psnr(const Cube& gt, const Cube& pred);

/// Mean local SSIM per band over all valid 11x11 windows of a Gaussian
/// (sigma 1.5) weighting, C1 = 0.01^2, C2 = 0.03^2. Planes must be at least
/// 11x11.
std::vector<double> ssim_per_band(const Cube& gt, const Cube& pred);
double ssim(const Cube& gt, const Cube& pred);

struct SamResult {
  double mean = 0.0;         // radians
  std::size_t skipped = 0;   // pixels where either spectrum is all zero
};
/// Mean spectral angle over pixels, computed as 2 atan2(|g^ - p^|, |g^ + p^|)
/// on the unit spectra (stable for tiny angles).
SamResult sam(const Cube& gt, const Cube& pred);

struct MetricReport {
  double psnr = 0.0;
  double ssim = 0.0;
  double sam = 0.0;
  std::vector<double> psnr_bands;
  std::vector<double> ssim_bands;
  std::size_t sam_skipped = 0;
};

MetricReport evaluate(const Cube& gt, const Cube& pred);

}  // namespace hsipnp::metrics
