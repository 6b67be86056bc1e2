#include "hsipnp/fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "hsipnp/error.hpp"

namespace hsipnp {
namespace {

// The FFTW planner is not re-entrant; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

Spectrum transform(std::span<const std::complex<double>> in, std::size_t rows, std::size_t cols,
                   int sign) {
  require(rows >= 1 && cols >= 1, ErrorCode::InvalidArgument, "fft: empty plane");
  require(in.size() == rows * cols, ErrorCode::DimensionMismatch, "fft: plane size mismatch");
  Spectrum out(in.begin(), in.end());
  auto* buf = reinterpret_cast<fftw_complex*>(out.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), buf, buf, sign,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace

Spectrum fft2(std::span<const std::complex<double>> plane, std::size_t rows, std::size_t cols) {
  return transform(plane, rows, cols, FFTW_FORWARD);
}

Spectrum fft2_band(std::span<const double> plane, std::size_t rows, std::size_t cols) {
  require(plane.size() == rows * cols, ErrorCode::DimensionMismatch, "fft: plane size mismatch");
  Spectrum in(plane.begin(), plane.end());
  return fft2(in, rows, cols);
}

Spectrum ifft2(std::span<const std::complex<double>> spectrum, std::size_t rows,
               std::size_t cols) {
  Spectrum out = transform(spectrum, rows, cols, FFTW_BACKWARD);
  const double norm = 1.0 / static_cast<double>(rows * cols);
  for (auto& v : out) v *= norm;
  return out;
}

std::vector<double> ifft2_band(std::span<const std::complex<double>> spectrum, std::size_t rows,
                               std::size_t cols) {
  const Spectrum full = ifft2(spectrum, rows, cols);
  std::vector<double> out(full.size());
  for (std::size_t i = 0; i < full.size(); ++i) out[i] = full[i].real();
  return out;
}

}  // namespace hsipnp
