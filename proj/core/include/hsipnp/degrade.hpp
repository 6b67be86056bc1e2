#pragma once

#include <cstddef>
#include <complex>
#include <cstdint>
#include <variant>
#include <vector>

#include "hsipnp/cube.hpp"

namespace hsipnp::degrade {

/// 2D blur kernel, row-major. Its centre tap sits at (rows / 2, cols / 2), the
/// usual psf-to-otf convention, so even-sized kernels are supported.
class Kernel2d {
 public:
  Kernel2d(std::size_t rows, std::size_t cols, std::vector<double> taps);

  static Kernel2d delta();
  static Kernel2d box(std::size_t size);
  /// Sampled isotropic Gaussian centred on the geometric middle of the
  /// size x size grid, normalized to unit sum.
  static Kernel2d gaussian(std::size_t size, double sigma);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return taps_[r * cols_ + c]; }
  const std::vector<double>& taps() const { return taps_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> taps_;
};

/// D = S H: periodic blur followed by keeping every factor-th pixel
/// (starting at index 0) along rows and cols.
class SuperRes {
 public:
  SuperRes(Kernel2d blur, std::size_t factor);

  const Kernel2d& blur() const { return blur_; }
  std::size_t factor() const { return factor_; }

  /// Optical transfer function of the blur on a rows x cols periodic grid.
  std::vector<std::complex<double>> otf(std::size_t rows, std::size_t cols) const;

 private:
  Kernel2d blur_;
  std::size_t factor_;
};

struct Shift {
  std::ptrdiff_t rows = 0;
  std::ptrdiff_t cols = 0;
};

/// Coded-aperture snapshot sensing: y = sum_b shift_b(mask_b .* x_b), one
/// rows x cols measurement plane. Shifts are periodic, so every band's shift is
/// a permutation of the detector grid and Phi Phi^T = diag(psi) with
/// psi = sum_b shift_b(mask_b^2).
class Sensing {
 public:
  Sensing(Cube masks, std::vector<Shift> shifts);

  /// Binary Bernoulli(0.5) masks with a horizontal shift of b pixels on band b.
  static Sensing cassi(std::size_t rows, std::size_t cols, std::size_t bands, std::uint64_t seed);

  const Cube& masks() const { return masks_; }
  const std::vector<Shift>& shifts() const { return shifts_; }
  /// Diagonal of Phi Phi^T as a rows x cols plane.
  const std::vector<double>& psi() const { return psi_; }

  /// Detector index that voxel (r, c) of band b lands on.
  std::size_t detector_index(std::size_t r, std::size_t c, std::size_t b) const;

 private:
  Cube masks_;
  std::vector<Shift> shifts_;
  std::vector<double> psi_;
};

/// D = S, a diagonal 0/1 sampling mask over the whole cube.
class Mask {
 public:
  explicit Mask(Cube mask);

  static Mask all_ones(Extent extent);
  /// Each voxel independently missing with probability `missing`.
  static Mask random(Extent extent, double missing, std::uint64_t seed);
  /// Whole columns missing per band; each column independently with
  /// probability `missing`.
  static Mask stripes(Extent extent, double missing, std::uint64_t seed);

  const Cube& mask() const { return mask_; }

 private:
  Cube mask_;
};

using TaskOperator = std::variant<SuperRes, Sensing, Mask>;

/// Extent of D x for a signal of the given extent.
Extent measurement_extent(const TaskOperator& op, const Extent& signal);
/// Extent of the signal that produces the given measurement extent.
Extent signal_extent(const TaskOperator& op, const Extent& measurement);

/// Noise-free forward model D x.
Cube apply(const TaskOperator& op, const Cube& x);
/// D^T y.
Cube apply_adjoint(const TaskOperator& op, const Cube& y);

/// Row-major dense matrix.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Explicit matrix of D for a signal of the given extent, written entry by
/// entry from the operator definition (independent of apply()). Rows index
/// measurement voxels, columns signal voxels, both in Cube storage order.
/// Refuses problems with more than `max_unknowns` signal voxels.
DenseMatrix dense_matrix(const TaskOperator& op, const Extent& signal,
                         std::size_t max_unknowns = 4096);

}  // namespace hsipnp::degrade
