#include "hsipnp/degrade.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "hsipnp/elementwise.hpp"
#include "hsipnp/error.hpp"
#include "hsipnp/fft.hpp"

namespace hsipnp::degrade {
namespace {

std::size_t wrap(std::ptrdiff_t v, std::size_t n) {
  const auto m = static_cast<std::ptrdiff_t>(n);
  return static_cast<std::size_t>(((v % m) + m) % m);
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_signal(const TaskOperator& op, const Cube& x) {
  std::visit(Overloaded{
                 [&](const SuperRes& sr) {
                   require(x.rows() % sr.factor() == 0 && x.cols() % sr.factor() == 0,
                           ErrorCode::DimensionMismatch,
                           "SuperRes: factor " + std::to_string(sr.factor()) +
                               " does not divide " + std::to_string(x.rows()) + "x" +
                               std::to_string(x.cols()));
                 },
                 [&](const Sensing& cs) {
                   require(x.extent() == cs.masks().extent(), ErrorCode::DimensionMismatch,
                           "Sensing: signal extent does not match the masks");
                 },
                 [&](const Mask& m) {
                   require(x.extent() == m.mask().extent(), ErrorCode::DimensionMismatch,
                           "Mask: signal extent does not match the mask");
                 },
             },
             op);
}

std::vector<double> circular_filter(std::span<const double> plane, std::size_t rows,
                                    std::size_t cols, const Spectrum& otf, bool adjoint) {
  Spectrum spec = fft2_band(plane, rows, cols);
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= adjoint ? std::conj(otf[i]) : otf[i];
  return ifft2_band(spec, rows, cols);
}

}  // namespace

Kernel2d::Kernel2d(std::size_t rows, std::size_t cols, std::vector<double> taps)
    : rows_(rows), cols_(cols), taps_(std::move(taps)) {
  require(rows_ > 0 && cols_ > 0 && taps_.size() == rows_ * cols_, ErrorCode::InvalidArgument,
          "Kernel2d: taps do not match the kernel size");
  const double sum = std::accumulate(taps_.begin(), taps_.end(), 0.0);
  require(std::abs(sum - 1.0) <= 1e-9, ErrorCode::InvalidArgument,
          "Kernel2d: blur kernel must sum to 1 (sum = " + std::to_string(sum) + ")");
}

Kernel2d Kernel2d::delta() { return Kernel2d(1, 1, {1.0}); }

Kernel2d Kernel2d::box(std::size_t size) {
  require(size > 0, ErrorCode::InvalidArgument, "Kernel2d: empty box");
  const double v = 1.0 / static_cast<double>(size * size);
  return Kernel2d(size, size, std::vector<double>(size * size, v));
}

Kernel2d Kernel2d::gaussian(std::size_t size, double sigma) {
  require(size > 0 && sigma > 0.0, ErrorCode::InvalidArgument,
          "Kernel2d: gaussian needs a positive size and sigma");
  const double mid = (static_cast<double>(size) - 1.0) / 2.0;
  std::vector<double> taps(size * size);
  double sum = 0.0;
  for (std::size_t r = 0; r < size; ++r)
    for (std::size_t c = 0; c < size; ++c) {
      const double dr = static_cast<double>(r) - mid;
      const double dc = static_cast<double>(c) - mid;
      taps[r * size + c] = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
      sum += taps[r * size + c];
    }
  for (double& t : taps) t /= sum;
  return Kernel2d(size, size, std::move(taps));
}

SuperRes::SuperRes(Kernel2d blur, std::size_t factor) : blur_(std::move(blur)), factor_(factor) {
  require(factor_ >= 1, ErrorCode::InvalidArgument, "SuperRes: factor must be positive");
}

std::vector<std::complex<double>> SuperRes::otf(std::size_t rows, std::size_t cols) const {
  std::vector<double> psf(rows * cols, 0.0);
  const auto cr = static_cast<std::ptrdiff_t>(blur_.rows() / 2);
  const auto cc = static_cast<std::ptrdiff_t>(blur_.cols() / 2);
  for (std::size_t i = 0; i < blur_.rows(); ++i)
    for (std::size_t j = 0; j < blur_.cols(); ++j) {
      const std::size_t r = wrap(static_cast<std::ptrdiff_t>(i) - cr, rows);
      const std::size_t c = wrap(static_cast<std::ptrdiff_t>(j) - cc, cols);
      psf[r * cols + c] += blur_(i, j);
    }
  return fft2_band(psf, rows, cols);
}

Sensing::Sensing(Cube masks, std::vector<Shift> shifts)
    : masks_(std::move(masks)), shifts_(std::move(shifts)) {
  require(!masks_.empty(), ErrorCode::InvalidArgument, "Sensing: empty masks");
  require(shifts_.size() == masks_.bands(), ErrorCode::DimensionMismatch,
          "Sensing: need one shift per band");
  require(masks_.all_finite(), ErrorCode::NonFinite, "Sensing: masks must be finite");
  psi_.assign(masks_.rows() * masks_.cols(), 0.0);
  for (std::size_t b = 0; b < masks_.bands(); ++b)
    for (std::size_t r = 0; r < masks_.rows(); ++r)
      for (std::size_t c = 0; c < masks_.cols(); ++c) {
        const double m = masks_(r, c, b);
        psi_[detector_index(r, c, b)] += m * m;
      }
}

Sensing Sensing::cassi(std::size_t rows, std::size_t cols, std::size_t bands,
                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Cube masks(rows, cols, bands);
  for (double& m : masks.data()) m = u(rng) < 0.5 ? 1.0 : 0.0;
  std::vector<Shift> shifts(bands);
  for (std::size_t b = 0; b < bands; ++b) shifts[b] = {0, static_cast<std::ptrdiff_t>(b)};
  return Sensing(std::move(masks), std::move(shifts));
}

std::size_t Sensing::detector_index(std::size_t r, std::size_t c, std::size_t b) const {
  const std::size_t rr = wrap(static_cast<std::ptrdiff_t>(r) + shifts_[b].rows, masks_.rows());
  const std::size_t cc = wrap(static_cast<std::ptrdiff_t>(c) + shifts_[b].cols, masks_.cols());
  return rr * masks_.cols() + cc;
}

Mask::Mask(Cube mask) : mask_(std::move(mask)) {
  for (double v : mask_.data())
    require(v == 0.0 || v == 1.0, ErrorCode::InvalidArgument, "Mask: entries must be 0 or 1");
}

Mask Mask::all_ones(Extent extent) { return Mask(Cube(extent, 1.0)); }

Mask Mask::random(Extent extent, double missing, std::uint64_t seed) {
  require(missing >= 0.0 && missing <= 1.0, ErrorCode::InvalidArgument,
          "Mask: missing ratio must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Cube m(extent);
  for (double& v : m.data()) v = u(rng) < missing ? 0.0 : 1.0;
  return Mask(std::move(m));
}

Mask Mask::stripes(Extent extent, double missing, std::uint64_t seed) {
  require(missing >= 0.0 && missing <= 1.0, ErrorCode::InvalidArgument,
          "Mask: missing ratio must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Cube m(extent, 1.0);
  for (std::size_t b = 0; b < extent.bands; ++b)
    for (std::size_t c = 0; c < extent.cols; ++c)
      if (u(rng) < missing)
        for (std::size_t r = 0; r < extent.rows; ++r) m(r, c, b) = 0.0;
  return Mask(std::move(m));
}

Extent measurement_extent(const TaskOperator& op, const Extent& signal) {
  return std::visit(Overloaded{
                        [&](const SuperRes& sr) {
                          return Extent{signal.rows / sr.factor(), signal.cols / sr.factor(),
                                        signal.bands};
                        },
                        [&](const Sensing&) { return Extent{signal.rows, signal.cols, 1}; },
                        [&](const Mask&) { return signal; },
                    },
                    op);
}

Extent signal_extent(const TaskOperator& op, const Extent& measurement) {
  return std::visit(Overloaded{
                        [&](const SuperRes& sr) {
                          return Extent{measurement.rows * sr.factor(),
                                        measurement.cols * sr.factor(), measurement.bands};
                        },
                        [&](const Sensing& cs) { return cs.masks().extent(); },
                        [&](const Mask& m) { return m.mask().extent(); },
                    },
                    op);
}

Cube apply(const TaskOperator& op, const Cube& x) {
  require_signal(op, x);
  return std::visit(
      Overloaded{
          [&](const SuperRes& sr) {
            const std::size_t f = sr.factor();
            const auto otf = sr.otf(x.rows(), x.cols());
            Cube y(x.rows() / f, x.cols() / f, x.bands());
            for (std::size_t b = 0; b < x.bands(); ++b) {
              const auto blurred = circular_filter(x.band(b), x.rows(), x.cols(), otf, false);
              for (std::size_t r = 0; r < y.rows(); ++r)
                for (std::size_t c = 0; c < y.cols(); ++c)
                  y(r, c, b) = blurred[(r * f) * x.cols() + c * f];
            }
            return y;
          },
          [&](const Sensing& cs) {
            Cube y(x.rows(), x.cols(), 1);
            auto plane = y.band(0);
            for (std::size_t b = 0; b < x.bands(); ++b)
              for (std::size_t r = 0; r < x.rows(); ++r)
                for (std::size_t c = 0; c < x.cols(); ++c)
                  plane[cs.detector_index(r, c, b)] += cs.masks()(r, c, b) * x(r, c, b);
            return y;
          },
          [&](const Mask& m) { return hadamard(m.mask(), x); },
      },
      op);
}

Cube apply_adjoint(const TaskOperator& op, const Cube& y) {
  return std::visit(
      Overloaded{
          [&](const SuperRes& sr) {
            const std::size_t f = sr.factor();
            const std::size_t rows = y.rows() * f;
            const std::size_t cols = y.cols() * f;
            const auto otf = sr.otf(rows, cols);
            Cube x(rows, cols, y.bands());
            std::vector<double> up(rows * cols);
            for (std::size_t b = 0; b < y.bands(); ++b) {
              std::fill(up.begin(), up.end(), 0.0);
              for (std::size_t r = 0; r < y.rows(); ++r)
                for (std::size_t c = 0; c < y.cols(); ++c) up[(r * f) * cols + c * f] = y(r, c, b);
              const auto filtered = circular_filter(up, rows, cols, otf, true);
              std::copy(filtered.begin(), filtered.end(), x.band(b).begin());
            }
            return x;
          },
          [&](const Sensing& cs) {
            const Cube& m = cs.masks();
            require(y.rows() == m.rows() && y.cols() == m.cols() && y.bands() == 1,
                    ErrorCode::DimensionMismatch,
                    "Sensing: measurement must be a single rows x cols plane");
            Cube x(m.extent());
            const auto plane = y.band(0);
            for (std::size_t b = 0; b < m.bands(); ++b)
              for (std::size_t r = 0; r < m.rows(); ++r)
                for (std::size_t c = 0; c < m.cols(); ++c)
                  x(r, c, b) = m(r, c, b) * plane[cs.detector_index(r, c, b)];
            return x;
          },
          [&](const Mask& m) {
            require(y.extent() == m.mask().extent(), ErrorCode::DimensionMismatch,
                    "Mask: measurement extent does not match the mask");
            return hadamard(m.mask(), y);
          },
      },
      op);
}

DenseMatrix dense_matrix(const TaskOperator& op, const Extent& signal, std::size_t max_unknowns) {
  require(signal.volume() <= max_unknowns, ErrorCode::SizeGuard,
          "dense_matrix: " + std::to_string(signal.volume()) + " unknowns exceed the guard of " +
              std::to_string(max_unknowns));
  require_signal(op, Cube(signal));
  const Extent meas = measurement_extent(op, signal);
  DenseMatrix d{meas.volume(), signal.volume(), std::vector<double>(meas.volume() * signal.volume())};
  const auto voxel = [&](std::size_t r, std::size_t c, std::size_t b) {
    return (b * signal.rows + r) * signal.cols + c;
  };

  std::visit(Overloaded{
                 [&](const SuperRes& sr) {
                   // Row (b, r, c) samples the blurred image at (r f, c f); the
                   // blur is sum_ij k(i, j) x(R - (i - ci), C - (j - cj)) mod size.
                   const Kernel2d& k = sr.blur();
                   const auto ci = static_cast<std::ptrdiff_t>(k.rows() / 2);
                   const auto cj = static_cast<std::ptrdiff_t>(k.cols() / 2);
                   for (std::size_t b = 0; b < meas.bands; ++b)
                     for (std::size_t r = 0; r < meas.rows; ++r)
                       for (std::size_t c = 0; c < meas.cols; ++c) {
                         const std::size_t row = (b * meas.rows + r) * meas.cols + c;
                         const auto R = static_cast<std::ptrdiff_t>(r * sr.factor());
                         const auto C = static_cast<std::ptrdiff_t>(c * sr.factor());
                         for (std::size_t i = 0; i < k.rows(); ++i)
                           for (std::size_t j = 0; j < k.cols(); ++j) {
                             const std::size_t rr =
                                 wrap(R - (static_cast<std::ptrdiff_t>(i) - ci), signal.rows);
                             const std::size_t cc =
                                 wrap(C - (static_cast<std::ptrdiff_t>(j) - cj), signal.cols);
                             d(row, voxel(rr, cc, b)) += k(i, j);
                           }
                       }
                 },
                 [&](const Sensing& cs) {
                   for (std::size_t b = 0; b < signal.bands; ++b)
                     for (std::size_t r = 0; r < signal.rows; ++r)
                       for (std::size_t c = 0; c < signal.cols; ++c) {
                         const auto rr = wrap(static_cast<std::ptrdiff_t>(r) + cs.shifts()[b].rows,
                                              signal.rows);
                         const auto cc = wrap(static_cast<std::ptrdiff_t>(c) + cs.shifts()[b].cols,
                                              signal.cols);
                         d(rr * signal.cols + cc, voxel(r, c, b)) += cs.masks()(r, c, b);
                       }
                 },
                 [&](const Mask& m) {
                   for (std::size_t v = 0; v < signal.volume(); ++v) d(v, v) = m.mask().data()[v];
                 },
             },
             op);
  return d;
}

}  // namespace hsipnp::degrade
