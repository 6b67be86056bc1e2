#include "hsipnp/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "hsipnp/error.hpp"

namespace hsipnp::metrics {
namespace {

constexpr std::size_t kWindow = 11;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

void require_same(const Cube& gt, const Cube& pred, const char* what) {
  require(gt.extent() == pred.extent(), ErrorCode::DimensionMismatch,
          std::string(what) + ": extent mismatch");
  require(!gt.empty(), ErrorCode::InvalidArgument, std::string(what) + ": empty cube");
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> g{};
  double total = 0.0;
  for (std::size_t i = 0; i < kWindow; ++i) {
    const double d = static_cast<double>(i) - 5.0;
    g[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    total += g[i];
  }
  for (double& v : g) v /= total;
  return g;
}

// Valid-mode separable Gaussian filter of a rows x cols plane.
std::vector<double> filter_valid(const std::vector<double>& plane, std::size_t rows,
                                 std::size_t cols, const std::array<double, kWindow>& g) {
  const std::size_t orows = rows - kWindow + 1;
  const std::size_t ocols = cols - kWindow + 1;
  std::vector<double> tmp(rows * ocols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < ocols; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < kWindow; ++k) s += g[k] * plane[r * cols + c + k];
      tmp[r * ocols + c] = s;
    }
  std::vector<double> out(orows * ocols);
  for (std::size_t r = 0; r < orows; ++r)
    for (std::size_t c = 0; c < ocols; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < kWindow; ++k) s += g[k] * tmp[(r + k) * ocols + c];
      out[r * ocols + c] = s;
    }
  return out;
}

}  // namespace

std::vector<double> psnr_per_band(const Cube& gt, const Cube& pred) {
  require_same(gt, pred, "psnr");
  std::vector<double> out(gt.bands());
  for (std::size_t b = 0; b < gt.bands(); ++b) {
    const auto g = gt.band(b);
    const auto p = pred.band(b);
    double sse = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) sse += (g[i] - p[i]) * (g[i] - p[i]);
    const double mse = sse / static_cast<double>(g.size());
    out[b] = mse == 0.0 ? kPsnrCap : std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
  }
  return out;
}

double psnr(const Cube& gt, const Cube& pred) { return mean(psnr_per_band(gt, pred)); }

std::vector<double> ssim_per_band(const Cube& gt, const Cube& pred) {
  require_same(gt, pred, "ssim");
  require(gt.rows() >= kWindow && gt.cols() >= kWindow, ErrorCode::DimensionMismatch,
          "ssim: planes must be at least 11x11, got " + std::to_string(gt.rows()) + "x" +
              std::to_string(gt.cols()));
  const auto g = gaussian_taps();
  const std::size_t rows = gt.rows(), cols = gt.cols();
  std::vector<double> out(gt.bands());
  std::vector<double> x(rows * cols), y(rows * cols), xx(rows * cols), yy(rows * cols),
      xy(rows * cols);
  for (std::size_t b = 0; b < gt.bands(); ++b) {
    const auto gp = gt.band(b);
    const auto pp = pred.band(b);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = gp[i];
      y[i] = pp[i];
      xx[i] = gp[i] * gp[i];
      yy[i] = pp[i] * pp[i];
      xy[i] = gp[i] * pp[i];
    }
    const auto mx = filter_valid(x, rows, cols, g);
    const auto my = filter_valid(y, rows, cols, g);
    const auto sxx = filter_valid(xx, rows, cols, g);
    const auto syy = filter_valid(yy, rows, cols, g);
    const auto sxy = filter_valid(xy, rows, cols, g);
    double total = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = sxx[i] - mx[i] * mx[i];
      const double vy = syy[i] - my[i] * my[i];
      const double cxy = sxy[i] - mx[i] * my[i];
      total += ((2.0 * mx[i] * my[i] + kC1) * (2.0 * cxy + kC2)) /
               ((mx[i] * mx[i] + my[i] * my[i] + kC1) * (vx + vy + kC2));
    }
    out[b] = total / static_cast<double>(mx.size());
  }
  return out;
}

double ssim(const Cube& gt, const Cube& pred) { return mean(ssim_per_band(gt, pred)); }

SamResult sam(const Cube& gt, const Cube& pred) {
  require_same(gt, pred, "sam");
  SamResult result;
  double total = 0.0;
  std::size_t counted = 0;
  const std::size_t B = gt.bands();
  for (std::size_t r = 0; r < gt.rows(); ++r)
    for (std::size_t c = 0; c < gt.cols(); ++c) {
      double ng = 0.0, np = 0.0;
      for (std::size_t b = 0; b < B; ++b) {
        ng += gt(r, c, b) * gt(r, c, b);
        np += pred(r, c, b) * pred(r, c, b);
      }
      if (ng == 0.0 || np == 0.0) {
        ++result.skipped;
        continue;
      }
      ng = std::sqrt(ng);
      np = std::sqrt(np);
      double diff = 0.0, sum = 0.0;
      for (std::size_t b = 0; b < B; ++b) {
        const double u = gt(r, c, b) / ng;
        const double v = pred(r, c, b) / np;
        diff += (u - v) * (u - v);
        sum += (u + v) * (u + v);
      }
      total += 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
      ++counted;
    }
  require(counted > 0, ErrorCode::EmptyObservation, "sam: every pixel has a zero spectrum");
  result.mean = total / static_cast<double>(counted);
  return result;
}

MetricReport evaluate(const Cube& gt, const Cube& pred) {
  MetricReport r;
  r.psnr_bands = psnr_per_band(gt, pred);
  r.ssim_bands = ssim_per_band(gt, pred);
  r.psnr = mean(r.psnr_bands);
  r.ssim = mean(r.ssim_bands);
  const SamResult s = sam(gt, pred);
  r.sam = s.mean;
  r.sam_skipped = s.skipped;
  return r;
}

}  // namespace hsipnp::metrics
