#include "hsipnp/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <type_traits>
#include <vector>

#include "hsipnp/error.hpp"

namespace hsipnp::degrade {
namespace {

void require_fraction(double f, const char* what) {
  require(f >= 0.0 && f <= 1.0, ErrorCode::InvalidArgument,
          std::string("noise: ") + what + " must lie in [0, 1]");
}

std::vector<std::size_t> pick_bands(std::size_t bands, double fraction, std::mt19937_64& rng) {
  const auto count = static_cast<std::size_t>(
      std::ceil(static_cast<double>(bands) * fraction - 1e-9));
  std::vector<std::size_t> order(bands);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min(count, bands));
  std::sort(order.begin(), order.end());
  return order;
}

void gaussian_band(Cube& x, std::size_t b, double sigma255, std::mt19937_64& rng) {
  if (sigma255 == 0.0) return;
  std::normal_distribution<double> n(0.0, sigma255 / 255.0);
  for (double& v : x.band(b)) v += n(rng);
}

}  // namespace

Cube add_noise(const Cube& x, const NoiseModel& model) {
  Cube out = x;
  std::mt19937_64 rng(model.seed);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IidGaussian>) {
          require(m.sigma >= 0.0, ErrorCode::InvalidArgument, "noise: sigma must be >= 0");
          for (std::size_t b = 0; b < out.bands(); ++b) gaussian_band(out, b, m.sigma, rng);
        } else if constexpr (std::is_same_v<T, NonIidGaussian>) {
          require(m.sigma_max >= 0.0, ErrorCode::InvalidArgument, "noise: sigma must be >= 0");
          std::uniform_real_distribution<double> level(0.0, m.sigma_max);
          for (std::size_t b = 0; b < out.bands(); ++b) gaussian_band(out, b, level(rng), rng);
        } else if constexpr (std::is_same_v<T, Stripe>) {
          require_fraction(m.band_fraction, "band fraction");
          require_fraction(m.col_fraction_min, "column fraction");
          require_fraction(m.col_fraction_max, "column fraction");
          require(m.col_fraction_min <= m.col_fraction_max, ErrorCode::InvalidArgument,
                  "noise: column fraction range is inverted");
          const auto lo = static_cast<std::size_t>(
              std::lround(m.col_fraction_min * static_cast<double>(out.cols())));
          const auto hi = static_cast<std::size_t>(
              std::lround(m.col_fraction_max * static_cast<double>(out.cols())));
          std::uniform_real_distribution<double> offset(0.25, 0.75);
          for (std::size_t b : pick_bands(out.bands(), m.band_fraction, rng)) {
            std::uniform_int_distribution<std::size_t> how_many(lo, hi);
            const std::size_t n = how_many(rng);
            std::vector<std::size_t> cols(out.cols());
            std::iota(cols.begin(), cols.end(), std::size_t{0});
            std::shuffle(cols.begin(), cols.end(), rng);
            for (std::size_t k = 0; k < n; ++k) {
              const double delta = offset(rng);
              for (std::size_t r = 0; r < out.rows(); ++r) out(r, cols[k], b) -= delta;
            }
          }
        } else {
          require_fraction(m.band_fraction, "band fraction");
          require_fraction(m.ratio_min, "impulse ratio");
          require_fraction(m.ratio_max, "impulse ratio");
          require(m.ratio_min <= m.ratio_max, ErrorCode::InvalidArgument,
                  "noise: impulse ratio range is inverted");
          std::uniform_real_distribution<double> ratio(m.ratio_min, m.ratio_max);
          std::uniform_real_distribution<double> coin(0.0, 1.0);
          const std::size_t plane = out.rows() * out.cols();
          for (std::size_t b : pick_bands(out.bands(), m.band_fraction, rng)) {
            const auto n = static_cast<std::size_t>(std::lround(ratio(rng) * static_cast<double>(plane)));
            std::vector<std::size_t> px(plane);
            std::iota(px.begin(), px.end(), std::size_t{0});
            std::shuffle(px.begin(), px.end(), rng);
            auto band = out.band(b);
            for (std::size_t k = 0; k < n; ++k) band[px[k]] = coin(rng) < 0.5 ? 0.0 : 1.0;
          }
        }
      },
      model.kind);
  return out;
}

Cube add_noise(const Cube& x, std::span<const NoiseModel> models) {
  Cube out = x;
  for (const auto& m : models) out = add_noise(out, m);
  return out;
}

}  // namespace hsipnp::degrade
