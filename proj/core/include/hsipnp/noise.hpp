#pragma once

#include <cstdint>
#include <span>
#include <variant>

#include "hsipnp/cube.hpp"

namespace hsipnp::degrade {

// Noise levels are on the 0-255 scale; data is assumed normalized to [0, 1].

struct IidGaussian {
  double sigma = 0.0;
};

/// Every band gets its own sigma, uniform on [0, sigma_max].
struct NonIidGaussian {
  double sigma_max = 0.0;
};

/// Dark stripes: on ceil(B * band_fraction) random bands, a uniform
/// [col_fraction_min, col_fraction_max] share of columns is offset by
/// -U[0.25, 0.75] (one offset per column).
struct Stripe {
  double band_fraction = 1.0 / 3.0;
  double col_fraction_min = 0.05;
  double col_fraction_max = 0.15;
};

/// Salt-and-pepper: on ceil(B * band_fraction) random bands, a share
/// p ~ U[ratio_min, ratio_max] of pixels is set to 0 or 1.
struct Impulse {
  double band_fraction = 1.0 / 3.0;
  double ratio_min = 0.1;
  double ratio_max = 0.7;
};

struct NoiseModel {
  std::variant<IidGaussian, NonIidGaussian, Stripe, Impulse> kind;
  std::uint64_t seed = 0;
};

/// x + e for one noise model; deterministic given model.seed.
Cube add_noise(const Cube& x, const NoiseModel& model);
/// Applies the models left to right (e.g. non-iid Gaussian then stripes).
Cube add_noise(const Cube& x, std::span<const NoiseModel> models);

}  // namespace hsipnp::degrade
