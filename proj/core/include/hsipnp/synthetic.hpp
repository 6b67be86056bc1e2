#pragma once

#include <cstddef>
#include <cstdint>

#include "hsipnp/cube.hpp"

namespace hsipnp {

/// Linear-mixing scene: a few smooth material spectra weighted by soft
/// region abundances and a low-frequency shading field.
struct SceneConfig {
  std::size_t materials = 4;
  std::size_t regions = 7;
  /// Width of the soft region boundaries, in pixels.
  double edge_softness = 1.5;
};

/// Deterministic synthetic HSI with values in [0, 1].
Cube synthetic_scene(Extent extent, std::uint64_t seed, const SceneConfig& config = {});

}  // namespace hsipnp
