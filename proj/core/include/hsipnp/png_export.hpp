#pragma once

#include <cstddef>
#include <filesystem>

#include "hsipnp/cube.hpp"

namespace hsipnp::io {

/// 8-bit grayscale PNG of one band: value v maps to round(255 clamp(v, 0, 1)).
void write_band_png(const Cube& cube, std::size_t band, const std::filesystem::path& path);

/// |gt - pred| of one band scaled by `gain`, then mapped like write_band_png;
/// brighter pixels mean larger error.
void write_error_map_png(const Cube& gt, const Cube& pred, std::size_t band,
                         const std::filesystem::path& path, double gain = 5.0);

}  // namespace hsipnp::io
