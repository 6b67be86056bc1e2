#pragma once

#include <filesystem>

#include "hsipnp/cube.hpp"

namespace hsipnp::io {

/// HSC1 cube container, all little-endian:
///   "HSC1" | u32 version (1) | u32 rows | u32 cols | u32 bands |
///   u8 dtype (1 = float32) | 3 reserved bytes |
///   rows*cols*bands float32, band-major | u32 CRC32 of all preceding bytes.
/// Values are stored as float32, so a write/read round-trip rounds doubles.
void write_cube(const Cube& cube, const std::filesystem::path& path);
Cube read_cube(const std::filesystem::path& path);

}  // namespace hsipnp::io
