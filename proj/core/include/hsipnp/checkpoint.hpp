#pragma once

#include <filesystem>

#include "hsipnp/grcnn.hpp"

namespace hsipnp::grcnn {

/// GRC1 checkpoint: "GRC1", u32 version, u32 byte length + JSON architecture
/// descriptor, float32 parameters in declaration order, CRC32 of everything
/// before it. All integers little-endian. Written atomically.
void save_checkpoint(const GrcnnModel& model, const std::filesystem::path& path);
GrcnnModel load_checkpoint(const std::filesystem::path& path);

}  // namespace hsipnp::grcnn
