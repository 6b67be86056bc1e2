#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hsipnp::io {

/// Little-endian byte buffer helpers shared by the file formats.
void put_u32(std::vector<unsigned char>& out, std::uint32_t v);
void put_f32(std::vector<unsigned char>& out, float v);
std::uint32_t get_u32(std::span<const unsigned char> in, std::size_t at);
float get_f32(std::span<const unsigned char> in, std::size_t at);

std::uint32_t crc32(std::span<const unsigned char> bytes);

/// Appends the CRC32 trailer and writes via a temporary file plus rename.
void write_with_crc(const std::filesystem::path& path, std::vector<unsigned char> bytes);
std::vector<unsigned char> read_file(const std::filesystem::path& path);
/// Checks and removes the CRC32 trailer.
void strip_crc(std::vector<unsigned char>& bytes, const std::string& what);

}  // namespace hsipnp::io
