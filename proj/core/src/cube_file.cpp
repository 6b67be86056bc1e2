#include "hsipnp/cube_file.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "hsipnp/binary_io.hpp"
#include "hsipnp/error.hpp"

namespace hsipnp::io {
namespace {

constexpr char kMagic[4] = {'H', 'S', 'C', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr unsigned char kFloat32 = 1;
constexpr std::size_t kHeader = 24;

}  // namespace

void write_cube(const Cube& cube, const std::filesystem::path& path) {
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  require(cube.rows() <= kMax && cube.cols() <= kMax && cube.bands() <= kMax,
          ErrorCode::InvalidArgument, "write_cube: extent does not fit the header");
  std::vector<unsigned char> bytes(kMagic, kMagic + 4);
  bytes.reserve(kHeader + 4 * cube.size() + 4);
  put_u32(bytes, kVersion);
  put_u32(bytes, static_cast<std::uint32_t>(cube.rows()));
  put_u32(bytes, static_cast<std::uint32_t>(cube.cols()));
  put_u32(bytes, static_cast<std::uint32_t>(cube.bands()));
  bytes.insert(bytes.end(), {kFloat32, 0, 0, 0});
  for (double v : cube.data()) put_f32(bytes, static_cast<float>(v));
  write_with_crc(path, std::move(bytes));
}

Cube read_cube(const std::filesystem::path& path) {
  const std::string what = "cube file " + path.string();
  std::vector<unsigned char> bytes = read_file(path);
  require(bytes.size() >= kHeader, ErrorCode::Truncated, what + ": truncated header");
  require(std::memcmp(bytes.data(), kMagic, 4) == 0, ErrorCode::BadMagic,
          what + ": not an HSC1 file");
  const std::uint32_t version = get_u32(bytes, 4);
  require(version == kVersion, ErrorCode::UnsupportedVersion,
          what + ": unsupported version " + std::to_string(version));
  const std::size_t rows = get_u32(bytes, 8);
  const std::size_t cols = get_u32(bytes, 12);
  const std::size_t bands = get_u32(bytes, 16);
  require(bytes[20] == kFloat32, ErrorCode::UnsupportedVersion,
          what + ": unsupported dtype tag " + std::to_string(bytes[20]));
  const std::size_t count = rows * cols * bands;
  const std::size_t expected = kHeader + 4 * count + 4;
  require(bytes.size() >= expected, ErrorCode::Truncated,
          what + ": payload truncated (" + std::to_string(bytes.size()) + " of " +
              std::to_string(expected) + " bytes)");
  require(bytes.size() == expected, ErrorCode::InvalidArgument,
          what + ": trailing bytes after the CRC");
  strip_crc(bytes, what);
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) data[i] = get_f32(bytes, kHeader + 4 * i);
  return Cube(rows, cols, bands, std::move(data));
}

}  // namespace hsipnp::io
