#include "hsipnp/cube.hpp"

#include <cmath>
#include <string>

#include "hsipnp/error.hpp"

namespace hsipnp {

Cube::Cube(std::size_t rows, std::size_t cols, std::size_t bands, double fill)
    : extent_{rows, cols, bands}, data_(rows * cols * bands, fill) {}

Cube::Cube(std::size_t rows, std::size_t cols, std::size_t bands, std::vector<double> data)
    : extent_{rows, cols, bands}, data_(std::move(data)) {
  require(data_.size() == extent_.volume(), ErrorCode::DimensionMismatch,
          "Cube: data length " + std::to_string(data_.size()) + " != " +
              std::to_string(extent_.volume()));
}

bool Cube::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

FeatureTensor::FeatureTensor(std::size_t channels, Extent extent, double fill)
    : channels_(channels), extent_(extent), data_(channels * extent.volume(), fill) {}

FeatureTensor FeatureTensor::from_cube(const Cube& cube) {
  FeatureTensor t(1, cube.extent());
  std::copy(cube.data().begin(), cube.data().end(), t.data_.begin());
  return t;
}

Cube FeatureTensor::channel_cube(std::size_t c) const {
  require(c < channels_, ErrorCode::InvalidArgument, "FeatureTensor: channel out of range");
  const auto ch = channel(c);
  return Cube(extent_.rows, extent_.cols, extent_.bands, std::vector<double>(ch.begin(), ch.end()));
}

bool FeatureTensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::DimensionMismatch, "dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::NonFinite: return "non_finite";
    case ErrorCode::SizeGuard: return "size_guard";
    case ErrorCode::EmptyObservation: return "empty_observation";
    case ErrorCode::StaleCache: return "stale_cache";
    case ErrorCode::Diverged: return "diverged";
    case ErrorCode::BadMagic: return "bad_magic";
    case ErrorCode::UnsupportedVersion: return "unsupported_version";
    case ErrorCode::CrcMismatch: return "crc_mismatch";
    case ErrorCode::Truncated: return "truncated";
    case ErrorCode::Io: return "io_error";
  }
  return "unknown";
}

}  // namespace hsipnp
