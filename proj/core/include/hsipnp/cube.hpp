#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hsipnp {

/// Rows x cols x bands extent of a hyperspectral cube.
struct Extent {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t bands = 0;

  std::size_t plane() const { return rows * cols; }
  std::size_t volume() const { return rows * cols * bands; }
  friend bool operator==(const Extent&, const Extent&) = default;
};

/// Dense M x N x B cube stored band-major: B contiguous planes of M x N,
/// row-major within a plane.
class Cube {
 public:
  Cube() = default;
  Cube(std::size_t rows, std::size_t cols, std::size_t bands, double fill = 0.0);
  Cube(Extent extent, double fill = 0.0) : Cube(extent.rows, extent.cols, extent.bands, fill) {}
  Cube(std::size_t rows, std::size_t cols, std::size_t bands, std::vector<double> data);

  std::size_t rows() const { return extent_.rows; }
  std::size_t cols() const { return extent_.cols; }
  std::size_t bands() const { return extent_.bands; }
  const Extent& extent() const { return extent_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c, std::size_t b) {
    return data_[(b * extent_.rows + r) * extent_.cols + c];
  }
  double operator()(std::size_t r, std::size_t c, std::size_t b) const {
    return data_[(b * extent_.rows + r) * extent_.cols + c];
  }

  std::span<double> band(std::size_t b) {
    return {data_.data() + b * extent_.plane(), extent_.plane()};
  }
  std::span<const double> band(std::size_t b) const {
    return {data_.data() + b * extent_.plane(), extent_.plane()};
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& storage() { return data_; }

  bool all_finite() const;

  friend bool operator==(const Cube&, const Cube&) = default;

 private:
  Extent extent_;
  std::vector<double> data_;
};

/// C x M x N x B activation tensor. Channel-major, then band-major, so each
/// channel is laid out exactly like a Cube.
class FeatureTensor {
 public:
  FeatureTensor() = default;
  FeatureTensor(std::size_t channels, Extent extent, double fill = 0.0);

  static FeatureTensor from_cube(const Cube& cube);
  Cube channel_cube(std::size_t c) const;

  std::size_t channels() const { return channels_; }
  const Extent& extent() const { return extent_; }
  std::size_t rows() const { return extent_.rows; }
  std::size_t cols() const { return extent_.cols; }
  std::size_t bands() const { return extent_.bands; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t c, std::size_t r, std::size_t col, std::size_t b) {
    return data_[((c * extent_.bands + b) * extent_.rows + r) * extent_.cols + col];
  }
  double operator()(std::size_t c, std::size_t r, std::size_t col, std::size_t b) const {
    return data_[((c * extent_.bands + b) * extent_.rows + r) * extent_.cols + col];
  }

  std::span<double> channel(std::size_t c) {
    return {data_.data() + c * extent_.volume(), extent_.volume()};
  }
  std::span<const double> channel(std::size_t c) const {
    return {data_.data() + c * extent_.volume(), extent_.volume()};
  }
  /// One M x N plane of channel c at band b.
  std::span<double> plane(std::size_t c, std::size_t b) {
    return {data_.data() + (c * extent_.bands + b) * extent_.plane(), extent_.plane()};
  }
  std::span<const double> plane(std::size_t c, std::size_t b) const {
    return {data_.data() + (c * extent_.bands + b) * extent_.plane(), extent_.plane()};
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool all_finite() const;
  bool same_shape(const FeatureTensor& other) const {
    return channels_ == other.channels_ && extent_ == other.extent_;
  }

  friend bool operator==(const FeatureTensor&, const FeatureTensor&) = default;

 private:
  std::size_t channels_ = 0;
  Extent extent_;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace hsipnp
