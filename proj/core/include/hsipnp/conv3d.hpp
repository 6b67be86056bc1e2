#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hsipnp/cube.hpp"

namespace hsipnp {

/// Strides along (bands, rows, cols).
struct Stride3 {
  std::size_t bands = 1;
  std::size_t rows = 1;
  std::size_t cols = 1;
  friend bool operator==(const Stride3&, const Stride3&) = default;
};

enum class Padding {
  Same,   ///< zero padding of (k - 1) / 2 on each side; kernel dims must be odd
  Valid,  ///< no padding
};

/// Which channel set the bias is added to. A kernel used by conv3d adds its
/// bias to the out_channels it produces; a kernel used by conv3d_transposed
/// produces in_channels, so its bias is sized accordingly.
enum class BiasMode { None, PerOutput, PerInput };

/// 3D convolution kernel. Weights are laid out
/// [out_channels][in_channels][depth (bands)][height (rows)][width (cols)].
class Kernel3d {
 public:
  Kernel3d() = default;
  Kernel3d(std::size_t out_channels, std::size_t in_channels, std::size_t depth,
           std::size_t height, std::size_t width, Stride3 stride = {},
           Padding padding = Padding::Same, BiasMode bias = BiasMode::PerOutput);

  std::size_t out_channels() const { return out_; }
  std::size_t in_channels() const { return in_; }
  std::size_t depth() const { return kd_; }
  std::size_t height() const { return kh_; }
  std::size_t width() const { return kw_; }
  std::size_t taps() const { return kd_ * kh_ * kw_; }
  const Stride3& stride() const { return stride_; }
  Padding padding() const { return padding_; }
  BiasMode bias_mode() const { return bias_mode_; }

  std::size_t pad_bands() const { return padding_ == Padding::Same ? (kd_ - 1) / 2 : 0; }
  std::size_t pad_rows() const { return padding_ == Padding::Same ? (kh_ - 1) / 2 : 0; }
  std::size_t pad_cols() const { return padding_ == Padding::Same ? (kw_ - 1) / 2 : 0; }

  double& weight(std::size_t o, std::size_t i, std::size_t d, std::size_t h, std::size_t w) {
    return weights_[(((o * in_ + i) * kd_ + d) * kh_ + h) * kw_ + w];
  }
  double weight(std::size_t o, std::size_t i, std::size_t d, std::size_t h, std::size_t w) const {
    return weights_[(((o * in_ + i) * kd_ + d) * kh_ + h) * kw_ + w];
  }

  std::span<double> weights() { return weights_; }
  std::span<const double> weights() const { return weights_; }
  std::span<double> bias() { return bias_; }
  std::span<const double> bias() const { return bias_; }

  std::size_t parameter_count() const { return weights_.size() + bias_.size(); }

  /// Same kernel with the band axis reversed.
  Kernel3d flipped_bands() const;
  /// Same shape, all parameters zero.
  Kernel3d zeros_like() const;

  /// Output extent of conv3d applied to an input of the given extent.
  Extent output_extent(const Extent& input) const;

  friend bool operator==(const Kernel3d&, const Kernel3d&) = default;

 private:
  std::size_t out_ = 0, in_ = 0, kd_ = 0, kh_ = 0, kw_ = 0;
  Stride3 stride_;
  Padding padding_ = Padding::Same;
  BiasMode bias_mode_ = BiasMode::PerOutput;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

/// Zero-padded strided 3D convolution (cross-correlation, as in CNNs).
/// Adds the kernel bias when its mode is PerOutput.
FeatureTensor conv3d(const FeatureTensor& input, const Kernel3d& kernel);

/// Adjoint of the linear part of conv3d with the same kernel: consumes
/// out_channels, produces in_channels at `output` extent. `output` must be an
/// extent that conv3d maps onto input.extent(). Adds the bias when its mode is
/// PerInput.
FeatureTensor conv3d_transposed(const FeatureTensor& input, const Kernel3d& kernel,
                                const Extent& output);
/// Same, with the output extent taken as input extent times the stride
/// (Same padding) or the minimal valid extent (Valid padding).
FeatureTensor conv3d_transposed(const FeatureTensor& input, const Kernel3d& kernel);

/// Accumulates d<grad_out, conv3d(input)>/d(weights) into grad.weights().
/// Bias gradients are not touched; see accumulate_bias_grad.
void accumulate_conv3d_weight_grad(const FeatureTensor& input, const FeatureTensor& grad_out,
                                   Kernel3d& grad);

/// Sums each channel of `grad` into `bias` (bias.size() == grad.channels()).
void accumulate_bias_grad(const FeatureTensor& grad, std::span<double> bias);

}  // namespace hsipnp
