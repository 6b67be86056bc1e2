#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "hsipnp/conv3d.hpp"
#include "hsipnp/cube.hpp"

namespace hsipnp::grcnn {

enum class Direction { Forward, Backward, Bidirectional };

Direction reversed(Direction d);

/// One recurrent pass: gate kernel h_w, candidate kernel h_f and the band
/// order the fusion h_i = (1 - w_i) h_{i-1} + w_i f_i runs in (h_0 = 0).
struct GatePass {
  Kernel3d weight_kernel;
  Kernel3d feature_kernel;
  Direction direction = Direction::Forward;  // Forward or Backward only
};

/// Activations kept by GrconvUnit::forward for the backward pass.
struct GrconvCache {
  FeatureTensor input;
  struct Pass {
    FeatureTensor w;  // sigmoid(h_w * I)
    FeatureTensor f;  // tanh(h_f * I)
    FeatureTensor h;  // fused maps
  };
  std::vector<Pass> passes;
};

/// Gated recurrent convolution unit. A bidirectional unit owns two passes
/// (forward then backward) and stacks their fused maps along channels, so it
/// emits 2 * out_per_pass channels. A transposed unit replaces both
/// convolutions with conv3d_transposed (used for upsampling).
class GrconvUnit {
 public:
  GrconvUnit() = default;
  GrconvUnit(std::size_t in_channels, std::size_t out_per_pass, std::size_t kernel_size,
             Direction direction, bool transposed = false, Stride3 stride = {});

  std::size_t in_channels() const { return in_; }
  std::size_t out_per_pass() const { return out_per_pass_; }
  std::size_t out_channels() const { return out_per_pass_ * passes_.size(); }
  Direction direction() const;
  bool transposed() const { return transposed_; }
  const Stride3& stride() const { return stride_; }

  std::span<GatePass> passes() { return passes_; }
  std::span<const GatePass> passes() const { return passes_; }

  /// Output extent for an input of the given extent.
  Extent output_extent(const Extent& input) const;

  FeatureTensor forward(const FeatureTensor& input, GrconvCache* cache = nullptr) const;

  /// Back-propagates grad_out through the unit. Parameter gradients are
  /// accumulated into `grads` (a unit of identical shape); returns the
  /// gradient with respect to the input.
  FeatureTensor backward(const GrconvCache& cache, const FeatureTensor& grad_out,
                         GrconvUnit& grads) const;

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
  void initialize(std::mt19937_64& rng);

  /// Kernels flipped along the band axis and every pass's direction swapped:
  /// mirrored(x reversed along bands) == (unit(x)) reversed along bands.
  GrconvUnit mirrored() const;
  GrconvUnit zeros_like() const;

  template <class F>
  void for_each_kernel(F&& f) {
    for (auto& p : passes_) {
      f(p.weight_kernel);
      f(p.feature_kernel);
    }
  }
  template <class F>
  void for_each_kernel(F&& f) const {
    for (const auto& p : passes_) {
      f(p.weight_kernel);
      f(p.feature_kernel);
    }
  }

 private:
  FeatureTensor convolve(const FeatureTensor& input, const Kernel3d& k) const;

  std::size_t in_ = 0;
  std::size_t out_per_pass_ = 0;
  bool transposed_ = false;
  Stride3 stride_;
  std::vector<GatePass> passes_;
};

/// Band recurrence of one pass, in place on h: h_i = (1 - w_i) h_{i-1} + w_i f_i.
void fuse_bands(const FeatureTensor& w, const FeatureTensor& f, Direction direction,
                FeatureTensor& h);

}  // namespace hsipnp::grcnn
