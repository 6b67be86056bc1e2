#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hsipnp/conv3d.hpp"
#include "hsipnp/cube.hpp"
#include "hsipnp/grconv.hpp"

namespace hsipnp::grcnn {

/// Two 3x3x3 GRConv units on the main path plus a 1x1x1 GRConv projection
/// shortcut; output = main + shortcut, spatial extent unchanged.
struct ResBlock {
  GrconvUnit first;
  GrconvUnit second;
  GrconvUnit shortcut;

  ResBlock() = default;
  ResBlock(std::size_t in_channels, std::size_t out_channels, Direction direction);

  std::size_t in_channels() const { return first.in_channels(); }
  std::size_t out_channels() const { return second.out_channels(); }

  template <class F>
  void for_each_unit(F&& f) {
    f(first);
    f(second);
    f(shortcut);
  }
  template <class F>
  void for_each_unit(F&& f) const {
    f(first);
    f(second);
    f(shortcut);
  }
};

/// Network shape. widths[0] is the full-resolution feature width (stacked
/// over both passes of the entry unit, so it must be even); widths[k] is the
/// width after encoder stage k.
struct Architecture {
  std::size_t depth = 2;
  std::vector<std::size_t> widths{8, 16, 32};
  bool uses_noise_map = true;
  /// Noise levels (0-255 scale) the model was trained for; denoiser
  /// adapters clamp requests to this range.
  double sigma_min = 0.0;
  double sigma_max = 50.0;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Single-direction units in encoder stage k (0-based) run forward for even k
/// and backward for odd k; the decoder stage at the same resolution mirrors it.
Direction stage_direction(std::size_t stage);

/// Constant extra input channel of value sigma / 255.
struct NoiseLevelMap {
  double sigma = 0.0;
};

class GrcnnModel;

/// Activations of one forward pass, tied to the model state that made it.
struct ForwardPass {
  Cube output;

 private:
  friend class GrcnnModel;
  std::uint64_t stamp = 0;
  Extent input_extent;
  GrconvCache entry;
  struct Stage {
    GrconvCache down;  // or up, in the decoder
    GrconvCache res_first, res_second, res_shortcut;
  };
  std::vector<Stage> encoder;
  std::vector<Stage> decoder;
  GrconvCache exit;
  FeatureTensor exit_output;
};

/// Encoder-decoder gated recurrent network:
///   entry (bidirectional GRConv)
///   -> depth x [down GRConv (stride 2 in rows/cols), ResBlock]
///   -> depth x [up GRConv (transposed, stride 2), concat encoder skip, ResBlock]
///   -> exit (bidirectional GRConv, 1 channel per pass)
///   -> 1x1x1 linear projection of the two exit channels to the output cube.
class GrcnnModel {
 public:
  GrcnnModel() = default;
  GrcnnModel(Architecture arch, std::uint64_t seed);
  GrcnnModel(const GrcnnModel& other);
  GrcnnModel& operator=(const GrcnnModel& other);
  GrcnnModel(GrcnnModel&&) noexcept;
  GrcnnModel& operator=(GrcnnModel&&) noexcept;

  const Architecture& architecture() const { return arch_; }
  std::size_t input_channels() const { return arch_.uses_noise_map ? 2 : 1; }

  std::size_t parameter_count() const;
  /// All weights and biases, flattened in declaration order (see
  /// for_each_kernel).
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> values);

  Cube forward(const Cube& noisy, std::optional<NoiseLevelMap> map) const;
  ForwardPass forward_cached(const Cube& noisy, std::optional<NoiseLevelMap> map) const;
  /// Gradient of <grad_output, forward(noisy)> with respect to parameters(),
  /// in the same order.
  std::vector<double> backward(const ForwardPass& pass, const Cube& grad_output) const;

  /// Model whose output on band-reversed input is the band-reversed output
  /// of this model.
  GrcnnModel mirrored() const;

  // Read access to the layers.
  const GrconvUnit& entry() const { return entry_; }
  const GrconvUnit& exit() const { return exit_; }
  const Kernel3d& projection() const { return projection_; }
  const std::vector<GrconvUnit>& down() const { return down_; }
  const std::vector<ResBlock>& encoder_blocks() const { return enc_blocks_; }
  const std::vector<GrconvUnit>& up() const { return up_; }
  const std::vector<ResBlock>& decoder_blocks() const { return dec_blocks_; }

  /// Mutable layer access; invalidates outstanding ForwardPass objects.
  GrconvUnit& mutable_exit() { touch(); return exit_; }
  Kernel3d& mutable_projection() { touch(); return projection_; }

  /// Visits every kernel in declaration order: entry, per encoder stage
  /// (down, block first/second/shortcut), per decoder stage from the deepest
  /// (up, block first/second/shortcut), exit, projection.
  template <class F>
  void for_each_kernel(F&& f) const {
    const auto unit = [&](const GrconvUnit& u) { u.for_each_kernel(f); };
    unit(entry_);
    for (std::size_t s = 0; s < down_.size(); ++s) {
      unit(down_[s]);
      enc_blocks_[s].for_each_unit(unit);
    }
    for (std::size_t s = 0; s < up_.size(); ++s) {
      unit(up_[s]);
      dec_blocks_[s].for_each_unit(unit);
    }
    unit(exit_);
    f(projection_);
  }
  template <class F>
  void for_each_kernel(F&& f) {
    touch();
    const auto unit = [&](GrconvUnit& u) { u.for_each_kernel(f); };
    unit(entry_);
    for (std::size_t s = 0; s < down_.size(); ++s) {
      unit(down_[s]);
      enc_blocks_[s].for_each_unit(unit);
    }
    for (std::size_t s = 0; s < up_.size(); ++s) {
      unit(up_[s]);
      dec_blocks_[s].for_each_unit(unit);
    }
    unit(exit_);
    f(projection_);
  }

 private:
  void touch();
  FeatureTensor input_tensor(const Cube& noisy, std::optional<NoiseLevelMap> map) const;
  Cube run(const Cube& noisy, std::optional<NoiseLevelMap> map, ForwardPass* pass) const;

  Architecture arch_;
  GrconvUnit entry_;
  std::vector<GrconvUnit> down_;      // encoder stage s
  std::vector<ResBlock> enc_blocks_;  // encoder stage s
  std::vector<GrconvUnit> up_;        // decoder, deepest first
  std::vector<ResBlock> dec_blocks_;  // decoder, deepest first
  GrconvUnit exit_;
  Kernel3d projection_;
  std::uint64_t stamp_ = 0;
};

Cube model_forward(const GrcnnModel& model, const Cube& noisy,
                   std::optional<NoiseLevelMap> map = std::nullopt);
std::vector<double> model_backward(const GrcnnModel& model, const ForwardPass& pass,
                                   const Cube& grad_output);

/// D_sigma: builds the noise-level map when the model uses one.
Cube denoise(const GrcnnModel& model, const Cube& noisy, double sigma);

}  // namespace hsipnp::grcnn
