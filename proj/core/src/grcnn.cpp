#include "hsipnp/grcnn.hpp"

#include <atomic>
#include <random>
#include <string>

#include "hsipnp/elementwise.hpp"
#include "hsipnp/error.hpp"

namespace hsipnp::grcnn {
namespace {

std::uint64_t next_stamp() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

constexpr Stride3 kHalve{1, 2, 2};

struct ResBlockCache {
  GrconvCache* first;
  GrconvCache* second;
  GrconvCache* shortcut;
};

FeatureTensor res_forward(const ResBlock& block, const FeatureTensor& x, ResBlockCache c) {
  FeatureTensor main = block.second.forward(block.first.forward(x, c.first), c.second);
  add_inplace(main, block.shortcut.forward(x, c.shortcut));
  return main;
}

FeatureTensor res_backward(const ResBlock& block, const ResBlockCache& c, const FeatureTensor& d,
                           ResBlock& g) {
  FeatureTensor d_mid = block.second.backward(*c.second, d, g.second);
  FeatureTensor dx = block.first.backward(*c.first, d_mid, g.first);
  add_inplace(dx, block.shortcut.backward(*c.shortcut, d, g.shortcut));
  return dx;
}

}  // namespace

Direction stage_direction(std::size_t stage) {
  return stage % 2 == 0 ? Direction::Forward : Direction::Backward;
}

ResBlock::ResBlock(std::size_t in_channels, std::size_t out_channels, Direction direction)
    : first(in_channels, out_channels, 3, direction),
      second(out_channels, out_channels, 3, direction),
      shortcut(in_channels, out_channels, 1, direction) {}

GrcnnModel::GrcnnModel(Architecture arch, std::uint64_t seed)
    : arch_(std::move(arch)), stamp_(next_stamp()) {
  require(arch_.widths.size() == arch_.depth + 1, ErrorCode::InvalidArgument,
          "GrcnnModel: need depth + 1 widths");
  for (std::size_t w : arch_.widths)
    require(w > 0, ErrorCode::InvalidArgument, "GrcnnModel: widths must be positive");
  require(arch_.widths[0] % 2 == 0, ErrorCode::InvalidArgument,
          "GrcnnModel: widths[0] must be even (two stacked entry passes)");
  require(arch_.sigma_min >= 0.0 && arch_.sigma_min <= arch_.sigma_max,
          ErrorCode::InvalidArgument, "GrcnnModel: invalid trained sigma range");

  const auto& w = arch_.widths;
  entry_ = GrconvUnit(input_channels(), w[0] / 2, 3, Direction::Bidirectional);
  for (std::size_t s = 0; s < arch_.depth; ++s) {
    down_.emplace_back(w[s], w[s], 3, stage_direction(s), false, kHalve);
    enc_blocks_.emplace_back(w[s], w[s + 1], stage_direction(s));
  }
  for (std::size_t j = 0; j < arch_.depth; ++j) {
    const std::size_t s = arch_.depth - 1 - j;
    up_.emplace_back(w[s + 1], w[s], 3, stage_direction(s), true, kHalve);
    dec_blocks_.emplace_back(2 * w[s], w[s], stage_direction(s));
  }
  exit_ = GrconvUnit(w[0], 1, 3, Direction::Bidirectional);
  projection_ = Kernel3d(1, 2, 1, 1, 1);

  std::mt19937_64 rng(seed);
  entry_.initialize(rng);
  for (std::size_t s = 0; s < arch_.depth; ++s) {
    down_[s].initialize(rng);
    enc_blocks_[s].for_each_unit([&](GrconvUnit& u) { u.initialize(rng); });
  }
  for (std::size_t j = 0; j < arch_.depth; ++j) {
    up_[j].initialize(rng);
    dec_blocks_[j].for_each_unit([&](GrconvUnit& u) { u.initialize(rng); });
  }
  exit_.initialize(rng);
  std::uniform_real_distribution<double> u(-1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
  for (double& v : projection_.weights()) v = u(rng);
}

GrcnnModel::GrcnnModel(const GrcnnModel& other)
    : arch_(other.arch_),
      entry_(other.entry_),
      down_(other.down_),
      enc_blocks_(other.enc_blocks_),
      up_(other.up_),
      dec_blocks_(other.dec_blocks_),
      exit_(other.exit_),
      projection_(other.projection_),
      stamp_(next_stamp()) {}

GrcnnModel& GrcnnModel::operator=(const GrcnnModel& other) {
  if (this != &other) {
    GrcnnModel copy(other);
    *this = std::move(copy);
  }
  return *this;
}

GrcnnModel::GrcnnModel(GrcnnModel&& other) noexcept
    : arch_(std::move(other.arch_)),
      entry_(std::move(other.entry_)),
      down_(std::move(other.down_)),
      enc_blocks_(std::move(other.enc_blocks_)),
      up_(std::move(other.up_)),
      dec_blocks_(std::move(other.dec_blocks_)),
      exit_(std::move(other.exit_)),
      projection_(std::move(other.projection_)),
      stamp_(other.stamp_) {
  other.stamp_ = next_stamp();
}

GrcnnModel& GrcnnModel::operator=(GrcnnModel&& other) noexcept {
  arch_ = std::move(other.arch_);
  entry_ = std::move(other.entry_);
  down_ = std::move(other.down_);
  enc_blocks_ = std::move(other.enc_blocks_);
  up_ = std::move(other.up_);
  dec_blocks_ = std::move(other.dec_blocks_);
  exit_ = std::move(other.exit_);
  projection_ = std::move(other.projection_);
  stamp_ = other.stamp_;
  other.stamp_ = next_stamp();
  return *this;
}

void GrcnnModel::touch() { stamp_ = next_stamp(); }

std::size_t GrcnnModel::parameter_count() const {
  std::size_t n = 0;
  for_each_kernel([&](const Kernel3d& k) { n += k.parameter_count(); });
  return n;
}

std::vector<double> GrcnnModel::parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for_each_kernel([&](const Kernel3d& k) {
    out.insert(out.end(), k.weights().begin(), k.weights().end());
    out.insert(out.end(), k.bias().begin(), k.bias().end());
  });
  return out;
}

void GrcnnModel::set_parameters(std::span<const double> values) {
  require(values.size() == parameter_count(), ErrorCode::DimensionMismatch,
          "GrcnnModel: expected " + std::to_string(parameter_count()) + " parameters, got " +
              std::to_string(values.size()));
  std::size_t at = 0;
  for_each_kernel([&](Kernel3d& k) {
    for (double& w : k.weights()) w = values[at++];
    for (double& b : k.bias()) b = values[at++];
  });
}

FeatureTensor GrcnnModel::input_tensor(const Cube& noisy, std::optional<NoiseLevelMap> map) const {
  require(!noisy.empty(), ErrorCode::InvalidArgument, "GrcnnModel: empty input");
  const std::size_t multiple = std::size_t{1} << arch_.depth;
  require(noisy.rows() % multiple == 0 && noisy.cols() % multiple == 0,
          ErrorCode::DimensionMismatch,
          "GrcnnModel: rows and cols must be divisible by " + std::to_string(multiple) + ", got " +
              std::to_string(noisy.rows()) + "x" + std::to_string(noisy.cols()));
  require(map.has_value() == arch_.uses_noise_map, ErrorCode::InvalidArgument,
          arch_.uses_noise_map ? "GrcnnModel: this model needs a noise-level map"
                               : "GrcnnModel: this model takes no noise-level map");
  FeatureTensor x = FeatureTensor::from_cube(noisy);
  if (map) {
    require(map->sigma >= 0.0, ErrorCode::InvalidArgument,
            "GrcnnModel: noise level must be non-negative");
    x = concat_channels(x, FeatureTensor(1, noisy.extent(), map->sigma / 255.0));
  }
  return x;
}

Cube GrcnnModel::run(const Cube& noisy, std::optional<NoiseLevelMap> map, ForwardPass* pass) const {
  const FeatureTensor x = input_tensor(noisy, map);
  if (pass != nullptr) {
    pass->stamp = stamp_;
    pass->input_extent = noisy.extent();
    pass->encoder.assign(arch_.depth, {});
    pass->decoder.assign(arch_.depth, {});
  }
  const auto slot = [&](GrconvCache ForwardPass::*member) -> GrconvCache* {
    return pass != nullptr ? &(pass->*member) : nullptr;
  };
  const auto stage_cache = [&](std::vector<ForwardPass::Stage> ForwardPass::*member,
                               std::size_t i) -> ForwardPass::Stage* {
    return pass != nullptr ? &(pass->*member)[i] : nullptr;
  };
  const auto block_cache = [](ForwardPass::Stage* st) {
    return st != nullptr ? ResBlockCache{&st->res_first, &st->res_second, &st->res_shortcut}
                         : ResBlockCache{nullptr, nullptr, nullptr};
  };

  std::vector<FeatureTensor> skips;
  skips.push_back(entry_.forward(x, slot(&ForwardPass::entry)));
  FeatureTensor cur = skips.back();
  for (std::size_t s = 0; s < arch_.depth; ++s) {
    ForwardPass::Stage* st = stage_cache(&ForwardPass::encoder, s);
    cur = down_[s].forward(cur, st != nullptr ? &st->down : nullptr);
    cur = res_forward(enc_blocks_[s], cur, block_cache(st));
    if (s + 1 < arch_.depth) skips.push_back(cur);
  }
  for (std::size_t j = 0; j < arch_.depth; ++j) {
    const std::size_t s = arch_.depth - 1 - j;
    ForwardPass::Stage* st = stage_cache(&ForwardPass::decoder, j);
    cur = up_[j].forward(cur, st != nullptr ? &st->down : nullptr);
    cur = concat_channels(cur, skips[s]);
    cur = res_forward(dec_blocks_[j], cur, block_cache(st));
  }
  FeatureTensor fused = exit_.forward(cur, slot(&ForwardPass::exit));
  FeatureTensor out = conv3d(fused, projection_);
  if (pass != nullptr) pass->exit_output = std::move(fused);
  return out.channel_cube(0);
}

Cube GrcnnModel::forward(const Cube& noisy, std::optional<NoiseLevelMap> map) const {
  return run(noisy, map, nullptr);
}

ForwardPass GrcnnModel::forward_cached(const Cube& noisy, std::optional<NoiseLevelMap> map) const {
  ForwardPass pass;
  pass.output = run(noisy, map, &pass);
  return pass;
}

std::vector<double> GrcnnModel::backward(const ForwardPass& pass, const Cube& grad_output) const {
  require(pass.stamp == stamp_, ErrorCode::StaleCache,
          "GrcnnModel: forward cache is stale (model changed or cache from another model)");
  require(grad_output.extent() == pass.input_extent, ErrorCode::DimensionMismatch,
          "GrcnnModel: gradient extent does not match the forward pass");

  GrcnnModel g(*this);
  g.for_each_kernel([](Kernel3d& k) { k = k.zeros_like(); });

  const FeatureTensor d_out = FeatureTensor::from_cube(grad_output);
  accumulate_conv3d_weight_grad(pass.exit_output, d_out, g.projection_);
  accumulate_bias_grad(d_out, g.projection_.bias());
  FeatureTensor d = conv3d_transposed(d_out, projection_, pass.exit_output.extent());
  d = exit_.backward(pass.exit, d, g.exit_);

  std::vector<FeatureTensor> skip_grads(arch_.depth);
  for (std::size_t j = arch_.depth; j-- > 0;) {
    const std::size_t s = arch_.depth - 1 - j;
    const auto& st = pass.decoder[j];
    const ResBlockCache c{const_cast<GrconvCache*>(&st.res_first),
                          const_cast<GrconvCache*>(&st.res_second),
                          const_cast<GrconvCache*>(&st.res_shortcut)};
    const FeatureTensor d_cat = res_backward(dec_blocks_[j], c, d, g.dec_blocks_[j]);
    const std::size_t w = arch_.widths[s];
    skip_grads[s] = slice_channels(d_cat, w, w);
    d = up_[j].backward(st.down, slice_channels(d_cat, 0, w), g.up_[j]);
  }
  for (std::size_t s = arch_.depth; s-- > 0;) {
    if (s + 1 < arch_.depth) add_inplace(d, skip_grads[s + 1]);
    const auto& st = pass.encoder[s];
    const ResBlockCache c{const_cast<GrconvCache*>(&st.res_first),
                          const_cast<GrconvCache*>(&st.res_second),
                          const_cast<GrconvCache*>(&st.res_shortcut)};
    d = res_backward(enc_blocks_[s], c, d, g.enc_blocks_[s]);
    d = down_[s].backward(st.down, d, g.down_[s]);
  }
  add_inplace(d, skip_grads[0]);
  entry_.backward(pass.entry, d, g.entry_);
  return g.parameters();
}

GrcnnModel GrcnnModel::mirrored() const {
  GrcnnModel m(*this);
  m.entry_ = entry_.mirrored();
  for (auto& u : m.down_) u = u.mirrored();
  for (auto& u : m.up_) u = u.mirrored();
  for (auto& b : m.enc_blocks_) b.for_each_unit([](GrconvUnit& u) { u = u.mirrored(); });
  for (auto& b : m.dec_blocks_) b.for_each_unit([](GrconvUnit& u) { u = u.mirrored(); });
  m.exit_ = exit_.mirrored();
  m.projection_ = projection_.flipped_bands();
  return m;
}

Cube model_forward(const GrcnnModel& model, const Cube& noisy, std::optional<NoiseLevelMap> map) {
  return model.forward(noisy, map);
}

std::vector<double> model_backward(const GrcnnModel& model, const ForwardPass& pass,
                                   const Cube& grad_output) {
  return model.backward(pass, grad_output);
}

Cube denoise(const GrcnnModel& model, const Cube& noisy, double sigma) {
  std::optional<NoiseLevelMap> map;
  if (model.architecture().uses_noise_map) map = NoiseLevelMap{sigma};
  return model.forward(noisy, map);
}

}  // namespace hsipnp::grcnn
