#include "hsipnp/grconv.hpp"

#include <cmath>
#include <string>

#include "hsipnp/elementwise.hpp"
#include "hsipnp/error.hpp"

namespace hsipnp::grcnn {

Direction reversed(Direction d) {
  switch (d) {
    case Direction::Forward: return Direction::Backward;
    case Direction::Backward: return Direction::Forward;
    case Direction::Bidirectional: return Direction::Bidirectional;
  }
  return d;
}

GrconvUnit::GrconvUnit(std::size_t in_channels, std::size_t out_per_pass, std::size_t kernel_size,
                       Direction direction, bool transposed, Stride3 stride)
    : in_(in_channels), out_per_pass_(out_per_pass), transposed_(transposed), stride_(stride) {
  const auto make_kernel = [&] {
    if (transposed) {
      return Kernel3d(in_channels, out_per_pass, kernel_size, kernel_size, kernel_size, stride,
                      Padding::Same, BiasMode::PerInput);
    }
    return Kernel3d(out_per_pass, in_channels, kernel_size, kernel_size, kernel_size, stride,
                    Padding::Same, BiasMode::PerOutput);
  };
  require(stride.bands == 1, ErrorCode::InvalidArgument,
          "GrconvUnit: the band axis is recurrent and cannot be strided");
  if (direction == Direction::Bidirectional) {
    passes_.push_back({make_kernel(), make_kernel(), Direction::Forward});
    passes_.push_back({make_kernel(), make_kernel(), Direction::Backward});
  } else {
    passes_.push_back({make_kernel(), make_kernel(), direction});
  }
}

Direction GrconvUnit::direction() const {
  return passes_.size() == 2 ? Direction::Bidirectional : passes_.front().direction;
}

Extent GrconvUnit::output_extent(const Extent& input) const {
  if (!transposed_) return passes_.front().weight_kernel.output_extent(input);
  return {input.rows * stride_.rows, input.cols * stride_.cols, input.bands * stride_.bands};
}

FeatureTensor GrconvUnit::convolve(const FeatureTensor& input, const Kernel3d& k) const {
  return transposed_ ? conv3d_transposed(input, k) : conv3d(input, k);
}

void fuse_bands(const FeatureTensor& w, const FeatureTensor& f, Direction direction,
                FeatureTensor& h) {
  require(w.same_shape(f) && w.same_shape(h), ErrorCode::DimensionMismatch,
          "fuse_bands: shape mismatch");
  require(direction != Direction::Bidirectional, ErrorCode::InvalidArgument,
          "fuse_bands: a single pass runs in one direction");
  const std::size_t bands = w.bands();
  const std::size_t plane = w.extent().plane();
  for (std::size_t c = 0; c < w.channels(); ++c) {
    const double* prev = nullptr;
    for (std::size_t step = 0; step < bands; ++step) {
      const std::size_t b = direction == Direction::Forward ? step : bands - 1 - step;
      const double* wp = w.plane(c, b).data();
      const double* fp = f.plane(c, b).data();
      double* hp = h.plane(c, b).data();
      if (prev == nullptr) {
        for (std::size_t p = 0; p < plane; ++p) hp[p] = (1.0 - wp[p]) * 0.0 + wp[p] * fp[p];
      } else {
        for (std::size_t p = 0; p < plane; ++p) hp[p] = (1.0 - wp[p]) * prev[p] + wp[p] * fp[p];
      }
      prev = hp;
    }
  }
}

FeatureTensor GrconvUnit::forward(const FeatureTensor& input, GrconvCache* cache) const {
  require(input.channels() == in_, ErrorCode::DimensionMismatch,
          "GrconvUnit: input has " + std::to_string(input.channels()) + " channels, expected " +
              std::to_string(in_));
  if (cache != nullptr) {
    cache->input = input;
    cache->passes.clear();
  }
  FeatureTensor out;
  for (const GatePass& pass : passes_) {
    FeatureTensor w = convolve(input, pass.weight_kernel);
    for (double& v : w.data()) v = sigmoid(v);
    FeatureTensor f = convolve(input, pass.feature_kernel);
    for (double& v : f.data()) v = std::tanh(v);
    FeatureTensor h(w.channels(), w.extent());
    fuse_bands(w, f, pass.direction, h);
    out = out.channels() == 0 ? h : concat_channels(out, h);
    if (cache != nullptr) cache->passes.push_back({std::move(w), std::move(f), std::move(h)});
  }
  return out;
}

FeatureTensor GrconvUnit::backward(const GrconvCache& cache, const FeatureTensor& grad_out,
                                   GrconvUnit& grads) const {
  require(cache.passes.size() == passes_.size(), ErrorCode::StaleCache,
          "GrconvUnit: cache does not belong to this unit");
  require(grad_out.channels() == out_channels(), ErrorCode::DimensionMismatch,
          "GrconvUnit: gradient channel mismatch");
  FeatureTensor grad_in(in_, cache.input.extent());
  const std::size_t bands = grad_out.bands();
  const std::size_t plane = grad_out.extent().plane();

  for (std::size_t pi = 0; pi < passes_.size(); ++pi) {
    const GatePass& pass = passes_[pi];
    const auto& act = cache.passes[pi];
    require(act.h.channels() == out_per_pass_ && act.h.extent() == grad_out.extent(),
            ErrorCode::StaleCache, "GrconvUnit: cached activations do not match the gradient");
    FeatureTensor d_pre_w(out_per_pass_, act.w.extent());
    FeatureTensor d_pre_f(out_per_pass_, act.f.extent());
    std::vector<double> carry(plane);

    for (std::size_t c = 0; c < out_per_pass_; ++c) {
      std::fill(carry.begin(), carry.end(), 0.0);
      const auto g_plane = [&](std::size_t b) {
        return grad_out.plane(pi * out_per_pass_ + c, b).data();
      };
      // Walk the recurrence backwards.
      for (std::size_t step = bands; step-- > 0;) {
        const std::size_t b = pass.direction == Direction::Forward ? step : bands - 1 - step;
        const double* prev = nullptr;
        if (step > 0) {
          const std::size_t pb = pass.direction == Direction::Forward ? b - 1 : b + 1;
          prev = act.h.plane(c, pb).data();
        }
        const double* wp = act.w.plane(c, b).data();
        const double* fp = act.f.plane(c, b).data();
        const double* gp = g_plane(b);
        double* dw = d_pre_w.plane(c, b).data();
        double* df = d_pre_f.plane(c, b).data();
        for (std::size_t p = 0; p < plane; ++p) {
          const double dh = gp[p] + carry[p];
          const double hp = prev != nullptr ? prev[p] : 0.0;
          const double w = wp[p];
          const double f = fp[p];
          dw[p] = dh * (f - hp) * w * (1.0 - w);
          df[p] = dh * w * (1.0 - f * f);
          carry[p] = dh * (1.0 - w);
        }
      }
    }

    GatePass& gpass = grads.passes_[pi];
    const auto propagate = [&](const FeatureTensor& d_pre, const Kernel3d& k, Kernel3d& gk) {
      if (!transposed_) {
        accumulate_conv3d_weight_grad(cache.input, d_pre, gk);
        accumulate_bias_grad(d_pre, gk.bias());
        add_inplace(grad_in, conv3d_transposed(d_pre, k, cache.input.extent()));
      } else {
        // y = conv3d_transposed(x; K) is the adjoint of conv3d(.; K), so
        // <y, dy> = <x, conv3d(dy; K)>.
        accumulate_conv3d_weight_grad(d_pre, cache.input, gk);
        accumulate_bias_grad(d_pre, gk.bias());
        add_inplace(grad_in, conv3d(d_pre, k));
      }
    };
    propagate(d_pre_w, pass.weight_kernel, gpass.weight_kernel);
    propagate(d_pre_f, pass.feature_kernel, gpass.feature_kernel);
  }
  return grad_in;
}

void GrconvUnit::initialize(std::mt19937_64& rng) {
  for_each_kernel([&](Kernel3d& k) {
    const std::size_t consumed = transposed_ ? k.out_channels() : k.in_channels();
    const double bound = 1.0 / std::sqrt(static_cast<double>(consumed * k.taps()));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double& w : k.weights()) w = u(rng);
    for (double& b : k.bias()) b = 0.0;
  });
}

GrconvUnit GrconvUnit::mirrored() const {
  GrconvUnit m = *this;
  for (auto& p : m.passes_) {
    p.weight_kernel = p.weight_kernel.flipped_bands();
    p.feature_kernel = p.feature_kernel.flipped_bands();
    p.direction = reversed(p.direction);
  }
  return m;
}

GrconvUnit GrconvUnit::zeros_like() const {
  GrconvUnit z = *this;
  z.for_each_kernel([](Kernel3d& k) { k = k.zeros_like(); });
  return z;
}

}  // namespace hsipnp::grcnn
