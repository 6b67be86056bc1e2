#pragma once

// Per-voxel scalar loop for a gated recurrent convolution unit:
// pre-activations from the naive convolution, then
// h_i = (1 - w_i) h_{i-1} + w_i f_i with h_0 = 0 along the pass direction.

#include <cmath>

#include "hsipnp/grconv.hpp"
#include "naive_conv.hpp"

namespace oracle {

inline hsipnp::FeatureTensor scalar_grconv(const hsipnp::grcnn::GrconvUnit& unit,
                                           const hsipnp::FeatureTensor& x) {
  using hsipnp::grcnn::Direction;
  const std::size_t per = unit.out_per_pass();
  hsipnp::FeatureTensor out;
  std::size_t pass_index = 0;
  for (const auto& pass : unit.passes()) {
    const auto zw = naive_conv3d(x, pass.weight_kernel);
    const auto zf = naive_conv3d(x, pass.feature_kernel);
    if (out.channels() == 0) out = hsipnp::FeatureTensor(per * unit.passes().size(), zw.extent());
    const std::size_t B = zw.bands();
    for (std::size_t c = 0; c < per; ++c)
      for (std::size_t r = 0; r < zw.rows(); ++r)
        for (std::size_t col = 0; col < zw.cols(); ++col) {
          double h = 0.0;
          for (std::size_t i = 0; i < B; ++i) {
            const std::size_t b = pass.direction == Direction::Forward ? i : B - 1 - i;
            const double w = 1.0 / (1.0 + std::exp(-zw(c, r, col, b)));
            const double f = std::tanh(zf(c, r, col, b));
            h = (1.0 - w) * h + w * f;
            out(pass_index * per + c, r, col, b) = h;
          }
        }
    ++pass_index;
  }
  return out;
}

}  // namespace oracle
