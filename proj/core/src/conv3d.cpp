#include "hsipnp/conv3d.hpp"

#include <algorithm>
#include <string>

#include "hsipnp/error.hpp"

namespace hsipnp {
namespace {

using Index = std::ptrdiff_t;

// Output positions o in [lo, hi) with 0 <= o * stride + offset < n_in.
struct Range {
  Index lo = 0;
  Index hi = 0;
};

Range valid_range(Index offset, Index stride, Index n_in, Index n_out) {
  Range r;
  r.lo = offset >= 0 ? 0 : (-offset + stride - 1) / stride;
  const Index last = n_in - 1 - offset;
  r.hi = last < 0 ? 0 : std::min(last / stride + 1, n_out);
  if (r.hi < r.lo) r.hi = r.lo;
  return r;
}

std::string extent_string(const Extent& e) {
  return std::to_string(e.rows) + "x" + std::to_string(e.cols) + "x" + std::to_string(e.bands);
}

std::size_t conv_extent(std::size_t in, std::size_t k, std::size_t pad, std::size_t stride,
                        const char* axis) {
  const std::size_t padded = in + 2 * pad;
  require(padded >= k, ErrorCode::DimensionMismatch,
          std::string("conv3d: kernel larger than padded extent along ") + axis);
  require(stride == 1 || padded % stride == 0, ErrorCode::DimensionMismatch,
          std::string("conv3d: stride does not divide padded extent along ") + axis);
  return (padded - k) / stride + 1;
}

// Geometry shared by the forward, adjoint and weight-gradient loops. "in" is
// always the conv3d input side, "out" the conv3d output side.
struct Geometry {
  Index in_b, in_h, in_w;
  Index out_b, out_h, out_w;
  Index sd, sh, sw;
  Index pd, ph, pw;
};

Geometry make_geometry(const Kernel3d& k, const Extent& in, const Extent& out) {
  return {static_cast<Index>(in.bands),  static_cast<Index>(in.rows),
          static_cast<Index>(in.cols),   static_cast<Index>(out.bands),
          static_cast<Index>(out.rows),  static_cast<Index>(out.cols),
          static_cast<Index>(k.stride().bands), static_cast<Index>(k.stride().rows),
          static_cast<Index>(k.stride().cols),  static_cast<Index>(k.pad_bands()),
          static_cast<Index>(k.pad_rows()),     static_cast<Index>(k.pad_cols())};
}

}  // namespace

Kernel3d::Kernel3d(std::size_t out_channels, std::size_t in_channels, std::size_t depth,
                   std::size_t height, std::size_t width, Stride3 stride, Padding padding,
                   BiasMode bias)
    : out_(out_channels),
      in_(in_channels),
      kd_(depth),
      kh_(height),
      kw_(width),
      stride_(stride),
      padding_(padding),
      bias_mode_(bias) {
  require(out_ > 0 && in_ > 0 && kd_ > 0 && kh_ > 0 && kw_ > 0, ErrorCode::InvalidArgument,
          "Kernel3d: all dimensions must be positive");
  require(stride.bands > 0 && stride.rows > 0 && stride.cols > 0, ErrorCode::InvalidArgument,
          "Kernel3d: strides must be positive");
  if (padding == Padding::Same) {
    require(kd_ % 2 == 1 && kh_ % 2 == 1 && kw_ % 2 == 1, ErrorCode::InvalidArgument,
            "Kernel3d: same padding requires odd kernel dimensions");
  }
  weights_.assign(out_ * in_ * kd_ * kh_ * kw_, 0.0);
  switch (bias_mode_) {
    case BiasMode::None: break;
    case BiasMode::PerOutput: bias_.assign(out_, 0.0); break;
    case BiasMode::PerInput: bias_.assign(in_, 0.0); break;
  }
}

Kernel3d Kernel3d::flipped_bands() const {
  Kernel3d k = *this;
  for (std::size_t o = 0; o < out_; ++o)
    for (std::size_t i = 0; i < in_; ++i)
      for (std::size_t d = 0; d < kd_; ++d)
        for (std::size_t h = 0; h < kh_; ++h)
          for (std::size_t w = 0; w < kw_; ++w) k.weight(o, i, d, h, w) = weight(o, i, kd_ - 1 - d, h, w);
  return k;
}

Kernel3d Kernel3d::zeros_like() const {
  Kernel3d k = *this;
  std::fill(k.weights_.begin(), k.weights_.end(), 0.0);
  std::fill(k.bias_.begin(), k.bias_.end(), 0.0);
  return k;
}

Extent Kernel3d::output_extent(const Extent& input) const {
  Extent out;
  out.bands = conv_extent(input.bands, kd_, pad_bands(), stride_.bands, "bands");
  out.rows = conv_extent(input.rows, kh_, pad_rows(), stride_.rows, "rows");
  out.cols = conv_extent(input.cols, kw_, pad_cols(), stride_.cols, "cols");
  return out;
}

FeatureTensor conv3d(const FeatureTensor& input, const Kernel3d& kernel) {
  require(input.channels() == kernel.in_channels(), ErrorCode::DimensionMismatch,
          "conv3d: input has " + std::to_string(input.channels()) + " channels, kernel expects " +
              std::to_string(kernel.in_channels()));
  const Extent out_extent = kernel.output_extent(input.extent());
  FeatureTensor out(kernel.out_channels(), out_extent);
  const Geometry g = make_geometry(kernel, input.extent(), out_extent);

  for (std::size_t o = 0; o < kernel.out_channels(); ++o) {
    if (kernel.bias_mode() == BiasMode::PerOutput) {
      auto ch = out.channel(o);
      std::fill(ch.begin(), ch.end(), kernel.bias()[o]);
    }
    for (std::size_t i = 0; i < kernel.in_channels(); ++i) {
      for (Index kd = 0; kd < static_cast<Index>(kernel.depth()); ++kd) {
        const Range rb = valid_range(kd - g.pd, g.sd, g.in_b, g.out_b);
        for (Index kh = 0; kh < static_cast<Index>(kernel.height()); ++kh) {
          const Range rh = valid_range(kh - g.ph, g.sh, g.in_h, g.out_h);
          for (Index kw = 0; kw < static_cast<Index>(kernel.width()); ++kw) {
            const Range rw = valid_range(kw - g.pw, g.sw, g.in_w, g.out_w);
            const double wv = kernel.weight(o, i, kd, kh, kw);
            for (Index ob = rb.lo; ob < rb.hi; ++ob) {
              const Index ib = ob * g.sd + kd - g.pd;
              const auto src_plane = input.plane(i, ib);
              auto dst_plane = out.plane(o, ob);
              for (Index oh = rh.lo; oh < rh.hi; ++oh) {
                const Index ih = oh * g.sh + kh - g.ph;
                const double* src = src_plane.data() + ih * g.in_w;
                double* dst = dst_plane.data() + oh * g.out_w;
                const Index shift = kw - g.pw;
                if (g.sw == 1) {
                  for (Index ow = rw.lo; ow < rw.hi; ++ow) dst[ow] += wv * src[ow + shift];
                } else {
                  for (Index ow = rw.lo; ow < rw.hi; ++ow) dst[ow] += wv * src[ow * g.sw + shift];
                }
              }
            }
          }
        }
      }
    }
  }
  return out;
}

FeatureTensor conv3d_transposed(const FeatureTensor& input, const Kernel3d& kernel,
                                const Extent& output) {
  require(input.channels() == kernel.out_channels(), ErrorCode::DimensionMismatch,
          "conv3d_transposed: input has " + std::to_string(input.channels()) +
              " channels, kernel produces " + std::to_string(kernel.out_channels()));
  const Extent forward = kernel.output_extent(output);
  require(forward == input.extent(), ErrorCode::DimensionMismatch,
          "conv3d_transposed: conv3d maps " + extent_string(output) + " to " +
              extent_string(forward) + ", not " + extent_string(input.extent()));
  FeatureTensor out(kernel.in_channels(), output);
  const Geometry g = make_geometry(kernel, output, input.extent());

  for (std::size_t i = 0; i < kernel.in_channels(); ++i) {
    for (std::size_t o = 0; o < kernel.out_channels(); ++o) {
      for (Index kd = 0; kd < static_cast<Index>(kernel.depth()); ++kd) {
        const Range rb = valid_range(kd - g.pd, g.sd, g.in_b, g.out_b);
        for (Index kh = 0; kh < static_cast<Index>(kernel.height()); ++kh) {
          const Range rh = valid_range(kh - g.ph, g.sh, g.in_h, g.out_h);
          for (Index kw = 0; kw < static_cast<Index>(kernel.width()); ++kw) {
            const Range rw = valid_range(kw - g.pw, g.sw, g.in_w, g.out_w);
            const double wv = kernel.weight(o, i, kd, kh, kw);
            for (Index ob = rb.lo; ob < rb.hi; ++ob) {
              const Index ib = ob * g.sd + kd - g.pd;
              const auto src_plane = input.plane(o, ob);
              auto dst_plane = out.plane(i, ib);
              for (Index oh = rh.lo; oh < rh.hi; ++oh) {
                const Index ih = oh * g.sh + kh - g.ph;
                const double* src = src_plane.data() + oh * g.out_w;
                double* dst = dst_plane.data() + ih * g.in_w;
                const Index shift = kw - g.pw;
                if (g.sw == 1) {
                  for (Index ow = rw.lo; ow < rw.hi; ++ow) dst[ow + shift] += wv * src[ow];
                } else {
                  for (Index ow = rw.lo; ow < rw.hi; ++ow) dst[ow * g.sw + shift] += wv * src[ow];
                }
              }
            }
          }
        }
      }
    }
    if (kernel.bias_mode() == BiasMode::PerInput) {
      for (double& v : out.channel(i)) v += kernel.bias()[i];
    }
  }
  return out;
}

FeatureTensor conv3d_transposed(const FeatureTensor& input, const Kernel3d& kernel) {
  const auto expand = [](std::size_t n, std::size_t k, std::size_t s, Padding p) {
    return p == Padding::Same ? n * s : (n - 1) * s + k;
  };
  const Extent output{expand(input.rows(), kernel.height(), kernel.stride().rows, kernel.padding()),
                      expand(input.cols(), kernel.width(), kernel.stride().cols, kernel.padding()),
                      expand(input.bands(), kernel.depth(), kernel.stride().bands, kernel.padding())};
  return conv3d_transposed(input, kernel, output);
}

void accumulate_conv3d_weight_grad(const FeatureTensor& input, const FeatureTensor& grad_out,
                                   Kernel3d& grad) {
  require(input.channels() == grad.in_channels() && grad_out.channels() == grad.out_channels(),
          ErrorCode::DimensionMismatch, "conv3d weight grad: channel mismatch");
  require(grad.output_extent(input.extent()) == grad_out.extent(), ErrorCode::DimensionMismatch,
          "conv3d weight grad: extent mismatch");
  const Geometry g = make_geometry(grad, input.extent(), grad_out.extent());

  for (std::size_t o = 0; o < grad.out_channels(); ++o) {
    for (std::size_t i = 0; i < grad.in_channels(); ++i) {
      for (Index kd = 0; kd < static_cast<Index>(grad.depth()); ++kd) {
        const Range rb = valid_range(kd - g.pd, g.sd, g.in_b, g.out_b);
        for (Index kh = 0; kh < static_cast<Index>(grad.height()); ++kh) {
          const Range rh = valid_range(kh - g.ph, g.sh, g.in_h, g.out_h);
          for (Index kw = 0; kw < static_cast<Index>(grad.width()); ++kw) {
            const Range rw = valid_range(kw - g.pw, g.sw, g.in_w, g.out_w);
            double acc = 0.0;
            for (Index ob = rb.lo; ob < rb.hi; ++ob) {
              const Index ib = ob * g.sd + kd - g.pd;
              const auto x_plane = input.plane(i, ib);
              const auto g_plane = grad_out.plane(o, ob);
              for (Index oh = rh.lo; oh < rh.hi; ++oh) {
                const Index ih = oh * g.sh + kh - g.ph;
                const double* x = x_plane.data() + ih * g.in_w;
                const double* go = g_plane.data() + oh * g.out_w;
                const Index shift = kw - g.pw;
                if (g.sw == 1) {
                  for (Index ow = rw.lo; ow < rw.hi; ++ow) acc += go[ow] * x[ow + shift];
                } else {
                  for (Index ow = rw.lo; ow < rw.hi; ++ow) acc += go[ow] * x[ow * g.sw + shift];
                }
              }
            }
            grad.weight(o, i, kd, kh, kw) += acc;
          }
        }
      }
    }
  }
}

void accumulate_bias_grad(const FeatureTensor& grad, std::span<double> bias) {
  require(bias.size() == grad.channels(), ErrorCode::DimensionMismatch,
          "bias grad: channel mismatch");
  for (std::size_t c = 0; c < grad.channels(); ++c) {
    double acc = 0.0;
    for (double v : grad.channel(c)) acc += v;
    bias[c] += acc;
  }
}

}  // namespace hsipnp
