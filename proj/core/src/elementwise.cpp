#include "hsipnp/elementwise.hpp"

#include <algorithm>
#include <cmath>

#include "hsipnp/error.hpp"

namespace hsipnp {
namespace {

void require_same(const FeatureTensor& a, const FeatureTensor& b, const char* op) {
  require(a.same_shape(b), ErrorCode::DimensionMismatch, std::string(op) + ": shape mismatch");
}

void require_same(const Cube& a, const Cube& b, const char* op) {
  require(a.extent() == b.extent(), ErrorCode::DimensionMismatch,
          std::string(op) + ": shape mismatch");
}

template <class T, class F>
T zip(const T& a, const T& b, F f) {
  T out = a;
  auto o = out.data();
  auto y = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = f(o[i], y[i]);
  return out;
}

template <class T, class F>
T map(const T& a, F f) {
  T out = a;
  for (double& v : out.data()) v = f(v);
  return out;
}

}  // namespace

double sigmoid(double x) {
  // Split on sign so exp never overflows.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

FeatureTensor add(const FeatureTensor& a, const FeatureTensor& b) {
  require_same(a, b, "add");
  return zip(a, b, [](double x, double y) { return x + y; });
}

FeatureTensor sub(const FeatureTensor& a, const FeatureTensor& b) {
  require_same(a, b, "sub");
  return zip(a, b, [](double x, double y) { return x - y; });
}

FeatureTensor scale(const FeatureTensor& a, double s) {
  return map(a, [s](double x) { return s * x; });
}

FeatureTensor hadamard(const FeatureTensor& a, const FeatureTensor& b) {
  require_same(a, b, "hadamard");
  return zip(a, b, [](double x, double y) { return x * y; });
}

FeatureTensor sigmoid(const FeatureTensor& a) {
  return map(a, [](double x) { return sigmoid(x); });
}

FeatureTensor tanh(const FeatureTensor& a) {
  return map(a, [](double x) { return std::tanh(x); });
}

void add_inplace(FeatureTensor& a, const FeatureTensor& b) {
  require_same(a, b, "add_inplace");
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[i];
}

FeatureTensor concat_channels(const FeatureTensor& a, const FeatureTensor& b) {
  require(a.extent() == b.extent(), ErrorCode::DimensionMismatch,
          "concat_channels: extent mismatch");
  FeatureTensor out(a.channels() + b.channels(), a.extent());
  auto dst = out.data();
  std::copy(a.data().begin(), a.data().end(), dst.begin());
  std::copy(b.data().begin(), b.data().end(), dst.begin() + static_cast<std::ptrdiff_t>(a.size()));
  return out;
}

FeatureTensor slice_channels(const FeatureTensor& a, std::size_t first, std::size_t count) {
  require(first + count <= a.channels(), ErrorCode::DimensionMismatch,
          "slice_channels: range exceeds channel count");
  FeatureTensor out(count, a.extent());
  const auto volume = static_cast<std::ptrdiff_t>(a.extent().volume());
  std::copy(a.data().begin() + static_cast<std::ptrdiff_t>(first) * volume,
            a.data().begin() + static_cast<std::ptrdiff_t>(first + count) * volume,
            out.data().begin());
  return out;
}

FeatureTensor pad(const FeatureTensor& a, std::size_t rows, std::size_t cols) {
  const Extent e{a.rows() + 2 * rows, a.cols() + 2 * cols, a.bands()};
  FeatureTensor out(a.channels(), e);
  for (std::size_t c = 0; c < a.channels(); ++c)
    for (std::size_t b = 0; b < a.bands(); ++b)
      for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t k = 0; k < a.cols(); ++k) out(c, r + rows, k + cols, b) = a(c, r, k, b);
  return out;
}

FeatureTensor crop(const FeatureTensor& a, std::size_t rows, std::size_t cols) {
  require(a.rows() >= 2 * rows && a.cols() >= 2 * cols, ErrorCode::DimensionMismatch,
          "crop: margins exceed extent");
  const Extent e{a.rows() - 2 * rows, a.cols() - 2 * cols, a.bands()};
  FeatureTensor out(a.channels(), e);
  for (std::size_t c = 0; c < a.channels(); ++c)
    for (std::size_t b = 0; b < a.bands(); ++b)
      for (std::size_t r = 0; r < e.rows; ++r)
        for (std::size_t k = 0; k < e.cols; ++k) out(c, r, k, b) = a(c, r + rows, k + cols, b);
  return out;
}

Cube add(const Cube& a, const Cube& b) {
  require_same(a, b, "add");
  return zip(a, b, [](double x, double y) { return x + y; });
}

Cube sub(const Cube& a, const Cube& b) {
  require_same(a, b, "sub");
  return zip(a, b, [](double x, double y) { return x - y; });
}

Cube scale(const Cube& a, double s) {
  return map(a, [s](double x) { return s * x; });
}

Cube hadamard(const Cube& a, const Cube& b) {
  require_same(a, b, "hadamard");
  return zip(a, b, [](double x, double y) { return x * y; });
}

Cube clip(const Cube& a, double lo, double hi) {
  return map(a, [lo, hi](double x) { return std::clamp(x, lo, hi); });
}

}  // namespace hsipnp
