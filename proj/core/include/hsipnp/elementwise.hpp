#pragma once

#include <cstddef>
#include <span>

#include "hsipnp/cube.hpp"

namespace hsipnp {

// Shape-preserving tensor arithmetic. Binary operations reject mismatched
// shapes with ErrorCode::DimensionMismatch.

FeatureTensor add(const FeatureTensor& a, const FeatureTensor& b);
FeatureTensor sub(const FeatureTensor& a, const FeatureTensor& b);
FeatureTensor scale(const FeatureTensor& a, double s);
FeatureTensor hadamard(const FeatureTensor& a, const FeatureTensor& b);
FeatureTensor sigmoid(const FeatureTensor& a);
FeatureTensor tanh(const FeatureTensor& a);

void add_inplace(FeatureTensor& a, const FeatureTensor& b);

/// Stacks the channels of `a` followed by the channels of `b`.
FeatureTensor concat_channels(const FeatureTensor& a, const FeatureTensor& b);
/// Channels [first, first + count) as a new tensor.
FeatureTensor slice_channels(const FeatureTensor& a, std::size_t first, std::size_t count);

/// Zero-pads every plane by the given number of rows/cols on each side.
FeatureTensor pad(const FeatureTensor& a, std::size_t rows, std::size_t cols);
/// Inverse of pad: drops `rows`/`cols` from each side of every plane.
FeatureTensor crop(const FeatureTensor& a, std::size_t rows, std::size_t cols);

double sigmoid(double x);

Cube add(const Cube& a, const Cube& b);
Cube sub(const Cube& a, const Cube& b);
Cube scale(const Cube& a, double s);
Cube hadamard(const Cube& a, const Cube& b);
Cube clip(const Cube& a, double lo, double hi);

}  // namespace hsipnp
