#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <string>

#include "hsipnp/admm.hpp"
#include "hsipnp/error.hpp"

namespace hsipnp::admm {
namespace {

double keys(double t) {
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

// Source index and weight of the four taps for HR coordinate `out`.
struct Taps {
  std::array<std::size_t, 4> index;
  std::array<double, 4> weight;
};

Taps taps_for(std::size_t out, std::size_t factor, std::size_t low) {
  const std::size_t base = out / factor;
  const double t = static_cast<double>(out % factor) / static_cast<double>(factor);
  Taps taps{};
  for (int k = 0; k < 4; ++k) {
    const auto src = static_cast<std::ptrdiff_t>(base) + k - 1;
    taps.index[k] = static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(src, 0, static_cast<std::ptrdiff_t>(low) - 1));
    taps.weight[k] = keys(t - static_cast<double>(k - 1));
  }
  return taps;
}

Cube fill_missing(const Cube& mask, const Cube& y) {
  const std::size_t rows = y.rows(), cols = y.cols(), plane = rows * cols;
  double observed_sum = 0.0;
  std::size_t observed = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (mask.data()[i] != 0.0) {
      observed_sum += y.data()[i];
      ++observed;
    }
  }
  require(observed > 0, ErrorCode::EmptyObservation, "initialize: the mask observes nothing");
  const double fallback = observed_sum / static_cast<double>(observed);

  Cube out(y.extent());
  std::vector<double> filled(plane);
  std::vector<char> seen(plane);
  std::deque<std::size_t> queue;
  for (std::size_t b = 0; b < y.bands(); ++b) {
    const auto m = mask.band(b);
    const auto v = y.band(b);
    std::fill(seen.begin(), seen.end(), 0);
    queue.clear();
    for (std::size_t p = 0; p < plane; ++p) {
      if (m[p] != 0.0) {
        filled[p] = v[p];
        seen[p] = 1;
        queue.push_back(p);
      }
    }
    if (queue.empty()) std::fill(filled.begin(), filled.end(), fallback);
    // Multi-source BFS: each missing pixel takes the value of the observed
    // pixel that reaches it first (4-connectivity, fixed visiting order).
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      const std::size_t r = p / cols, c = p % cols;
      const std::array<std::pair<bool, std::size_t>, 4> nbrs{{
          {r > 0, p - cols},
          {r + 1 < rows, p + cols},
          {c > 0, p - 1},
          {c + 1 < cols, p + 1},
      }};
      for (const auto& [ok, q] : nbrs) {
        if (ok && !seen[q]) {
          seen[q] = 1;
          filled[q] = filled[p];
          queue.push_back(q);
        }
      }
    }
    auto o = out.band(b);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        const std::size_t p = r * cols + c;
        if (m[p] != 0.0) {
          o[p] = v[p];
          continue;
        }
        double s = 0.0;
        std::size_t n = 0;
        for (std::size_t rr = r == 0 ? 0 : r - 1; rr <= std::min(rows - 1, r + 1); ++rr)
          for (std::size_t cc = c == 0 ? 0 : c - 1; cc <= std::min(cols - 1, c + 1); ++cc) {
            s += filled[rr * cols + cc];
            ++n;
          }
        o[p] = s / static_cast<double>(n);
      }
  }
  return out;
}

}  // namespace

Cube bicubic_upsample(const Cube& low, std::size_t factor) {
  require(factor >= 1, ErrorCode::InvalidArgument, "bicubic_upsample: factor must be >= 1");
  require(!low.empty(), ErrorCode::EmptyObservation, "bicubic_upsample: empty input");
  const std::size_t rows = low.rows() * factor, cols = low.cols() * factor;
  std::vector<Taps> row_taps(rows), col_taps(cols);
  for (std::size_t r = 0; r < rows; ++r) row_taps[r] = taps_for(r, factor, low.rows());
  for (std::size_t c = 0; c < cols; ++c) col_taps[c] = taps_for(c, factor, low.cols());

  Cube out(rows, cols, low.bands());
  std::vector<double> tmp(low.rows() * cols);
  for (std::size_t b = 0; b < low.bands(); ++b) {
    for (std::size_t r = 0; r < low.rows(); ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k) s += col_taps[c].weight[k] * low(r, col_taps[c].index[k], b);
        tmp[r * cols + c] = s;
      }
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k) s += row_taps[r].weight[k] * tmp[row_taps[r].index[k] * cols + c];
        out(r, c, b) = s;
      }
  }
  return out;
}

Cube initialize(const degrade::TaskOperator& op, const Cube& y) {
  require(!y.empty(), ErrorCode::EmptyObservation, "initialize: empty observation");
  if (const auto* sr = std::get_if<degrade::SuperRes>(&op)) return bicubic_upsample(y, sr->factor());
  if (const auto* cs = std::get_if<degrade::Sensing>(&op)) {
    const Cube& m = cs->masks();
    require(y.rows() == m.rows() && y.cols() == m.cols() && y.bands() == 1,
            ErrorCode::DimensionMismatch, "initialize: measurement does not match the sensing masks");
    const auto& psi = cs->psi();
    Cube normalized(y.extent());
    bool any = false;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (psi[i] > 0.0) {
        normalized.data()[i] = y.data()[i] / psi[i];
        any = true;
      }
    }
    require(any, ErrorCode::EmptyObservation, "initialize: the sensing masks are all zero");
    return degrade::apply_adjoint(op, normalized);
  }
  const Cube& mask = std::get<degrade::Mask>(op).mask();
  require(y.extent() == mask.extent(), ErrorCode::DimensionMismatch,
          "initialize: measurement does not match the mask");
  return fill_missing(mask, y);
}

}  // namespace hsipnp::admm
