#include "hsipnp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "hsipnp/error.hpp"

namespace hsipnp {

Cube synthetic_scene(Extent extent, std::uint64_t seed, const SceneConfig& config) {
  require(extent.volume() > 0, ErrorCode::InvalidArgument, "synthetic_scene: empty extent");
  require(config.materials > 0 && config.regions > 0 && config.edge_softness > 0.0,
          ErrorCode::InvalidArgument, "synthetic_scene: invalid scene config");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Material spectra: baseline plus two Gaussian absorption/reflection bumps.
  const std::size_t B = extent.bands;
  std::vector<std::vector<double>> spectra(config.materials, std::vector<double>(B));
  for (auto& s : spectra) {
    const double base = 0.15 + 0.35 * unit(rng);
    const double slope = 0.3 * (unit(rng) - 0.5);
    const double c1 = unit(rng), c2 = unit(rng);
    const double w1 = 0.1 + 0.3 * unit(rng), w2 = 0.1 + 0.3 * unit(rng);
    const double a1 = 0.4 * unit(rng), a2 = -0.25 * unit(rng);
    for (std::size_t b = 0; b < B; ++b) {
      const double t = B > 1 ? static_cast<double>(b) / static_cast<double>(B - 1) : 0.5;
      const double v = base + slope * (t - 0.5) +
                       a1 * std::exp(-0.5 * (t - c1) * (t - c1) / (w1 * w1)) +
                       a2 * std::exp(-0.5 * (t - c2) * (t - c2) / (w2 * w2));
      s[b] = std::clamp(v, 0.02, 0.98);
    }
  }

  // Regions: seed points, each with its own material mixture.
  struct Region {
    double r, c;
    std::vector<double> mix;
  };
  std::vector<Region> regions(config.regions);
  for (auto& g : regions) {
    g.r = unit(rng) * static_cast<double>(extent.rows);
    g.c = unit(rng) * static_cast<double>(extent.cols);
    g.mix.resize(config.materials);
    double total = 0.0;
    for (double& m : g.mix) {
      m = std::pow(unit(rng), 3.0);
      total += m;
    }
    g.mix[rng() % config.materials] += 1.0;
    total += 1.0;
    for (double& m : g.mix) m /= total;
  }

  const double fr = 2.0 * M_PI * (0.5 + unit(rng)) / static_cast<double>(extent.rows);
  const double fc = 2.0 * M_PI * (0.5 + unit(rng)) / static_cast<double>(extent.cols);
  const double phase = 2.0 * M_PI * unit(rng);

  Cube out(extent);
  std::vector<double> weight(config.regions);
  std::vector<double> abundance(config.materials);
  for (std::size_t r = 0; r < extent.rows; ++r) {
    for (std::size_t c = 0; c < extent.cols; ++c) {
      // Soft nearest-seed assignment: boundaries blur over ~edge_softness px.
      double nearest = INFINITY;
      for (std::size_t k = 0; k < regions.size(); ++k) {
        const double dr = static_cast<double>(r) - regions[k].r;
        const double dc = static_cast<double>(c) - regions[k].c;
        weight[k] = std::sqrt(dr * dr + dc * dc);
        nearest = std::min(nearest, weight[k]);
      }
      double total = 0.0;
      for (double& w : weight) {
        w = std::exp(-(w - nearest) / config.edge_softness);
        total += w;
      }
      std::fill(abundance.begin(), abundance.end(), 0.0);
      for (std::size_t k = 0; k < regions.size(); ++k) {
        for (std::size_t m = 0; m < config.materials; ++m)
          abundance[m] += weight[k] / total * regions[k].mix[m];
      }
      const double shade = 0.8 + 0.2 * std::sin(fr * static_cast<double>(r) + phase) *
                                     std::cos(fc * static_cast<double>(c));
      for (std::size_t b = 0; b < B; ++b) {
        double v = 0.0;
        for (std::size_t m = 0; m < config.materials; ++m) v += abundance[m] * spectra[m][b];
        out(r, c, b) = std::clamp(shade * v, 0.0, 1.0);
      }
    }
  }
  return out;
}

}  // namespace hsipnp
