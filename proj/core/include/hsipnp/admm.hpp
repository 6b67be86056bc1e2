#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hsipnp/cube.hpp"
#include "hsipnp/degrade.hpp"

namespace hsipnp::grcnn {
class GrcnnModel;
}

namespace hsipnp::admm {

/// Per-iteration denoiser strengths sigma[k] (0-255 scale, log-spaced from
/// sigma_1 down to sigma_2) and penalties rho[k] = lambda / (sigma[k]/255)^2.
struct Schedule {
  double sigma_1 = 50.0;
  double sigma_2 = 5.0;
  std::size_t iterations = 0;
  double lambda = 1.5;
  std::vector<double> sigma;
  std::vector<double> rho;
};

Schedule make_schedule(double sigma_1, double sigma_2, std::size_t iterations,
                       double lambda = 1.5);

// x-updates: argmin_x ||y - D x||^2 + rho ||x - x_tilde||^2, i.e.
// x = (D^T D + rho I)^-1 (D^T y + rho x_tilde).

/// Direct solve of the normal equations with an explicit matrix D.
std::vector<double> x_update_dense(const degrade::DenseMatrix& d, std::span<const double> y,
                                   std::span<const double> x_tilde, double rho);
/// Reference path: materializes D for the operator (small problems only;
/// ErrorCode::SizeGuard beyond max_unknowns).
Cube x_update_dense_oracle(const degrade::TaskOperator& op, const Cube& y, const Cube& x_tilde,
                           double rho, std::size_t max_unknowns = 4096);

/// Band-wise FFT solve through the Woodbury identity; the LR-grid
/// eigenvalues of G G^T are the aliased sums of |OTF|^2 over the factor^2
/// spectral replicas, divided by factor^2.
Cube x_update_sr(const degrade::SuperRes& op, const Cube& y, const Cube& x_tilde, double rho);
/// x = x_tilde + Phi^T [(y - Phi x_tilde) / (rho + psi)].
Cube x_update_cs(const degrade::Sensing& op, const Cube& y, const Cube& x_tilde, double rho);
/// x = (s y + rho x_tilde) / (s + rho), voxel-wise.
Cube x_update_inpaint(const degrade::Mask& op, const Cube& y, const Cube& x_tilde, double rho);
/// Dispatches to the fast path for the operator.
Cube x_update(const degrade::TaskOperator& op, const Cube& y, const Cube& x_tilde, double rho);

/// Starting point x0:
///   super-resolution: band-wise bicubic upsampling of y;
///   sensing: Phi^T (y / psi), 0 on detector pixels no voxel reaches;
///   inpainting: per-band nearest observed value, then one 3x3 mean pass
///   over the unobserved voxels.
Cube initialize(const degrade::TaskOperator& op, const Cube& y);

/// Bicubic (Keys, a = -0.5) upsampling; LR pixel (r, c) lands on HR pixel
/// (r f, c f), edges clamp.
Cube bicubic_upsample(const Cube& low, std::size_t factor);

/// v-update operator: (v_tilde, sigma on the 0-255 scale) -> v.
using Denoiser = std::function<Cube(const Cube&, double)>;

Denoiser identity_denoiser();
/// size x size spatial mean per band (clamped borders); ignores sigma.
Denoiser box_denoiser(std::size_t size = 3);
/// Network denoiser. Requests outside the trained sigma range are clamped
/// and reported through `warn` once per distinct value.
Denoiser grcnn_denoiser(std::shared_ptr<const grcnn::GrcnnModel> model,
                        std::function<void(const std::string&)> warn = {});

struct TraceRow {
  std::size_t iter = 0;
  double sigma = 0.0;
  double rho = 0.0;
  double primal_residual = 0.0;  // ||x - v||_2
  std::optional<double> psnr;    // of v against the ground truth
};

struct RunOptions {
  /// Used instead of initialize(op, y) when set.
  std::optional<Cube> initial;
  /// Enables the per-iteration PSNR column.
  const Cube* ground_truth = nullptr;
  std::function<void(const TraceRow&)> on_iteration;
};

struct RunResult {
  Cube output;   // final v
  Cube x;        // final x
  Cube u;        // final scaled dual
  Cube initial;  // x0
  std::vector<TraceRow> trace;
};

/// Plug-and-play ADMM:
///   x0 = init, v = x0, u = 0; for k < K:
///   x = x_update(v - u, rho_k); v = D(x + u, sigma_k); u += x - v.
/// Throws ErrorCode::NonFinite naming the iteration if an iterate blows up.
RunResult run(const degrade::TaskOperator& op, const Cube& y, const Denoiser& denoiser,
              const Schedule& schedule, const RunOptions& options = {});

/// Trace as CSV with header iter,sigma_k,rho_k,primal_residual[,psnr].
void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace);

}  // namespace hsipnp::admm
