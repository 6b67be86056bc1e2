#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hsipnp/cube.hpp"
#include "hsipnp/grcnn.hpp"

namespace hsipnp::grcnn {

/// One training phase. sigma_min == sigma_max gives a fixed noise level;
/// otherwise each patch draws sigma ~ U[sigma_min, sigma_max].
struct TrainPhase {
  std::size_t epochs = 1;
  double sigma_min = 50.0;
  double sigma_max = 50.0;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Learning rate is multiplied by this after every epoch.
  double lr_decay = 1.0;
  std::size_t batch_size = 4;
  /// Spatial patch size cropped from each dataset cube; 0 uses the whole cube.
  std::size_t patch_rows = 0;
  std::size_t patch_cols = 0;
  /// An epoch is this many batches; 0 means one pass over the dataset.
  std::size_t steps_per_epoch = 0;
  std::vector<TrainPhase> phases{{30, 50.0, 50.0}, {30, 0.0, 50.0}};
  std::uint64_t seed = 0;
  /// Called after every step with (step, loss).
  std::function<void(std::size_t, double)> on_step;
};

struct TrainResult {
  GrcnnModel model;
  /// Mean batch loss per optimizer step, in step order.
  std::vector<double> loss_curve;
};

/// Mean squared error over all voxels.
double l2_loss(const Cube& prediction, const Cube& target);
/// d l2_loss / d prediction = 2 (prediction - target) / n.
Cube l2_loss_gradient(const Cube& prediction, const Cube& target);

/// Adam with bias correction.
class Adam {
 public:
  Adam(std::size_t parameters, double beta1, double beta2, double epsilon);
  void step(std::span<double> params, std::span<const double> grads, double learning_rate);
  std::size_t steps() const { return t_; }

 private:
  double beta1_, beta2_, epsilon_;
  std::size_t t_ = 0;
  std::vector<double> m_, v_;
};

/// Trains a copy of `model` as a Gaussian denoiser on clean patches. The
/// noisy input is clean + N(0, (sigma/255)^2) with a matching noise-level
/// map. Throws ErrorCode::Diverged on a non-finite loss.
TrainResult train(const GrcnnModel& model, std::span<const Cube> dataset, const TrainConfig& cfg);

}  // namespace hsipnp::grcnn
