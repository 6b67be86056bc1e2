#include "hsipnp/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "hsipnp/error.hpp"

namespace hsipnp::grcnn {

double l2_loss(const Cube& prediction, const Cube& target) {
  require(prediction.extent() == target.extent(), ErrorCode::DimensionMismatch,
          "l2_loss: extent mismatch");
  require(!target.empty(), ErrorCode::InvalidArgument, "l2_loss: empty cube");
  double sum = 0.0;
  const auto p = prediction.data();
  const auto t = target.data();
  for (std::size_t i = 0; i < p.size(); ++i) sum += (p[i] - t[i]) * (p[i] - t[i]);
  return sum / static_cast<double>(p.size());
}

Cube l2_loss_gradient(const Cube& prediction, const Cube& target) {
  require(prediction.extent() == target.extent(), ErrorCode::DimensionMismatch,
          "l2_loss_gradient: extent mismatch");
  Cube g(prediction.extent());
  const double k = 2.0 / static_cast<double>(prediction.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    g.data()[i] = k * (prediction.data()[i] - target.data()[i]);
  return g;
}

Adam::Adam(std::size_t parameters, double beta1, double beta2, double epsilon)
    : beta1_(beta1), beta2_(beta2), epsilon_(epsilon), m_(parameters, 0.0), v_(parameters, 0.0) {
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0,
          ErrorCode::InvalidArgument, "Adam: invalid hyperparameters");
}

void Adam::step(std::span<double> params, std::span<const double> grads, double learning_rate) {
  require(params.size() == m_.size() && grads.size() == m_.size(), ErrorCode::DimensionMismatch,
          "Adam: parameter count changed");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
    params[i] -= learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + epsilon_);
  }
}

namespace {

Cube crop_patch(const Cube& src, std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  if (rows == src.rows() && cols == src.cols()) return src;
  const std::size_t r0 = rng() % (src.rows() - rows + 1);
  const std::size_t c0 = rng() % (src.cols() - cols + 1);
  Cube out(rows, cols, src.bands());
  for (std::size_t b = 0; b < src.bands(); ++b)
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) out(r, c, b) = src(r0 + r, c0 + c, b);
  return out;
}

}  // namespace

TrainResult train(const GrcnnModel& model, std::span<const Cube> dataset, const TrainConfig& cfg) {
  require(!dataset.empty(), ErrorCode::InvalidArgument, "train: empty dataset");
  require(cfg.learning_rate >= 0.0 && cfg.lr_decay > 0.0 && cfg.batch_size > 0,
          ErrorCode::InvalidArgument, "train: invalid learning rate, decay or batch size");
  require(!cfg.phases.empty(), ErrorCode::InvalidArgument, "train: no phases");
  for (const TrainPhase& p : cfg.phases) {
    require(p.epochs > 0 && p.sigma_min >= 0.0 && p.sigma_min <= p.sigma_max,
            ErrorCode::InvalidArgument, "train: invalid phase");
  }
  const std::size_t rows = cfg.patch_rows > 0 ? cfg.patch_rows : dataset.front().rows();
  const std::size_t cols = cfg.patch_cols > 0 ? cfg.patch_cols : dataset.front().cols();
  for (const Cube& c : dataset) {
    require(c.rows() >= rows && c.cols() >= cols, ErrorCode::DimensionMismatch,
            "train: dataset cube smaller than the patch size");
  }

  TrainResult result{model, {}};
  GrcnnModel& net = result.model;
  const bool with_map = net.architecture().uses_noise_map;
  std::vector<double> params = net.parameters();
  Adam adam(params.size(), cfg.beta1, cfg.beta2, cfg.epsilon);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t steps_per_epoch =
      cfg.steps_per_epoch > 0 ? cfg.steps_per_epoch
                              : (dataset.size() + cfg.batch_size - 1) / cfg.batch_size;

  double lr = cfg.learning_rate;
  std::size_t cursor = order.size();
  std::vector<double> grad(params.size());
  for (const TrainPhase& phase : cfg.phases) {
    std::uniform_real_distribution<double> sigma_dist(phase.sigma_min, phase.sigma_max);
    for (std::size_t epoch = 0; epoch < phase.epochs; ++epoch) {
      for (std::size_t s = 0; s < steps_per_epoch; ++s) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double loss = 0.0;
        for (std::size_t k = 0; k < cfg.batch_size; ++k) {
          if (cursor == order.size()) {
            std::shuffle(order.begin(), order.end(), rng);
            cursor = 0;
          }
          const Cube clean = crop_patch(dataset[order[cursor++]], rows, cols, rng);
          const double sigma =
              phase.sigma_min == phase.sigma_max ? phase.sigma_min : sigma_dist(rng);
          Cube noisy = clean;
          for (double& v : noisy.data()) v += sigma / 255.0 * gauss(rng);
          std::optional<NoiseLevelMap> map;
          if (with_map) map = NoiseLevelMap{sigma};

          const ForwardPass pass = net.forward_cached(noisy, map);
          loss += l2_loss(pass.output, clean);
          Cube g = l2_loss_gradient(pass.output, clean);
          for (double& v : g.data()) v /= static_cast<double>(cfg.batch_size);
          const std::vector<double> pg = net.backward(pass, g);
          for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += pg[i];
        }
        loss /= static_cast<double>(cfg.batch_size);
        const std::size_t step = result.loss_curve.size();
        if (!std::isfinite(loss)) {
          fail(ErrorCode::Diverged,
               "train: non-finite loss at step " + std::to_string(step) + " (lr " +
                   std::to_string(lr) + "); lower the learning rate");
        }
        result.loss_curve.push_back(loss);
        adam.step(params, grad, lr);
        net.set_parameters(params);
        if (cfg.on_step) cfg.on_step(step, loss);
      }
      lr *= cfg.lr_decay;
    }
  }
  return result;
}

}  // namespace hsipnp::grcnn
