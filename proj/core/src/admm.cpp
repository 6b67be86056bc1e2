#include "hsipnp/admm.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>

#include "hsipnp/error.hpp"
#include "hsipnp/grcnn.hpp"
#include "hsipnp/metrics.hpp"

namespace hsipnp::admm {

Schedule make_schedule(double sigma_1, double sigma_2, std::size_t iterations, double lambda) {
  require(iterations >= 1, ErrorCode::InvalidArgument, "make_schedule: need at least 1 iteration");
  require(sigma_2 > 0.0, ErrorCode::InvalidArgument, "make_schedule: sigma_2 must be positive");
  require(sigma_1 >= sigma_2, ErrorCode::InvalidArgument,
          "make_schedule: sigma_1 must not be below sigma_2");
  require(lambda > 0.0, ErrorCode::InvalidArgument, "make_schedule: lambda must be positive");
  Schedule s{sigma_1, sigma_2, iterations, lambda, {}, {}};
  s.sigma.resize(iterations);
  s.rho.resize(iterations);
  const double ratio = sigma_2 / sigma_1;
  for (std::size_t k = 0; k < iterations; ++k) {
    if (k == 0) {
      s.sigma[k] = sigma_1;
    } else if (k + 1 == iterations) {
      s.sigma[k] = sigma_2;
    } else {
      const double t = static_cast<double>(k) / static_cast<double>(iterations - 1);
      s.sigma[k] = sigma_1 * std::pow(ratio, t);
    }
    const double unit = s.sigma[k] / 255.0;
    s.rho[k] = lambda / (unit * unit);
  }
  return s;
}

Denoiser identity_denoiser() {
  return [](const Cube& v, double) { return v; };
}

Denoiser box_denoiser(std::size_t size) {
  require(size % 2 == 1, ErrorCode::InvalidArgument, "box_denoiser: size must be odd");
  return [size](const Cube& v, double) {
    const std::size_t h = size / 2;
    const std::size_t rows = v.rows(), cols = v.cols();
    Cube out(v.extent());
    for (std::size_t b = 0; b < v.bands(); ++b)
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
          double s = 0.0;
          std::size_t n = 0;
          for (std::size_t rr = r > h ? r - h : 0; rr <= std::min(rows - 1, r + h); ++rr)
            for (std::size_t cc = c > h ? c - h : 0; cc <= std::min(cols - 1, c + h); ++cc) {
              s += v(rr, cc, b);
              ++n;
            }
          out(r, c, b) = s / static_cast<double>(n);
        }
    return out;
  };
}

Denoiser grcnn_denoiser(std::shared_ptr<const grcnn::GrcnnModel> model,
                        std::function<void(const std::string&)> warn) {
  require(model != nullptr, ErrorCode::InvalidArgument, "grcnn_denoiser: null model");
  if (!warn) warn = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
  struct Reported {
    std::mutex lock;
    std::set<double> values;
  };
  auto reported = std::make_shared<Reported>();
  return [model, warn, reported](const Cube& v, double sigma) {
    const auto& arch = model->architecture();
    const double clamped = std::clamp(sigma, arch.sigma_min, arch.sigma_max);
    if (clamped != sigma) {
      const std::lock_guard guard(reported->lock);
      if (reported->values.insert(sigma).second) {
        std::ostringstream msg;
        msg << "denoiser sigma " << sigma << " outside the trained range [" << arch.sigma_min
            << ", " << arch.sigma_max << "], using " << clamped;
        warn(msg.str());
      }
    }
    return grcnn::denoise(*model, v, clamped);
  };
}

RunResult run(const degrade::TaskOperator& op, const Cube& y, const Denoiser& denoiser,
              const Schedule& schedule, const RunOptions& options) {
  require(static_cast<bool>(denoiser), ErrorCode::InvalidArgument, "run: no denoiser");
  require(schedule.iterations >= 1 && schedule.sigma.size() == schedule.iterations &&
              schedule.rho.size() == schedule.iterations,
          ErrorCode::InvalidArgument, "run: malformed schedule");
  require(y.all_finite(), ErrorCode::NonFinite, "run: observation has non-finite values");

  RunResult res;
  res.initial = options.initial ? *options.initial : initialize(op, y);
  const Extent signal = res.initial.extent();
  require(degrade::measurement_extent(op, signal) == y.extent(), ErrorCode::DimensionMismatch,
          "run: initial estimate does not match the observation");
  if (options.ground_truth != nullptr) {
    require(options.ground_truth->extent() == signal, ErrorCode::DimensionMismatch,
            "run: ground truth extent does not match the signal");
  }

  Cube v = res.initial;
  Cube u(signal);
  Cube x;
  Cube x_tilde(signal);
  Cube v_tilde(signal);
  for (std::size_t k = 0; k < schedule.iterations; ++k) {
    for (std::size_t i = 0; i < v.size(); ++i) x_tilde.data()[i] = v.data()[i] - u.data()[i];
    x = x_update(op, y, x_tilde, schedule.rho[k]);
    for (std::size_t i = 0; i < x.size(); ++i) v_tilde.data()[i] = x.data()[i] + u.data()[i];
    v = denoiser(v_tilde, schedule.sigma[k]);
    require(v.extent() == signal, ErrorCode::DimensionMismatch,
            "run: denoiser changed the cube extent at iteration " + std::to_string(k));
    double residual = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double d = x.data()[i] - v.data()[i];
      u.data()[i] += d;
      residual += d * d;
    }
    if (!x.all_finite() || !v.all_finite() || !std::isfinite(residual)) {
      fail(ErrorCode::NonFinite, "run: non-finite iterate at iteration " + std::to_string(k));
    }
    TraceRow row{k, schedule.sigma[k], schedule.rho[k], std::sqrt(residual), std::nullopt};
    if (options.ground_truth != nullptr) row.psnr = metrics::psnr(*options.ground_truth, v);
    res.trace.push_back(row);
    if (options.on_iteration) options.on_iteration(row);
  }
  res.output = std::move(v);
  res.x = std::move(x);
  res.u = std::move(u);
  return res;
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace) {
  const bool with_psnr = !trace.empty() && trace.front().psnr.has_value();
  out << "iter,sigma_k,rho_k,primal_residual" << (with_psnr ? ",psnr" : "") << '\n';
  const auto old = out.precision(17);
  for (const TraceRow& r : trace) {
    out << r.iter << ',' << r.sigma << ',' << r.rho << ',' << r.primal_residual;
    if (with_psnr) out << ',' << r.psnr.value_or(NAN);
    out << '\n';
  }
  out.precision(old);
}

}  // namespace hsipnp::admm
