#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "hsipnp/admm.hpp"
#include "hsipnp/error.hpp"
#include "hsipnp/fft.hpp"

namespace hsipnp::admm {
namespace {

void require_rho(double rho) {
  require(rho > 0.0 && std::isfinite(rho), ErrorCode::InvalidArgument,
          "x-update: rho must be positive and finite, got " + std::to_string(rho));
}

}  // namespace

std::vector<double> x_update_dense(const degrade::DenseMatrix& d, std::span<const double> y,
                                   std::span<const double> x_tilde, double rho) {
  require_rho(rho);
  require(d.data.size() == d.rows * d.cols && y.size() == d.rows && x_tilde.size() == d.cols,
          ErrorCode::DimensionMismatch, "x_update_dense: operand sizes do not match D");
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> D(d.data.data(), static_cast<Eigen::Index>(d.rows),
                                     static_cast<Eigen::Index>(d.cols));
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  const Eigen::Map<const Eigen::VectorXd> xt(x_tilde.data(),
                                             static_cast<Eigen::Index>(x_tilde.size()));
  Eigen::MatrixXd a = D.transpose() * D;
  a.diagonal().array() += rho;
  const Eigen::VectorXd rhs = D.transpose() * yv + rho * xt;
  const Eigen::VectorXd x = a.llt().solve(rhs);
  return {x.data(), x.data() + x.size()};
}

Cube x_update_dense_oracle(const degrade::TaskOperator& op, const Cube& y, const Cube& x_tilde,
                           double rho, std::size_t max_unknowns) {
  const degrade::DenseMatrix d = degrade::dense_matrix(op, x_tilde.extent(), max_unknowns);
  require(y.extent() == degrade::measurement_extent(op, x_tilde.extent()),
          ErrorCode::DimensionMismatch, "x_update_dense_oracle: measurement extent mismatch");
  const Extent e = x_tilde.extent();
  return Cube(e.rows, e.cols, e.bands, x_update_dense(d, y.data(), x_tilde.data(), rho));
}

Cube x_update_sr(const degrade::SuperRes& op, const Cube& y, const Cube& x_tilde, double rho) {
  require_rho(rho);
  const degrade::TaskOperator top = op;
  require(y.extent() == degrade::measurement_extent(top, x_tilde.extent()),
          ErrorCode::DimensionMismatch, "x_update_sr: measurement extent mismatch");
  const std::size_t f = op.factor();
  const std::size_t rows = x_tilde.rows(), cols = x_tilde.cols();
  const std::size_t lr = rows / f, lc = cols / f;

  // Eigenvalues of G G^T on the LR grid.
  const Spectrum otf = op.otf(rows, cols);
  std::vector<double> denom(lr * lc, 0.0);
  for (std::size_t kr = 0; kr < lr; ++kr)
    for (std::size_t kc = 0; kc < lc; ++kc) {
      double s = 0.0;
      for (std::size_t i = 0; i < f; ++i)
        for (std::size_t j = 0; j < f; ++j) s += std::norm(otf[(kr + i * lr) * cols + kc + j * lc]);
      denom[kr * lc + kc] = s / static_cast<double>(f * f) + rho;
    }

  Cube b = degrade::apply_adjoint(top, y);
  for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] += rho * x_tilde.data()[i];
  const Cube gb = degrade::apply(top, b);
  Cube z(gb.extent());
  for (std::size_t band = 0; band < gb.bands(); ++band) {
    Spectrum spec = fft2_band(gb.band(band), lr, lc);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] /= denom[k];
    const auto plane = ifft2_band(spec, lr, lc);
    std::copy(plane.begin(), plane.end(), z.band(band).begin());
  }
  const Cube gtz = degrade::apply_adjoint(top, z);
  Cube x(x_tilde.extent());
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = (b.data()[i] - gtz.data()[i]) / rho;
  return x;
}

Cube x_update_cs(const degrade::Sensing& op, const Cube& y, const Cube& x_tilde, double rho) {
  require_rho(rho);
  const degrade::TaskOperator top = op;
  require(y.extent() == degrade::measurement_extent(top, x_tilde.extent()),
          ErrorCode::DimensionMismatch, "x_update_cs: measurement extent mismatch");
  Cube r = degrade::apply(top, x_tilde);
  const auto& psi = op.psi();
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double d = rho + psi[i];
    require(d != 0.0, ErrorCode::NonFinite, "x_update_cs: rho + psi vanished");
    r.data()[i] = (y.data()[i] - r.data()[i]) / d;
  }
  Cube x = degrade::apply_adjoint(top, r);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] += x_tilde.data()[i];
  return x;
}

Cube x_update_inpaint(const degrade::Mask& op, const Cube& y, const Cube& x_tilde, double rho) {
  require_rho(rho);
  const Cube& s = op.mask();
  require(y.extent() == s.extent() && x_tilde.extent() == s.extent(),
          ErrorCode::DimensionMismatch, "x_update_inpaint: extent mismatch");
  Cube x(s.extent());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double si = s.data()[i];
    x.data()[i] = (si * y.data()[i] + rho * x_tilde.data()[i]) / (si + rho);
  }
  return x;
}

Cube x_update(const degrade::TaskOperator& op, const Cube& y, const Cube& x_tilde, double rho) {
  if (const auto* sr = std::get_if<degrade::SuperRes>(&op)) return x_update_sr(*sr, y, x_tilde, rho);
  if (const auto* cs = std::get_if<degrade::Sensing>(&op)) return x_update_cs(*cs, y, x_tilde, rho);
  return x_update_inpaint(std::get<degrade::Mask>(op), y, x_tilde, rho);
}

}  // namespace hsipnp::admm
