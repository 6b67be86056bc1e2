#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hsipnp/admm.hpp"
#include "hsipnp/elementwise.hpp"
#include "hsipnp/error.hpp"
#include "hsipnp/grcnn.hpp"
#include "random.hpp"

using namespace hsipnp;
using namespace hsipnp::admm;
using namespace hsipnp::degrade;

namespace {

// Proximal map of (mu/2)||v||^2 at the penalty implied by sigma.
Denoiser shrink_denoiser(double mu, double lambda) {
  return [mu, lambda](const Cube& v, double sigma) {
    const double rho = lambda / std::pow(sigma / 255.0, 2);
    Cube out = v;
    for (double& x : out.data()) x *= rho / (rho + mu);
    return out;
  };
}

}  // namespace

TEST_CASE("schedule") {
  SUBCASE("degenerate range") {
    const auto s = make_schedule(50, 50, 3, 1.5);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(s.sigma[k] == 50.0);
      CHECK(s.rho[k] == 1.5 / ((50.0 / 255.0) * (50.0 / 255.0)));
    }
  }
  SUBCASE("geometric spacing") {
    const auto s = make_schedule(40, 10, 3, 1.5);
    CHECK(s.sigma == std::vector<double>{40.0, 20.0, 10.0});
  }
  SUBCASE("rho at sigma 255 is lambda") {
    CHECK(make_schedule(255, 255, 1, 1.5).rho[0] == 1.5);
  }
  SUBCASE("monotone and log-linear") {
    const auto s = make_schedule(50, 5, 25);
    for (std::size_t k = 1; k < 25; ++k) {
      CHECK(s.sigma[k] <= s.sigma[k - 1]);
      CHECK(s.rho[k] >= s.rho[k - 1]);
      CHECK(std::log(s.sigma[k - 1] / s.sigma[k]) == doctest::Approx(std::log(10.0) / 24));
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(make_schedule(10, 0, 3), Error);
    CHECK_THROWS_AS(make_schedule(5, 10, 3), Error);
    CHECK_THROWS_AS(make_schedule(10, 5, 0), Error);
  }
}

TEST_CASE("dense x-update") {
  std::mt19937_64 rng(31);
  SUBCASE("D = I, rho = 1 averages") {
    DenseMatrix d{3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1}};
    const auto x = x_update_dense(d, std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}, 1.0);
    for (double v : x) CHECK(v == doctest::Approx(2.0));
  }
  SUBCASE("D = 0 returns x_tilde") {
    DenseMatrix d{2, 3, std::vector<double>(6, 0.0)};
    const std::vector<double> xt{0.1, -2, 5};
    const auto x = x_update_dense(d, std::vector<double>{4, 4}, xt, 0.3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(xt[i]));
  }
  SUBCASE("random D satisfies the normal equations") {
    std::normal_distribution<double> g;
    DenseMatrix d{12, 9, std::vector<double>(108)};
    for (double& v : d.data) v = g(rng);
    std::vector<double> y(12), xt(9);
    for (double& v : y) v = g(rng);
    for (double& v : xt) v = g(rng);
    const double rho = 0.4;
    const auto x = x_update_dense(d, y, xt, rho);
    double res = 0.0;
    for (std::size_t i = 0; i < 9; ++i) {
      double lhs = rho * x[i], rhs = rho * xt[i];
      for (std::size_t r = 0; r < 12; ++r) {
        double dx = 0.0;
        for (std::size_t c = 0; c < 9; ++c) dx += d(r, c) * x[c];
        lhs += d(r, i) * dx;
        rhs += d(r, i) * y[r];
      }
      res += (lhs - rhs) * (lhs - rhs);
    }
    CHECK(std::sqrt(res) <= 1e-10);
  }
  SUBCASE("size guard") {
    CHECK_THROWS_AS(x_update_dense_oracle(Mask::all_ones({20, 20, 20}), Cube(20, 20, 20),
                                          Cube(20, 20, 20), 1.0),
                    Error);
  }
}

TEST_CASE("fast x-updates match the dense solve") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 10; ++trial) {
    const double rho = std::exp(std::uniform_real_distribution<double>(-3, 3)(rng));
    {
      const SuperRes op(Kernel2d::gaussian(3 + trial % 3, 1.0), 2);
      const Cube xt = oracle::random_cube({8, 8, 2}, rng);
      const Cube y = oracle::random_cube({4, 4, 2}, rng);
      CHECK(oracle::rel_err(x_update_sr(op, y, xt, rho).data(),
                            x_update_dense_oracle(op, y, xt, rho).data()) <= 1e-8);
    }
    {
      const auto op = Sensing::cassi(4, 4, 3, trial);
      const Cube xt = oracle::random_cube({4, 4, 3}, rng);
      const Cube y = oracle::random_cube({4, 4, 1}, rng);
      CHECK(oracle::rel_err(x_update_cs(op, y, xt, rho).data(),
                            x_update_dense_oracle(op, y, xt, rho).data()) <= 1e-8);
    }
    {
      const auto op = Mask::random({8, 8, 3}, 0.5, trial);
      const Cube xt = oracle::random_cube({8, 8, 3}, rng);
      const Cube y = oracle::random_cube({8, 8, 3}, rng);
      CHECK(oracle::rel_err(x_update_inpaint(op, y, xt, rho).data(),
                            x_update_dense_oracle(op, y, xt, rho).data()) <= 1e-12);
    }
  }
}

TEST_CASE("x-update special cases") {
  std::mt19937_64 rng(33);
  SUBCASE("factor 1 with a delta blur is a per-pixel average") {
    const Cube y = oracle::random_cube({4, 4, 2}, rng), xt = oracle::random_cube({4, 4, 2}, rng);
    const Cube x = x_update_sr(SuperRes(Kernel2d::delta(), 1), y, xt, 2.0);
    for (std::size_t i = 0; i < x.size(); ++i)
      CHECK(x.data()[i] == doctest::Approx((y.data()[i] + 2 * xt.data()[i]) / 3).epsilon(1e-12));
  }
  SUBCASE("very large rho returns x_tilde") {
    const Cube y = oracle::random_cube({8, 8, 2}, rng), xt = oracle::random_cube({16, 16, 2}, rng);
    const Cube x = x_update_sr(SuperRes(Kernel2d::gaussian(8, 3), 2), y, xt, 1e8);
    CHECK(oracle::rel_err(x.data(), xt.data()) <= 1e-6);
  }
  SUBCASE("single-band identity sensing") {
    const Sensing op(Cube(1, 1, 1, 1.0), {Shift{}});
    const Cube x = x_update_cs(op, Cube(1, 1, 1, 2.0), Cube(1, 1, 1, 0.0), 1.0);
    CHECK(x(0, 0, 0) == 1.0);
  }
  SUBCASE("consistent measurement keeps x_tilde") {
    const auto op = Sensing::cassi(6, 6, 4, 2);
    const Cube xt = oracle::random_cube({6, 6, 4}, rng);
    const Cube x = x_update_cs(op, degrade::apply(TaskOperator{op}, xt), xt, 0.7);
    CHECK(oracle::rel_err(x.data(), xt.data()) <= 1e-15);
  }
  SUBCASE("inpainting voxels") {
    const Mask op(Cube(1, 2, 1, std::vector<double>{1.0, 0.0}));
    const Cube x = x_update_inpaint(op, Cube(1, 2, 1, std::vector<double>{4.0, 9.0}),
                                    Cube(1, 2, 1, std::vector<double>{2.0, 5.0}), 1.0);
    CHECK(x(0, 0, 0) == 3.0);
    CHECK(x(0, 1, 0) == 5.0);
  }
}

TEST_CASE("initialization") {
  std::mt19937_64 rng(34);
  SUBCASE("super-resolution factor 1 is the identity") {
    const Cube y = oracle::random_cube({5, 6, 2}, rng);
    CHECK(initialize(SuperRes(Kernel2d::delta(), 1), y) == y);
  }
  SUBCASE("bicubic keeps the sampled pixels and reproduces linear ramps") {
    Cube y(6, 6, 1);
    for (std::size_t r = 0; r < 6; ++r)
      for (std::size_t c = 0; c < 6; ++c) y(r, c, 0) = 0.1 * r + 0.05 * c;
    const Cube x = bicubic_upsample(y, 2);
    for (std::size_t r = 0; r < 6; ++r)
      for (std::size_t c = 0; c < 6; ++c) CHECK(x(2 * r, 2 * c, 0) == doctest::Approx(y(r, c, 0)));
    CHECK(x(5, 3, 0) == doctest::Approx(0.1 * 2.5 + 0.05 * 1.5));
  }
  SUBCASE("fully observed mask returns y") {
    const Cube y = oracle::random_cube({5, 5, 3}, rng);
    CHECK(initialize(Mask::all_ones(y.extent()), y) == y);
  }
  SUBCASE("half-masked constant cube stays constant") {
    const auto mask = Mask::random({9, 7, 3}, 0.5, 4);
    const Cube y = hadamard(mask.mask(), Cube(9, 7, 3, 0.375));
    const Cube x = initialize(mask, y);
    for (double v : x.data()) CHECK(v == doctest::Approx(0.375).epsilon(1e-15));
  }
  SUBCASE("a band with no observations takes the observed mean") {
    Cube m(2, 2, 2, 1.0);
    for (double& v : m.band(1)) v = 0.0;
    Cube y(2, 2, 2);
    for (double& v : y.band(0)) v = 0.5;
    for (double v : initialize(Mask(m), y).band(1)) CHECK(v == 0.5);
    CHECK_THROWS_AS(initialize(Mask(Cube(2, 2, 1)), Cube(2, 2, 1)), Error);
  }
  SUBCASE("sensing init is the minimum-norm consistent cube") {
    const auto op = Sensing::cassi(6, 6, 4, 3);
    const Cube x = oracle::random_cube({6, 6, 4}, rng);
    const Cube y = degrade::apply(TaskOperator{op}, x);
    const Cube x0 = initialize(op, y);
    CHECK(oracle::rel_err(degrade::apply(TaskOperator{op}, x0).data(), y.data()) <= 1e-14);
  }
}

TEST_CASE("run") {
  std::mt19937_64 rng(35);
  SUBCASE("identity denoiser on a full mask is a fixed point after one iteration") {
    const Cube y = oracle::random_cube({6, 6, 3}, rng);
    const auto r = run(Mask::all_ones(y.extent()), y, identity_denoiser(), make_schedule(50, 5, 4));
    CHECK(oracle::rel_err(r.output.data(), y.data()) <= 1e-15);
    for (double u : r.u.data()) CHECK(u == 0.0);
    for (const auto& t : r.trace) CHECK(t.primal_residual == 0.0);
  }
  SUBCASE("identity denoiser on inpainting converges to data + initialization") {
    const auto op = Mask::random({8, 8, 3}, 0.5, 5);
    const Cube y = hadamard(op.mask(), oracle::random_cube({8, 8, 3}, rng));
    const auto r = run(op, y, identity_denoiser(), make_schedule(255, 255, 200));
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double want = op.mask().data()[i] != 0.0 ? y.data()[i] : r.initial.data()[i];
      CHECK(r.output.data()[i] == doctest::Approx(want).epsilon(1e-12));
    }
  }
  SUBCASE("dual variable is the running sum of x - v") {
    const auto op = SuperRes(Kernel2d::gaussian(3, 1.0), 2);
    const Cube y = oracle::random_cube({4, 4, 2}, rng);
    std::vector<Cube> xs, vs;
    const Denoiser box = box_denoiser(3);
    Cube v = initialize(op, y), u(v.extent());
    const auto s = make_schedule(40, 10, 6);
    for (std::size_t k = 0; k < 6; ++k) {
      const Cube x = x_update(op, y, sub(v, u), s.rho[k]);
      v = box(add(x, u), s.sigma[k]);
      for (std::size_t i = 0; i < u.size(); ++i) u.data()[i] += x.data()[i] - v.data()[i];
    }
    const auto r = run(op, y, box, s);
    CHECK(r.u == u);
    CHECK(r.output == v);
  }
  SUBCASE("quadratic prior with a fixed penalty drives the primal residual to zero") {
    const auto op = Sensing::cassi(6, 6, 4, 6);
    const Cube y = oracle::random_cube({6, 6, 1}, rng);
    const auto r = run(op, y, shrink_denoiser(0.5, 1.5), make_schedule(255, 255, 200));
    CHECK(r.trace.back().primal_residual < 1e-6);
  }
  SUBCASE("trace and errors") {
    const Cube gt = oracle::random_cube({6, 6, 2}, rng);
    RunOptions o;
    o.ground_truth = &gt;
    const auto r = run(Mask::all_ones(gt.extent()), gt, box_denoiser(3), make_schedule(30, 10, 3), o);
    REQUIRE(r.trace.size() == 3);
    CHECK(r.trace[1].psnr.has_value());
    std::ostringstream csv;
    write_trace_csv(csv, r.trace);
    CHECK(csv.str().rfind("iter,sigma_k,rho_k,primal_residual,psnr\n0,30,", 0) == 0);

    const Denoiser nan_denoiser = [](const Cube& v, double) {
      Cube out = v;
      out(0, 0, 0) = NAN;
      return out;
    };
    CHECK_THROWS_WITH_AS(run(Mask::all_ones(gt.extent()), gt, nan_denoiser, make_schedule(30, 10, 3)),
                         doctest::Contains("iteration 0"), Error);
  }
  SUBCASE("network denoiser clamps sigma to its trained range") {
    auto model = std::make_shared<grcnn::GrcnnModel>(grcnn::Architecture{}, 1);
    std::vector<std::string> warnings;
    const auto d = grcnn_denoiser(model, [&](const std::string& w) { warnings.push_back(w); });
    const Cube x = oracle::random_cube({8, 8, 2}, rng);
    CHECK(d(x, 80.0) == grcnn::denoise(*model, x, 50.0));
    d(x, 80.0);
    d(x, 30.0);
    CHECK(warnings.size() == 1);
  }
}
