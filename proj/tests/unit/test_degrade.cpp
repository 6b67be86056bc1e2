#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "hsipnp/degrade.hpp"
#include "hsipnp/error.hpp"
#include "hsipnp/noise.hpp"
#include "random.hpp"

using namespace hsipnp;
using namespace hsipnp::degrade;

namespace {

std::vector<double> dense_apply(const DenseMatrix& d, std::span<const double> x) {
  std::vector<double> y(d.rows, 0.0);
  for (std::size_t r = 0; r < d.rows; ++r)
    for (std::size_t c = 0; c < d.cols; ++c) y[r] += d(r, c) * x[c];
  return y;
}

Kernel2d random_blur(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> taps(rows * cols);
  double total = 0.0;
  for (double& t : taps) total += (t = u(rng));
  for (double& t : taps) t /= total;
  return Kernel2d(rows, cols, taps);
}

}  // namespace

TEST_CASE("blur kernels are normalized") {
  CHECK_THROWS_AS(Kernel2d(1, 2, {0.5, 0.6}), Error);
  const auto g = Kernel2d::gaussian(8, 3.0);
  double total = 0.0;
  for (double t : g.taps()) total += t;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g(3, 3) == doctest::Approx(g(4, 4)));
}

TEST_CASE("apply agrees with the entry-by-entry matrix") {
  std::mt19937_64 rng(11);
  const std::vector<TaskOperator> ops = {
      SuperRes(random_blur(rng, 3, 3), 2),
      SuperRes(random_blur(rng, 4, 2), 2),
      SuperRes(Kernel2d::delta(), 1),
      Sensing::cassi(4, 6, 3, 5),
      Mask::random({4, 4, 3}, 0.4, 6),
  };
  const std::vector<Extent> extents = {{8, 8, 2}, {8, 6, 2}, {3, 5, 2}, {4, 6, 3}, {4, 4, 3}};
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const Cube x = oracle::random_cube(extents[i], rng);
    const auto d = dense_matrix(ops[i], extents[i]);
    const Cube y = apply(ops[i], x);
    CHECK(oracle::rel_err(y.data(), dense_apply(d, x.data())) <= 1e-12);
  }
}

TEST_CASE("apply_adjoint is the transpose of apply") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    TaskOperator op = Mask::random({6, 4, 3}, 0.5, trial);
    Extent e{6, 4, 3};
    if (trial % 3 == 0) {
      op = SuperRes(Kernel2d::gaussian(5, 1.2), 2);
      e = {8, 6, 3};
    } else if (trial % 3 == 1) {
      op = Sensing::cassi(5, 7, 4, trial);
      e = {5, 7, 4};
    }
    const Cube x = oracle::random_cube(e, rng, -1, 1);
    const Cube y = oracle::random_cube(measurement_extent(op, e), rng, -1, 1);
    const double lhs = dot(apply(op, x).data(), y.data());
    const double rhs = dot(x.data(), apply_adjoint(op, y).data());
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("CASSI has a diagonal Gram matrix equal to psi") {
  const auto s = Sensing::cassi(4, 5, 3, 9);
  const auto d = dense_matrix(s, {4, 5, 3});
  for (std::size_t i = 0; i < d.rows; ++i)
    for (std::size_t j = 0; j < d.rows; ++j) {
      double g = 0.0;
      for (std::size_t k = 0; k < d.cols; ++k) g += d(i, k) * d(j, k);
      CHECK(g == (i == j ? s.psi()[i] : 0.0));
    }
  CHECK(s.shifts()[2].cols == 2);
}

TEST_CASE("operators reject incompatible extents") {
  CHECK_THROWS_AS(apply(SuperRes(Kernel2d::delta(), 2), Cube(5, 4, 1)), Error);
  CHECK_THROWS_AS(apply(Mask::all_ones({2, 2, 1}), Cube(2, 3, 1)), Error);
  CHECK_THROWS_AS(Mask(Cube(1, 2, 1, std::vector<double>{0.0, 0.5})), Error);
  CHECK_THROWS_WITH_AS(dense_matrix(Mask::all_ones({10, 10, 50}), {10, 10, 50}),
                       doctest::Contains("exceed"), Error);
}

TEST_CASE("masks") {
  const auto m = Mask::random({16, 16, 4}, 0.5, 1).mask();
  double kept = 0.0;
  for (double v : m.data()) kept += v;
  CHECK(kept / static_cast<double>(m.size()) == doctest::Approx(0.5).epsilon(0.1));
  const auto s = Mask::stripes({6, 10, 2}, 0.5, 2).mask();
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t c = 0; c < 10; ++c)
      for (std::size_t r = 1; r < 6; ++r) CHECK(s(r, c, b) == s(0, c, b));
}

TEST_CASE("noise models") {
  std::mt19937_64 rng(13);
  const Cube x = oracle::random_cube({16, 16, 6}, rng, 0.2, 0.8);

  SUBCASE("zero sigma leaves the cube unchanged") {
    CHECK(add_noise(x, {IidGaussian{0.0}, 1}) == x);
  }
  SUBCASE("deterministic per seed") {
    CHECK(add_noise(x, {IidGaussian{25.0}, 4}) == add_noise(x, {IidGaussian{25.0}, 4}));
    CHECK(add_noise(x, {IidGaussian{25.0}, 4}) != add_noise(x, {IidGaussian{25.0}, 5}));
  }
  SUBCASE("iid gaussian has the requested spread") {
    const Cube n = add_noise(Cube(64, 64, 4), {IidGaussian{25.5}, 2});
    double ss = 0.0;
    for (double v : n.data()) ss += v * v;
    CHECK(std::sqrt(ss / static_cast<double>(n.size())) == doctest::Approx(0.1).epsilon(0.03));
  }
  SUBCASE("impulse sets pixels to 0 or 1 on a third of the bands") {
    const Cube n = add_noise(x, {Impulse{}, 3});
    std::set<std::size_t> touched;
    for (std::size_t i = 0; i < n.size(); ++i) {
      if (n.data()[i] != x.data()[i]) {
        CHECK((n.data()[i] == 0.0 || n.data()[i] == 1.0));
        touched.insert(i / 256);
      }
    }
    CHECK(touched.size() == 2);
  }
  SUBCASE("stripes darken whole columns") {
    const Cube n = add_noise(x, {Stripe{}, 4});
    for (std::size_t b = 0; b < 6; ++b)
      for (std::size_t c = 0; c < 16; ++c) {
        const double d0 = n(0, c, b) - x(0, c, b);
        CHECK(d0 <= 0.0);
        for (std::size_t r = 1; r < 16; ++r)
          CHECK(n(r, c, b) - x(r, c, b) == doctest::Approx(d0).epsilon(1e-12));
      }
  }
  SUBCASE("non-iid levels differ per band") {
    const Cube n = add_noise(Cube(32, 32, 4), {NonIidGaussian{70.0}, 6});
    std::set<long> spreads;
    for (std::size_t b = 0; b < 4; ++b) {
      double ss = 0.0;
      for (double v : n.band(b)) ss += v * v;
      spreads.insert(std::lround(1000.0 * std::sqrt(ss / 1024.0)));
    }
    CHECK(spreads.size() == 4);
  }
}
