#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "hsipnp/checkpoint.hpp"
#include "hsipnp/elementwise.hpp"
#include "hsipnp/error.hpp"
#include "hsipnp/grcnn.hpp"
#include "hsipnp/grconv.hpp"
#include "hsipnp/synthetic.hpp"
#include "hsipnp/train.hpp"
#include "random.hpp"
#include "recurrence.hpp"

using namespace hsipnp;
using namespace hsipnp::grcnn;

namespace {

GrconvUnit random_unit(std::mt19937_64& rng, std::size_t in, std::size_t out, Direction d,
                       double scale = 0.5) {
  GrconvUnit u(in, out, 3, d);
  u.for_each_kernel([&](Kernel3d& k) { oracle::randomize(k, rng, scale); });
  return u;
}

Architecture tiny_arch() {
  Architecture a;
  a.depth = 1;
  a.widths = {2, 4};
  return a;
}

Cube reverse_bands(const Cube& c) {
  Cube r(c.extent());
  for (std::size_t b = 0; b < c.bands(); ++b)
    for (std::size_t i = 0; i < c.rows(); ++i)
      for (std::size_t j = 0; j < c.cols(); ++j) r(i, j, c.bands() - 1 - b) = c(i, j, b);
  return r;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("hsipnp_test_" + name);
}

}  // namespace

TEST_CASE("grconv forward equals the scalar recurrence") {
  std::mt19937_64 rng(21);
  for (Direction d : {Direction::Forward, Direction::Backward, Direction::Bidirectional}) {
    const auto unit = random_unit(rng, 2, 3, d);
    const auto x = oracle::random_tensor(2, {4, 4, 5}, rng);
    const auto got = unit.forward(x);
    const auto want = oracle::scalar_grconv(unit, x);
    REQUIRE(got.channels() == (d == Direction::Bidirectional ? 6u : 3u));
    CHECK(oracle::rel_err(got.data(), want.data()) <= 1e-12);
  }
}

TEST_CASE("grconv gate extremes") {
  std::mt19937_64 rng(22);
  auto unit = random_unit(rng, 1, 2, Direction::Forward);
  const auto x = oracle::random_tensor(1, {3, 3, 4}, rng);
  auto& pass = unit.passes()[0];

  SUBCASE("w == 1 passes the candidate through") {
    for (double& b : pass.weight_kernel.bias()) b = 1e3;
    const auto h = unit.forward(x);
    const auto f = hsipnp::tanh(conv3d(x, pass.feature_kernel));
    CHECK(oracle::rel_err(h.data(), f.data()) <= 1e-14);
  }
  SUBCASE("w == 0 keeps the zero initial state") {
    for (double& b : pass.weight_kernel.bias()) b = -1e3;
    const auto h = unit.forward(x);
    for (double v : h.data()) CHECK(v == 0.0);
  }
}

TEST_CASE("single-direction output is strictly inside (-1, 1)") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const auto unit = random_unit(rng, 2, 2, trial % 2 ? Direction::Forward : Direction::Backward, 1.0);
    const auto x = oracle::random_tensor(2, {4, 4, 6}, rng, -2, 2);
    const auto h = unit.forward(x);
    for (double v : h.data()) CHECK(std::abs(v) < 1.0);
  }
}

TEST_CASE("grconv backward matches finite differences") {
  std::mt19937_64 rng(24);
  for (bool transposed : {false, true}) {
    GrconvUnit unit(2, 2, 3, Direction::Bidirectional, transposed, {1, 2, 2});
    unit.for_each_kernel([&](Kernel3d& k) { oracle::randomize(k, rng); });
    const auto x = oracle::random_tensor(2, {4, 4, 3}, rng);
    const auto r = oracle::random_tensor(4, unit.output_extent(x.extent()), rng);
    GrconvCache cache;
    unit.forward(x, &cache);
    GrconvUnit grads = unit.zeros_like();
    const auto dx = unit.backward(cache, r, grads);
    const double h = 1e-6;
    for (std::size_t i = 0; i < x.size(); i += 5) {
      auto xp = x, xm = x;
      xp.data()[i] += h;
      xm.data()[i] -= h;
      const double fd = (dot(unit.forward(xp).data(), r.data()) - dot(unit.forward(xm).data(), r.data())) / (2 * h);
      CHECK(fd == doctest::Approx(dx.data()[i]).epsilon(1e-6));
    }
    const auto& gk = grads.passes()[1].feature_kernel;
    for (std::size_t i = 0; i < gk.bias().size(); ++i) {
      auto up = unit, um = unit;
      up.passes()[1].feature_kernel.bias()[i] += h;
      um.passes()[1].feature_kernel.bias()[i] -= h;
      const double fd = (dot(up.forward(x).data(), r.data()) - dot(um.forward(x).data(), r.data())) / (2 * h);
      CHECK(fd == doctest::Approx(gk.bias()[i]).epsilon(1e-6));
    }
  }
}

TEST_CASE("model forward contract") {
  const GrcnnModel model(Architecture{}, 3);
  std::mt19937_64 rng(25);
  const Cube x = oracle::random_cube({8, 8, 4}, rng);

  CHECK(model.forward(x, NoiseLevelMap{20}).extent() == x.extent());
  CHECK(model.forward(x, NoiseLevelMap{20}) == model.forward(x, NoiseLevelMap{20}));
  CHECK(model.forward(x, NoiseLevelMap{20}).all_finite());
  CHECK_THROWS_AS(model.forward(Cube(6, 8, 4), NoiseLevelMap{20}), Error);
  CHECK_THROWS_AS(model.forward(x, std::nullopt), Error);
  Architecture no_map;
  no_map.uses_noise_map = false;
  CHECK_THROWS_AS(GrcnnModel(no_map, 1).forward(x, NoiseLevelMap{20}), Error);
  CHECK(denoise(model, x, 20) == model.forward(x, NoiseLevelMap{20}));
}

TEST_CASE("zeroed exit unit gives an all-zero output") {
  GrcnnModel model(Architecture{}, 4);
  model.mutable_exit().for_each_kernel([](Kernel3d& k) { k = k.zeros_like(); });
  std::mt19937_64 rng(26);
  const Cube out = model.forward(oracle::random_cube({8, 8, 3}, rng), NoiseLevelMap{10});
  for (double v : out.data()) CHECK(v == 0.0);
}

TEST_CASE("mirrored model is band-reversal equivariant") {
  std::mt19937_64 rng(27);
  for (std::size_t depth : {1u, 2u}) {
    Architecture a;
    a.depth = depth;
    a.widths = depth == 1 ? std::vector<std::size_t>{4, 6} : std::vector<std::size_t>{4, 6, 8};
    const GrcnnModel model(a, 5);
    const Cube x = oracle::random_cube({8, 8, 5}, rng);
    const Cube lhs = model.mirrored().forward(reverse_bands(x), NoiseLevelMap{15});
    const Cube rhs = reverse_bands(model.forward(x, NoiseLevelMap{15}));
    CHECK(oracle::rel_err(lhs.data(), rhs.data()) <= 1e-12);
  }
}

TEST_CASE("model backward") {
  const GrcnnModel model(tiny_arch(), 6);
  std::mt19937_64 rng(28);
  const Cube x = oracle::random_cube({4, 4, 3}, rng);
  const auto pass = model.forward_cached(x, NoiseLevelMap{25});

  SUBCASE("zero upstream gradient") {
    for (double g : model.backward(pass, Cube(x.extent()))) CHECK(g == 0.0);
  }
  SUBCASE("matches central differences on a sample of parameters") {
    const Cube r = oracle::random_cube(x.extent(), rng, -1, 1);
    const auto grad = model.backward(pass, r);
    const auto params = model.parameters();
    REQUIRE(grad.size() == params.size());
    GrcnnModel probe = model;
    for (std::size_t i = 0; i < params.size(); i += 37) {
      auto p = params;
      p[i] += 1e-5;
      probe.set_parameters(p);
      const double fp = dot(probe.forward(x, NoiseLevelMap{25}).data(), r.data());
      p[i] -= 2e-5;
      probe.set_parameters(p);
      const double fm = dot(probe.forward(x, NoiseLevelMap{25}).data(), r.data());
      const double fd = (fp - fm) / 2e-5;
      CHECK(std::abs(fd - grad[i]) <= 1e-5 * std::max(1e-3, std::abs(grad[i])));
    }
  }
  SUBCASE("stale caches are rejected") {
    GrcnnModel changed = model;
    CHECK_THROWS_AS(changed.backward(pass, x), Error);
    const auto own = changed.forward_cached(x, NoiseLevelMap{25});
    changed.mutable_projection();
    CHECK_THROWS_WITH_AS(changed.backward(own, x), doctest::Contains("stale"), Error);
  }
}

TEST_CASE("l2 loss gradient is 2 (prediction - target) / n") {
  const Cube p(1, 2, 1, std::vector<double>{1.0, 3.0});
  const Cube t(1, 2, 1, std::vector<double>{0.0, 1.0});
  CHECK(l2_loss(p, t) == 2.5);
  CHECK(l2_loss_gradient(p, t) == Cube(1, 2, 1, std::vector<double>{1.0, 2.0}));
}

TEST_CASE("training") {
  const std::vector<Cube> one{synthetic_scene({8, 8, 4}, 1)};
  TrainConfig cfg;
  cfg.batch_size = 1;
  cfg.seed = 3;
  const GrcnnModel model(tiny_arch(), 7);

  SUBCASE("overfits a single patch") {
    cfg.phases = {{200, 0.0, 0.0}};
    cfg.learning_rate = 1e-2;
    const auto r = train(model, one, cfg);
    REQUIRE(r.loss_curve.size() == 200);
    CHECK(r.loss_curve.back() <= 0.1 * r.loss_curve.front());
  }
  SUBCASE("zero learning rate leaves parameters unchanged") {
    cfg.phases = {{3, 50.0, 50.0}};
    cfg.learning_rate = 0.0;
    CHECK(train(model, one, cfg).model.parameters() == model.parameters());
  }
  SUBCASE("bit-identical loss curves per seed") {
    cfg.phases = {{4, 50.0, 50.0}, {4, 0.0, 50.0}};
    CHECK(train(model, one, cfg).loss_curve == train(model, one, cfg).loss_curve);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(train(model, std::vector<Cube>{}, cfg), Error);
    Cube bad = one[0];
    bad(0, 0, 0) = NAN;
    try {
      train(model, std::vector<Cube>{bad}, cfg);
      FAIL("expected divergence");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Diverged);
    }
  }
}

TEST_CASE("checkpoint round trip and corruption") {
  const GrcnnModel model(tiny_arch(), 8);
  const auto path = temp_path("model.grc");
  save_checkpoint(model, path);
  const GrcnnModel loaded = load_checkpoint(path);
  CHECK(loaded.architecture() == model.architecture());
  const auto a = model.parameters(), b = loaded.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == static_cast<double>(static_cast<float>(a[i])));

  std::vector<char> bytes(std::filesystem::file_size(path));
  std::ifstream(path, std::ios::binary).read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  const auto code_of = [&](std::vector<char> data) {
    std::ofstream(path, std::ios::binary | std::ios::trunc)
        .write(data.data(), static_cast<std::streamsize>(data.size()));
    try {
      load_checkpoint(path);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  CHECK(code_of(flipped) == ErrorCode::CrcMismatch);
  auto magic = bytes;
  magic[0] = 'X';
  CHECK(code_of(magic) == ErrorCode::BadMagic);
  CHECK(code_of({bytes.begin(), bytes.begin() + 8}) == ErrorCode::Truncated);
  CHECK(code_of({bytes.begin(), bytes.end() - 10}) == ErrorCode::Truncated);
  std::filesystem::remove(path);
}
