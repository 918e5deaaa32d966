#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gabo/autodiff/gradcheck.hpp"
#include "gabo/autodiff/op_checks.hpp"
#include "gabo/autodiff/ops.hpp"
#include "gabo/autodiff/optim.hpp"
#include "gabo/common/random.hpp"

using namespace gabo::ad;

namespace {

Tensor random_matrix(gabo::Rng& rng, std::size_t r, std::size_t c) {
  std::vector<double> v(r * c);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor::matrix(r, c, std::move(v));
}

}  // namespace

TEST_CASE("relu clamps negatives") {
  auto y = relu(Tensor::vector({-1.0, 2.0}));
  CHECK(y.to_vector() == std::vector<double>{0.0, 2.0});
}

TEST_CASE("matmul by identity") {
  auto eye = Tensor::from_rows({{1, 0}, {0, 1}});
  auto m = Tensor::from_rows({{3, 4}, {5, 6}});
  CHECK(matmul(eye, m).to_vector() == m.to_vector());
}

TEST_CASE("scatter_sum swaps rows along a two-cycle") {
  auto rows = Tensor::from_rows({{1, 0}, {0, 1}});
  // edges 0->1 and 1->0: gather sources, scatter to destinations
  Index src{0, 1}, dst{1, 0};
  auto agg = scatter_sum_rows(index_select_rows(rows, src), dst, 2);
  CHECK(agg.to_vector() == std::vector<double>{0, 1, 1, 0});
}

TEST_CASE("shape mismatch names the op and both shapes") {
  auto a = Tensor::zeros({2, 3});
  auto b = Tensor::zeros({3, 2});
  try {
    add(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    std::string msg = e.what();
    CHECK(msg.find("add") != std::string::npos);
    CHECK(msg.find("[2, 3]") != std::string::npos);
    CHECK(msg.find("[3, 2]") != std::string::npos);
  }
  CHECK_THROWS_AS(matmul(a, a), ShapeError);
}

TEST_CASE("grad of x^2 at 3") {
  Tape tape;
  auto x = tape.track(Tensor::scalar(3.0));
  auto g = tape.grad(mul(x, x), std::vector{x});
  CHECK(g[0].item() == doctest::Approx(6.0).epsilon(1e-15));
  CHECK_FALSE(g[0].tracked());
}

TEST_CASE("second derivative of x^3 at 2") {
  Tape tape;
  auto x = tape.track(Tensor::scalar(2.0));
  auto y = mul(mul(x, x), x);
  auto dy = tape.grad(y, std::vector{x}, /*create_graph=*/true);
  CHECK(dy[0].item() == doctest::Approx(12.0));
  REQUIRE(dy[0].tracked());
  auto d2y = tape.grad(dy[0], std::vector{x});
  CHECK(d2y[0].item() == doctest::Approx(12.0).epsilon(1e-15));
}

TEST_CASE("grad errors") {
  Tape tape, other;
  auto x = tape.track(Tensor::vector({1.0, 2.0}));
  CHECK_THROWS_AS(tape.grad(x, std::vector{x}), ShapeError);
  auto s = sum(x);
  auto y = other.track(Tensor::scalar(1.0));
  CHECK_THROWS(tape.grad(s, std::vector{y}));
  CHECK_THROWS(tape.grad(s, std::vector{Tensor::scalar(1.0)}));
  CHECK_THROWS(add(x, other.track(Tensor::vector({1.0, 1.0}))));
}

TEST_CASE("unreachable wrt gets zeros") {
  Tape tape;
  auto x = tape.track(Tensor::scalar(1.0));
  auto z = tape.track(Tensor::vector({1.0, 2.0, 3.0}));
  auto g = tape.grad(mul(x, x), std::vector{z});
  CHECK(g[0].to_vector() == std::vector<double>{0, 0, 0});
}

TEST_CASE("matmul chain gradient matches central differences") {
  gabo::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Tensor> point{random_matrix(rng, 3, 3), random_matrix(rng, 3, 3), random_matrix(rng, 3, 3)};
    ScalarFn f = [](std::span<const Tensor> x) {
      auto y = matmul(matmul(x[0], x[1]), x[2]);
      return sum(mul(y, y));
    };
    auto analytic = autodiff_gradient(f, point);
    auto numeric = numeric_gradient(f, point, 1e-5);
    CHECK(max_relative_error(analytic, numeric) < 1e-4);
  }
}

TEST_CASE("every op passes first and second order checks") {
  for (const auto& r : check_all_ops(20, 2024)) {
    CAPTURE(r.op);
    CHECK(r.max_first_order_error < 1e-4);
    CHECK(r.max_second_order_error < 1e-4);
  }
}

TEST_CASE("tape determinism: identical sequences are bit-identical") {
  auto run = [] {
    gabo::Rng rng(5);
    Tape tape;
    auto a = tape.track(random_matrix(rng, 4, 3));
    auto b = tape.track(random_matrix(rng, 3, 2));
    auto y = sum(sigmoid(matmul(a, b)));
    auto g = tape.grad(y, std::vector{a, b}, true);
    auto h = tape.grad(sum(mul(g[0], g[0])), std::vector{a, b});
    auto out = g[1].to_vector();
    auto hv = h[0].to_vector();
    out.insert(out.end(), hv.begin(), hv.end());
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("scatter_sum is permutation-equivariant over edge order") {
  gabo::Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 6, e = 12;
    auto h = random_matrix(rng, n, 4);
    Index src(e), dst(e);
    for (std::size_t i = 0; i < e; ++i) {
      src[i] = static_cast<std::uint32_t>(rng.index(n));
      dst[i] = static_cast<std::uint32_t>(rng.index(n));
    }
    std::vector<std::size_t> perm(e);
    for (std::size_t i = 0; i < e; ++i) perm[i] = i;
    rng.shuffle(perm);
    Index psrc(e), pdst(e);
    for (std::size_t i = 0; i < e; ++i) {
      psrc[i] = src[perm[i]];
      pdst[i] = dst[perm[i]];
    }
    auto a = scatter_sum_rows(index_select_rows(h, src), dst, n);
    auto b = scatter_sum_rows(index_select_rows(h, psrc), pdst, n);
    // Integer-valued inputs make the sums order-independent in floating point.
    std::vector<double> iv(n * 4);
    for (auto& x : iv) x = static_cast<double>(rng.range(-50, 50));
    auto hi = Tensor::matrix(n, 4, iv);
    CHECK(scatter_sum_rows(index_select_rows(hi, src), dst, n).to_vector() ==
          scatter_sum_rows(index_select_rows(hi, psrc), pdst, n).to_vector());
    CHECK(max_relative_error(std::vector{a}, std::vector{b}) < 1e-14);
  }
}

TEST_CASE("sgd step examples") {
  SUBCASE("plain step") {
    std::vector<Tensor> p{Tensor::scalar(1.0)}, g{Tensor::scalar(2.0)}, v{Tensor::scalar(0.0)};
    auto r = sgd_momentum_step(p, g, v, {0.1, 0.0, 0.0}, false);
    CHECK(r.params[0].item() == doctest::Approx(0.8).epsilon(1e-15));
  }
  SUBCASE("momentum recurrence") {
    std::vector<Tensor> p{Tensor::scalar(1.0)}, g{Tensor::scalar(1.0)}, v{Tensor::scalar(0.0)};
    auto r1 = sgd_momentum_step(p, g, v, {0.1, 0.9, 0.0}, false);
    CHECK(r1.params[0].item() == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(r1.buffers[0].item() == doctest::Approx(1.0).epsilon(1e-15));
    auto r2 = sgd_momentum_step(r1.params, g, r1.buffers, {0.1, 0.9, 0.0}, false);
    CHECK(r2.buffers[0].item() == doctest::Approx(1.9).epsilon(1e-15));
    CHECK(r2.params[0].item() == doctest::Approx(0.71).epsilon(1e-14));
  }
  SUBCASE("decay only") {
    std::vector<Tensor> p{Tensor::scalar(2.0)}, g{Tensor::scalar(0.0)}, v{Tensor::scalar(0.0)};
    auto r = sgd_momentum_step(p, g, v, {0.1, 0.0, 0.5}, false);
    CHECK(r.params[0].item() == doctest::Approx(1.9).epsilon(1e-15));
  }
  SUBCASE("invalid hyperparameters") {
    std::vector<Tensor> p{Tensor::scalar(2.0)}, g{Tensor::scalar(0.0)}, v{Tensor::scalar(0.0)};
    CHECK_THROWS(sgd_momentum_step(p, g, v, {-0.1, 0.0, 0.0}, false));
    CHECK_THROWS(sgd_momentum_step(p, g, v, {0.1, 1.0, 0.0}, false));
    CHECK_THROWS(sgd_momentum_step(p, g, v, {0.1, -0.1, 0.0}, false));
  }
}

TEST_CASE("tracked sgd step is differentiable and value-identical") {
  Tape tape;
  auto p = tape.track(Tensor::vector({1.0, -2.0}));
  auto v0 = Tensor::vector({0.3, 0.1});
  auto loss = sum(mul(p, p));
  auto g = tape.grad(loss, std::vector{p}, true);
  auto tracked = sgd_momentum_step(std::vector{p}, g, std::vector{v0}, {0.1, 0.9, 0.01}, true);
  auto plain = sgd_momentum_step(std::vector{p.detach()}, std::vector{g[0].detach()}, std::vector{v0},
                                 {0.1, 0.9, 0.01}, false);
  CHECK(tracked.params[0].to_vector() == plain.params[0].to_vector());
  REQUIRE(tracked.params[0].tracked());
  // p' = p - 0.1 (0.9 v + 2p + 0.01 p)  =>  dp'/dp = 1 - 0.1 * 2.01
  auto d = tape.grad(sum(tracked.params[0]), std::vector{p});
  CHECK(d[0][0] == doctest::Approx(1.0 - 0.201).epsilon(1e-14));
}

TEST_CASE("non-finite results raise") {
  auto big = Tensor::scalar(1e300);
  CHECK_THROWS_AS(mul(big, big), std::domain_error);
}
