#include <doctest.h>

#include <cmath>
#include <numeric>

#include "gabo/common/random.hpp"
#include "gabo/features/centrality.hpp"
#include "oracles.hpp"

using namespace gabo::features;
using gabo::testing::make_graph;

namespace {

auto path3() { return make_graph(3, {{0, 1}, {1, 2}}); }
auto star(std::uint32_t leaves) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> e;
  for (std::uint32_t i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return make_graph(leaves + 1, e);
}

}  // namespace

TEST_CASE("degree") {
  CHECK(degree(path3())[1] == 2.0);
  CHECK(degree(make_graph(3, {{0, 1}}))[2] == 0.0);
  CHECK(degree(star(4))[0] == 4.0);
}

TEST_CASE("pagerank examples") {
  auto k2 = pagerank(make_graph(2, {{0, 1}}));
  CHECK(k2[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(k2[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pagerank(make_graph(1, {}))[0] == doctest::Approx(1.0).epsilon(1e-12));
  auto s3 = pagerank(star(3));
  auto oracle = gabo::testing::dense_pagerank(star(3));
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(s3[i] - oracle[i]) < 1e-8);
  CHECK(std::accumulate(s3.begin(), s3.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  // Isolated nodes redistribute uniformly.
  auto iso = pagerank(make_graph(3, {{0, 1}}));
  auto iso_oracle = gabo::testing::dense_pagerank(make_graph(3, {{0, 1}}));
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(iso[i] - iso_oracle[i]) < 1e-8);
  CHECK_THROWS_AS(pagerank(make_graph(0, {})), std::invalid_argument);
  PageRankOptions tight;
  tight.max_iter = 2;
  try {
    pagerank(star(5), tight);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.residual() > 0.0);
  }
}

TEST_CASE("betweenness examples") {
  CHECK(betweenness(path3()) == std::vector<double>{0.0, 1.0, 0.0});
  auto k5 = make_graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}});
  for (double x : betweenness(k5)) CHECK(x == 0.0);
  CHECK(betweenness(make_graph(2, {{0, 1}})) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("closeness examples") {
  auto c = closeness(path3());
  CHECK(c[1] == 1.0);
  CHECK(c[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  auto with_isolated = closeness(make_graph(3, {{0, 1}}));
  CHECK(with_isolated[2] == 0.0);
  CHECK(with_isolated[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("classic features layout") {
  auto f = classic_features(path3());
  REQUIRE(f.size() == 12);
  CHECK(f[4] == 1.0);
  CHECK(f[5] == 1.0);
  CHECK(f[6] == 2.0);
  CHECK(f[7] == doctest::Approx(pagerank(path3())[1]));
}

TEST_CASE("oracles agree on every connected graph with at most 5 labelled nodes") {
  for (std::size_t n = 1; n <= 5; ++n) {
    for (const auto& g : gabo::testing::connected_labelled_graphs(n)) {
      auto bc = betweenness(g);
      auto bf = gabo::testing::brute_force_betweenness(g);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(bc[i] - bf[i]) <= 1e-12);
      CHECK(closeness(g) == gabo::testing::brute_force_closeness(g));
      auto pr = pagerank(g);
      auto dp = gabo::testing::dense_pagerank(g);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(pr[i] - dp[i]) < 1e-8);
    }
  }
}

TEST_CASE("isomorphism-class enumeration counts") {
  // OEIS A001349: connected graphs on n unlabelled nodes.
  const std::size_t expected[] = {1, 1, 2, 6, 21, 112};
  for (std::size_t n = 1; n <= 6; ++n) CHECK(gabo::testing::connected_graphs_up_to_iso(n).size() == expected[n - 1]);
}

TEST_CASE("all measures are equivariant under relabelling") {
  gabo::Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<std::uint32_t>(2 + rng.index(12));
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::uint32_t u = 0; u < n; ++u)
      for (std::uint32_t v = u + 1; v < n; ++v)
        if (rng.bernoulli(0.3)) edges.emplace_back(u, v);
    auto g = make_graph(n, edges);
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    rng.shuffle(perm);
    auto h = gabo::testing::relabel(g, perm);
    auto fg = classic_features(g);
    auto fh = classic_features(h);
    for (std::uint32_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < 3; ++k) {
        // Betweenness sums are order dependent in the last bit only.
        if (k == 0) {
          CHECK(std::abs(fg[i * 4 + k] - fh[perm[i] * 4 + k]) <= 1e-12);
        } else {
          CHECK(fg[i * 4 + k] == fh[perm[i] * 4 + k]);
        }
      }
      CHECK(std::abs(fg[i * 4 + 3] - fh[perm[i] * 4 + 3]) < 1e-9);
    }
  }
}

TEST_CASE("standardize centres and scales columns") {
  std::vector<std::vector<double>> cache{{1, 2, 3, 4, 3, 2, 3, 6}};
  standardize(cache);
  CHECK(cache[0][0] == doctest::Approx(-1.0));
  CHECK(cache[0][4] == doctest::Approx(1.0));
  CHECK(cache[0][2] == 0.0);  // constant column is centred only
}
