#include <doctest.h>

#include <cmath>
#include <numeric>

#include "gabo/augment/augmenter.hpp"
#include "gabo/data/synth.hpp"
#include "gabo/features/centrality.hpp"
#include "oracles.hpp"

using namespace gabo;
using namespace gabo::ad;
using namespace gabo::augment;

namespace {

models::ClassifierConfig small_classifier(std::size_t dim) {
  models::ClassifierConfig c;
  c.vocab_sizes.assign(data::kDefaultVocabSizes.begin(), data::kDefaultVocabSizes.end());
  c.dim = dim;
  c.layers = 3;
  return c;
}

AugmenterConfig aug_config(GenerationType g, TransformType t, std::size_t dim = 6) {
  AugmenterConfig c;
  c.generation = g;
  c.transform = t;
  c.dim = dim;
  c.latent_dim = 5;
  c.hidden = 16;
  return c;
}

Tensor random_matrix(Rng& rng, std::size_t r, std::size_t c) { return uniform_noise(r, c, rng); }

constexpr GenerationType kGenerations[] = {GenerationType::noise, GenerationType::classic, GenerationType::gin};
constexpr TransformType kTransforms[] = {TransformType::bias, TransformType::elementwise, TransformType::shifted};

}  // namespace

TEST_CASE("noise input shape, range and determinism") {
  Rng a(3), b(3);
  auto z = build_generator_input_noise(3, 10, a);
  CHECK(z.shape() == Shape{3, 10});
  for (double x : z.values()) CHECK(std::abs(x) <= 1.0);
  CHECK(build_generator_input_noise(3, 10, b).to_vector() == z.to_vector());
  CHECK_THROWS(build_generator_input_noise(3, 0, a));
}

TEST_CASE("classic input carries the path middle node's features") {
  auto p3 = testing::make_graph(3, {{0, 1}, {1, 2}});
  std::vector<data::MolGraph> graphs{p3};
  auto cache = features::classic_features(std::span<const data::MolGraph>(graphs));
  auto batch = data::make_batch(graphs, std::vector<std::size_t>{0}, &cache);
  Augmenter aug(aug_config(GenerationType::classic, TransformType::bias));
  Rng rng(1);
  auto theta = aug.init(rng);
  auto in = aug.build_input(theta.tensors, batch, aug.sample_latent(3, rng), Tensor());
  REQUIRE(in.shape() == Shape{3, 9});
  const auto pr = testing::dense_pagerank(p3);
  CHECK(in.at(1, 5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(in.at(1, 6) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(in.at(1, 7) == 2.0);
  CHECK(in.at(1, 8) == doctest::Approx(pr[1]).epsilon(1e-8));

  auto bare = data::make_batch(graphs, std::vector<std::size_t>{0});
  CHECK_THROWS_AS(aug.build_input(theta.tensors, bare, aug.sample_latent(3, rng), Tensor()), std::invalid_argument);
}

TEST_CASE("generate_phi contracts") {
  Rng rng(2);
  SUBCASE("zero weights give zero phi") {
    Augmenter aug(aug_config(GenerationType::noise, TransformType::bias));
    auto theta = aug.init(rng);
    for (auto& t : theta.tensors) t = Tensor::zeros(t.shape());
    auto phi = aug.generate_phi(theta.tensors, aug.sample_latent(4, rng));
    CHECK(phi.first.to_vector() == std::vector<double>(24, 0.0));
    CHECK_FALSE(phi.second.defined());
  }
  SUBCASE("width 2d splits into two halves") {
    Augmenter aug(aug_config(GenerationType::noise, TransformType::elementwise));
    CHECK(aug.output_dim() == 12);
    auto theta = aug.init(rng);
    auto phi = aug.generate_phi(theta.tensors, aug.sample_latent(4, rng));
    CHECK(phi.first.shape() == Shape{4, 6});
    CHECK(phi.second.shape() == Shape{4, 6});
  }
  SUBCASE("row permutation") {
    Augmenter aug(aug_config(GenerationType::noise, TransformType::shifted));
    auto theta = aug.init(rng);
    auto z = aug.sample_latent(5, rng);
    Index perm{3, 0, 4, 1, 2};
    auto a = aug.generate_phi(theta.tensors, index_select_rows(z, perm));
    auto b = aug.generate_phi(theta.tensors, z);
    CHECK(a.first.to_vector() == index_select_rows(b.first, perm).to_vector());
    CHECK(a.second.to_vector() == index_select_rows(b.second, perm).to_vector());
  }
  SUBCASE("dimension mismatch") {
    Augmenter aug(aug_config(GenerationType::noise, TransformType::bias));
    auto theta = aug.init(rng);
    CHECK_THROWS_AS(aug.generate_phi(theta.tensors, uniform_noise(3, 7, rng)), ShapeError);
  }
}

TEST_CASE("apply_transform examples") {
  auto h = Tensor::from_rows({{1, 2}});
  CHECK(apply_transform(h, {Tensor::zeros({1, 2}), Tensor()}, TransformType::bias).to_vector() == h.to_vector());
  CHECK(apply_transform(h, {Tensor::full({1, 2}, 1.0), Tensor::zeros({1, 2})}, TransformType::elementwise)
            .to_vector() == h.to_vector());
  CHECK(apply_transform(h, {Tensor::zeros({1, 2}), Tensor::zeros({1, 2})}, TransformType::shifted).to_vector() ==
        h.to_vector());
  CHECK(apply_transform(h, {Tensor::from_rows({{0.5, -0.5}}), Tensor()}, TransformType::bias).to_vector() ==
        std::vector<double>{1.5, 1.5});
  auto phi1 = Tensor::from_rows({{2, 3}}), phi2 = Tensor::from_rows({{1, -1}});
  CHECK(apply_transform(h, {phi1, phi2}, TransformType::elementwise).to_vector() == std::vector<double>{3, 5});
  CHECK(apply_transform(h, {phi1, phi2}, TransformType::shifted).to_vector() == std::vector<double>{4, 7});
}

TEST_CASE("apply_transform is local to each node") {
  Rng rng(5);
  for (auto type : kTransforms) {
    auto h = random_matrix(rng, 4, 3);
    Phi phi{random_matrix(rng, 4, 3), type == TransformType::bias ? Tensor() : random_matrix(rng, 4, 3)};
    auto base = apply_transform(h, phi, type);
    auto hv = h.to_vector();
    for (std::size_t j = 0; j < 3; ++j) hv[2 * 3 + j] += 10.0;  // perturb node 2 only
    auto moved = apply_transform(Tensor::matrix(4, 3, hv), phi, type);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        if (i == 2) continue;
        CHECK(moved.at(i, j) == base.at(i, j));
      }
  }
}

TEST_CASE("identity generator leaves logits unchanged") {
  data::SynthOptions opt;
  opt.n_graphs = 6;
  opt.seed = 8;
  auto ds = data::synth_motif_dataset(opt);
  auto cache = features::classic_features(std::span<const data::MolGraph>(ds.graphs));
  std::vector<std::size_t> idx(6);
  std::iota(idx.begin(), idx.end(), 0);
  auto batch = data::make_batch(ds.graphs, idx, &cache);
  models::Classifier model(small_classifier(6));
  Rng rng(9);
  auto omega = model.init(rng);
  NoGradGuard guard;
  auto plain = model.forward(omega.tensors, batch).to_vector();
  for (auto g : kGenerations)
    for (auto t : kTransforms) {
      Augmenter aug(aug_config(g, t));
      auto theta = aug.identity(rng);
      auto z = aug.sample_latent(batch.num_nodes, rng);
      auto logits = model.forward(omega.tensors, batch, [&](const Tensor& h) {
        return aug.augment(theta.tensors, batch, z, h);
      });
      CAPTURE(to_string(g));
      CAPTURE(to_string(t));
      for (std::size_t i = 0; i < plain.size(); ++i) CHECK(std::abs(logits[i] - plain[i]) < 1e-12);
    }
}

TEST_CASE("zeroed first layer makes phi constant across nodes") {
  Rng rng(10);
  Augmenter aug(aug_config(GenerationType::noise, TransformType::elementwise));
  auto theta = aug.init(rng);
  theta.tensors[0] = Tensor::zeros(theta.tensors[0].shape());
  auto phi = aug.generate_phi(theta.tensors, aug.sample_latent(7, rng));
  for (std::size_t i = 1; i < 7; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(phi.first.at(i, j) == phi.first.at(0, j));
      CHECK(phi.second.at(i, j) == phi.second.at(0, j));
    }
}

TEST_CASE("gin generator weights move phi") {
  data::SynthOptions opt;
  opt.n_graphs = 2;
  opt.seed = 4;
  auto ds = data::synth_motif_dataset(opt);
  auto batch = data::make_batch(ds.graphs, std::vector<std::size_t>{0, 1});
  Augmenter aug(aug_config(GenerationType::gin, TransformType::bias));
  Rng rng(11);
  auto theta = aug.init(rng);
  auto h = random_matrix(rng, batch.num_nodes, 6);
  auto z = aug.sample_latent(batch.num_nodes, rng);
  auto phi_of = [&](const std::vector<Tensor>& t) {
    return aug.generate_phi(t, aug.build_input(t, batch, z, h)).first.to_vector();
  };
  const auto base = phi_of(theta.tensors);
  for (std::size_t k = 0; k < 4; ++k) {  // the GIN layer's tensors
    auto moved = theta.tensors;
    auto v = moved[k].to_vector();
    double max_change = 0.0;
    for (std::size_t e = 0; e < std::min<std::size_t>(v.size(), 8); ++e) {
      auto w = v;
      w[e] += 1e-4;
      moved[k] = Tensor(theta.tensors[k].shape(), w);
      auto p = phi_of(moved);
      for (std::size_t i = 0; i < p.size(); ++i) max_change = std::max(max_change, std::abs(p[i] - base[i]));
    }
    CAPTURE(theta.names[k]);
    CHECK(max_change > 1e-10);
  }
}

TEST_CASE("baseline noise stays within the unit box and averages out") {
  Rng rng(12);
  auto h = Tensor::from_rows({{0.3, -2.0}});
  double sum = 0.0, largest = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    auto out = baseline_noise_augment(h, rng);
    for (std::size_t j = 0; j < 2; ++j) {
      const double u = out[j] - h[j];
      largest = std::max(largest, std::abs(u));
      if (j == 0) sum += u;
    }
  }
  CHECK(largest <= 1.0);
  // U[-1, 1] has variance 1/3.
  const double sigma = std::sqrt(1.0 / 3.0 / draws);
  CHECK(std::abs(sum / draws) < 3 * sigma);
  Rng a(13), b(13);
  CHECK(baseline_noise_augment(h, a).to_vector() == baseline_noise_augment(h, b).to_vector());
}

TEST_CASE("type names round trip") {
  for (auto g : kGenerations) CHECK(parse_generation(to_string(g)) == g);
  for (auto t : kTransforms) CHECK(parse_transform(to_string(t)) == t);
  CHECK_THROWS(parse_generation("edges"));
  CHECK_THROWS(parse_transform("affine"));
}
