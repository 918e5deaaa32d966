#include "gabo/data/synth.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "gabo/common/random.hpp"

namespace gabo::data {

namespace {

enum class Variant { kMarkedRing = 0, kMarkedTreeOnly = 1, kMarkedTreeUnmarkedRing = 2 };

constexpr int kCarbon = 5, kNitrogen = 6, kOxygen = 7;
constexpr std::size_t kMaxAttempts = 16;

struct Builder {
  MolGraph g;
  std::vector<int> degree;
  std::vector<bool> in_ring;
  std::vector<std::size_t> ring_len;

  std::uint32_t add_node(bool ring, std::size_t len) {
    degree.push_back(0);
    in_ring.push_back(ring);
    ring_len.push_back(len);
    return static_cast<std::uint32_t>(g.num_nodes++);
  }
  void connect(std::uint32_t u, std::uint32_t v) {
    add_edge(g, u, v);
    ++degree[u];
    ++degree[v];
  }
};

std::uint32_t pick_attachment(Builder& b, std::size_t tree_size, Rng& rng) {
  // Prefer tree nodes with spare valence; fall back to any tree node.
  for (int tries = 0; tries < 32; ++tries) {
    auto u = static_cast<std::uint32_t>(rng.index(tree_size));
    if (b.degree[u] < 4) return u;
  }
  return static_cast<std::uint32_t>(rng.index(tree_size));
}

std::vector<std::uint32_t> add_ring(Builder& b, std::size_t len, std::size_t tree_size, Rng& rng) {
  std::vector<std::uint32_t> ring;
  for (std::size_t k = 0; k < len; ++k) ring.push_back(b.add_node(true, len));
  for (std::size_t k = 0; k < len; ++k) b.connect(ring[k], ring[(k + 1) % len]);
  b.connect(ring[0], pick_attachment(b, tree_size, rng));
  return ring;
}

MolGraph make_graph(bool positive, const SynthOptions& opt, Rng& rng, std::int64_t& template_id) {
  const auto& rule = opt.rule;
  const std::size_t total = static_cast<std::size_t>(rng.range(static_cast<int>(opt.min_nodes), static_cast<int>(opt.max_nodes)));
  Variant variant = Variant::kMarkedRing;
  if (!positive) variant = rng.bernoulli(0.5) ? Variant::kMarkedTreeOnly : Variant::kMarkedTreeUnmarkedRing;
  const bool has_big_ring = variant != Variant::kMarkedTreeOnly;
  const std::size_t big_len =
      has_big_ring ? static_cast<std::size_t>(rng.range(static_cast<int>(rule.min_ring), static_cast<int>(rule.max_ring))) : 0;
  const bool has_small_ring = rng.bernoulli(0.3);
  const std::size_t small_len = has_small_ring ? static_cast<std::size_t>(rng.range(3, 4)) : 0;
  const std::size_t tree_size = total - big_len - small_len;

  Builder b;
  b.g.num_fields = kDefaultVocabSizes.size();
  b.add_node(false, 0);
  for (std::size_t k = 1; k < tree_size; ++k) {
    const auto parent = pick_attachment(b, k, rng);
    b.connect(b.add_node(false, 0), parent);
  }
  std::vector<std::uint32_t> big;
  if (has_big_ring) big = add_ring(b, big_len, tree_size, rng);
  if (has_small_ring) add_ring(b, small_len, tree_size, rng);

  std::vector<int> atom(b.g.num_nodes);
  for (auto& a : atom) {
    const double u = rng.uniform01();
    a = u < 0.7 ? kCarbon : (u < 0.85 ? kNitrogen : kOxygen);
  }
  if (variant == Variant::kMarkedRing) {
    atom[big[rng.index(big.size())]] = rule.marked_code;
    if (rng.bernoulli(0.3)) atom[rng.index(tree_size)] = rule.marked_code;
  } else {
    atom[rng.index(tree_size)] = rule.marked_code;
  }

  MolGraph& g = b.g;
  g.node_feats.resize(g.num_nodes * g.num_fields);
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    int* row = g.node_feats.data() + i * g.num_fields;
    const int deg = b.degree[i];
    row[0] = atom[i];
    row[1] = 0;
    row[2] = std::min(deg, 11);
    row[3] = 5;
    row[4] = std::max(0, 4 - deg);
    row[5] = 0;
    row[6] = b.in_ring[i] ? 2 : rng.range(1, 3);
    row[7] = (b.ring_len[i] == 5 || b.ring_len[i] == 6) ? 1 : 0;
    row[8] = b.in_ring[i] ? 1 : 0;
  }
  g.label = positive ? 1 : 0;
  template_id = static_cast<std::int64_t>(variant) * 32 + static_cast<std::int64_t>(big_len) * 2 + (has_small_ring ? 1 : 0);
  return g;
}

}  // namespace

Dataset synth_motif_dataset(const SynthOptions& opt) {
  if (!(opt.noise_rate >= 0.0 && opt.noise_rate < 0.5)) {
    throw std::invalid_argument("noise_rate must lie in [0, 0.5)");
  }
  const auto& rule = opt.rule;
  if (rule.min_ring < 5 || rule.max_ring < rule.min_ring) throw std::invalid_argument("ring lengths must satisfy 5 <= min <= max");
  if (opt.min_nodes < rule.max_ring + 6 || opt.max_nodes < opt.min_nodes) {
    throw std::invalid_argument("nodes range must satisfy max_ring + 6 <= min_nodes <= max_nodes");
  }
  if (rule.marked_code < 0 || rule.marked_code >= kDefaultVocabSizes[0]) {
    throw std::invalid_argument("marked code outside the atom-type vocabulary");
  }

  Dataset ds;
  for (std::size_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(derive_seed(opt.seed, 0x5E17, attempt));
    std::vector<bool> positive(opt.n_graphs, false);
    for (std::size_t i = 0; i < opt.n_graphs / 2; ++i) positive[i] = true;
    rng.shuffle(positive);

    ds.graphs.clear();
    std::size_t ones = 0;
    for (std::size_t i = 0; i < opt.n_graphs; ++i) {
      std::int64_t template_id = 0;
      MolGraph g = make_graph(positive[i], opt, rng, template_id);
      if (rng.bernoulli(opt.noise_rate)) g.label = 1 - g.label;
      g.scaffold_id = template_id;
      ones += static_cast<std::size_t>(g.label);
      ds.graphs.push_back(std::move(g));
    }
    // Balance is only meaningful with a handful of graphs.
    if (opt.n_graphs < 10) return ds;
    const double rate = static_cast<double>(ones) / static_cast<double>(opt.n_graphs);
    if (rate >= 0.3 && rate <= 0.7) return ds;
  }
  throw std::runtime_error("synth_motif_dataset: class balance outside [0.3, 0.7] after " +
                           std::to_string(kMaxAttempts) + " attempts");
}

}  // namespace gabo::data
