#include "gabo/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "gabo/common/random.hpp"

namespace gabo::data {

namespace {

void check_fractions(const SplitFractions& f) {
  double total = 0.0;
  for (double x : f) {
    if (!(x > 0.0)) throw std::invalid_argument("split fractions must be positive");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions sum to " + std::to_string(total) + ", expected 1");
  }
}

}  // namespace

std::array<std::size_t, 4> apportion(std::size_t n, const SplitFractions& fractions) {
  std::array<std::size_t, 4> sizes{};
  std::array<double, 4> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double exact = fractions[i] * static_cast<double>(n);
    sizes[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainder[i] = exact - static_cast<double>(sizes[i]);
    assigned += sizes[i];
  }
  std::array<std::size_t, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < n; k = (k + 1) % 4, ++assigned) ++sizes[order[k]];
  return sizes;
}

DatasetSplit split_random(std::size_t num_graphs, const SplitFractions& fractions, std::uint64_t seed) {
  check_fractions(fractions);
  if (num_graphs < 4) throw std::invalid_argument("split_random needs at least 4 graphs, got " + std::to_string(num_graphs));
  std::vector<std::size_t> order(num_graphs);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0x5311));
  rng.shuffle(order);
  const auto sizes = apportion(num_graphs, fractions);
  DatasetSplit split;
  auto parts = split.parts();
  std::size_t pos = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    parts[i]->assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                     order.begin() + static_cast<std::ptrdiff_t>(pos + sizes[i]));
    pos += sizes[i];
  }
  return split;
}

DatasetSplit split_scaffold(std::span<const MolGraph> graphs, const SplitFractions& fractions, std::uint64_t seed) {
  check_fractions(fractions);
  std::vector<std::size_t> missing;
  std::map<std::int64_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    if (!graphs[i].scaffold_id) {
      missing.push_back(i);
    } else {
      groups[*graphs[i].scaffold_id].push_back(i);
    }
  }
  if (!missing.empty()) {
    std::string msg = "scaffold split: graphs without scaffold id:";
    for (std::size_t k = 0; k < missing.size() && k < 20; ++k) msg += " " + std::to_string(missing[k]);
    if (missing.size() > 20) msg += " ... (" + std::to_string(missing.size()) + " total)";
    throw std::invalid_argument(msg);
  }

  std::vector<std::vector<std::size_t>> ordered;
  ordered.reserve(groups.size());
  for (auto& [_, members] : groups) ordered.push_back(std::move(members));
  Rng rng(derive_seed(seed, 0x5CAF));
  rng.shuffle(ordered);
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });

  const double n = static_cast<double>(graphs.size());
  DatasetSplit split;
  auto parts = split.parts();
  for (const auto& members : ordered) {
    std::size_t best = 0;
    double best_shortfall = -1e300;
    for (std::size_t i = 0; i < 4; ++i) {
      const double shortfall = fractions[i] * n - static_cast<double>(parts[i]->size());
      if (shortfall > best_shortfall) {
        best_shortfall = shortfall;
        best = i;
      }
    }
    parts[best]->insert(parts[best]->end(), members.begin(), members.end());
  }
  for (std::size_t i = 0; i < 4; ++i) {
    if (parts[i]->empty()) split.warnings.push_back(std::string(kSplitNames[i]) + " split is empty");
  }
  return split;
}

}  // namespace gabo::data
