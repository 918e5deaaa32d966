#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gabo/data/graph.hpp"

namespace gabo::data {

/// Fractions for (train, pseudo-validation, validation, test).
using SplitFractions = std::array<double, 4>;

inline constexpr SplitFractions kDefaultFractions{0.72, 0.08, 0.10, 0.10};

struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> pseudo_val;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
  /// Non-fatal observations, e.g. a split left empty by scaffold grouping.
  std::vector<std::string> warnings;

  std::array<const std::vector<std::size_t>*, 4> parts() const { return {&train, &pseudo_val, &val, &test}; }
  std::array<std::vector<std::size_t>*, 4> parts() { return {&train, &pseudo_val, &val, &test}; }
};

inline constexpr std::array<const char*, 4> kSplitNames{"train", "pseudo_val", "val", "test"};

/// Largest-remainder apportionment of `n` items to the four fractions.
std::array<std::size_t, 4> apportion(std::size_t n, const SplitFractions& fractions);

/// Uniform shuffle of all graphs, then contiguous slices of apportioned sizes.
DatasetSplit split_random(std::size_t num_graphs, const SplitFractions& fractions, std::uint64_t seed);

/// Whole scaffold groups, largest first (ties in seeded random order), each to
/// the split with the largest absolute shortfall against its target size.
DatasetSplit split_scaffold(std::span<const MolGraph> graphs, const SplitFractions& fractions, std::uint64_t seed);

}  // namespace gabo::data
