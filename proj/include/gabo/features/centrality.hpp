#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "gabo/data/graph.hpp"

// Per-node structural statistics over unweighted undirected graphs. These are
// the "classic" inputs available to the augmentation generator.
namespace gabo::features {

inline constexpr std::size_t kClassicWidth = 4;

std::vector<double> degree(const data::MolGraph& g);

struct PageRankOptions {
  double damping = 0.85;
  double tol = 1e-10;
  std::size_t max_iter = 1000;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Power iteration on the random-walk matrix with uniform teleport. Mass at
/// isolated nodes is spread uniformly. Stops once the L1 change drops below
/// `tol`.
std::vector<double> pagerank(const data::MolGraph& g, const PageRankOptions& options = {});

/// Brandes accumulation over unweighted shortest paths, scaled by
/// 2 / ((n-1)(n-2)) so values lie in [0, 1]; all zeros when n < 3.
std::vector<double> betweenness(const data::MolGraph& g);

/// Wasserman-Faust closeness: (r / (n-1)) * (r / sum of distances to the r
/// reachable nodes); 0 for nodes that reach nothing.
std::vector<double> closeness(const data::MolGraph& g);

/// Row-major num_nodes x 4: [betweenness, closeness, degree, pagerank].
std::vector<double> classic_features(const data::MolGraph& g);

std::vector<std::vector<double>> classic_features(std::span<const data::MolGraph> graphs);

/// Per-column z-scores over every node of `cache` (zero-variance columns are
/// only centred). Applied in place.
void standardize(std::vector<std::vector<double>>& cache);

}  // namespace gabo::features
