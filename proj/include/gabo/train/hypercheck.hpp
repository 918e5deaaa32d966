#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gabo/train/bilevel.hpp"

namespace gabo::train {

struct HypergradCheck {
  std::string name;
  std::size_t window = 0;
  double error = 0.0;      // relative error against finite differences
  double tolerance = 0.0;  // the bound it is held to
  std::size_t skipped = 0;  // instances rejected as non-smooth or degenerate
  bool passed() const { return error <= tolerance; }
};

/// Records `losses.size()` inner steps from (omega0, v0), runs outer_step
/// without the theta penalty, and returns the hypergradient.
std::vector<Tensor> window_hypergradient(std::span<const Tensor> omega0, std::span<const Tensor> v0,
                                         std::span<const Tensor> theta, std::span<const InnerLossFn> losses,
                                         std::span<const ad::SgdHyper> hypers, const OuterLossFn& outer_loss);

/// Central differences of replay_outer_loss over every theta entry.
std::vector<Tensor> replay_fd_hypergradient(std::span<const Tensor> omega0, std::span<const Tensor> v0,
                                            std::span<const Tensor> theta, std::span<const InnerLossFn> losses,
                                            std::span<const ad::SgdHyper> hypers, const OuterLossFn& outer_loss,
                                            double step = 1e-5);

/// ||a - b|| / max(||b||, 1e-12) over the concatenated entries.
double relative_norm_error(std::span<const Tensor> a, std::span<const Tensor> b);

/// Toy: L_tr = (w - t)^2, L_pval = w^2, one GD step (lr 0.1) from w = 1, t = 0.
double quadratic_toy_hypergradient();
double quadratic_toy_fd(double eps = 1e-6);

HypergradCheck check_logistic(std::size_t window, std::uint64_t seed);
/// Two synthetic graphs, d = 4, gin generator with bias transform.
/// Instances with a relu boundary inside the finite-difference probe width or
/// a zero hypergradient are skipped; `skipped` counts them.
HypergradCheck check_gnn(std::size_t window, std::uint64_t seed);

/// Quadratic toy (analytic and FD) plus logistic and GNN instances for
/// j in {1, 2, 4}.
std::vector<HypergradCheck> hypergradient_suite(std::uint64_t seed);

}  // namespace gabo::train
