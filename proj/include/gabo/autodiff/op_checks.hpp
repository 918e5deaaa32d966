#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gabo::ad {

struct OpCheckResult {
  std::string op;
  std::size_t instances = 0;
  double max_first_order_error = 0.0;
  double max_second_order_error = 0.0;
};

/// For every differentiable op, draws `instances` random inputs and compares
/// reverse-mode first derivatives and reverse-over-reverse Hessian-vector
/// products against central differences.
std::vector<OpCheckResult> check_all_ops(std::size_t instances, std::uint64_t seed, double step = 1e-5);

}  // namespace gabo::ad
