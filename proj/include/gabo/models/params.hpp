#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gabo/autodiff/tensor.hpp"
#include "gabo/common/random.hpp"

namespace gabo::models {

using ad::Tensor;

/// Named, ordered parameter tensors. Models address entries by position, so
/// the order is part of each model's layout.
struct ParamSet {
  std::vector<std::string> names;
  std::vector<Tensor> tensors;

  std::size_t size() const { return tensors.size(); }
  void add(std::string name, Tensor value);
  std::size_t index_of(const std::string& name) const;
  const Tensor& get(const std::string& name) const { return tensors[index_of(name)]; }
  std::size_t num_scalars() const;
};

/// PyTorch-style default initialisation for a [fan_in, fan_out] weight and its
/// bias: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Tensor uniform_weight(Rng& rng, std::size_t fan_in, std::size_t fan_out);
Tensor uniform_bias(Rng& rng, std::size_t fan_in, std::size_t fan_out);
/// Xavier-uniform table for embedding lookups.
Tensor xavier_table(Rng& rng, std::size_t rows, std::size_t cols);

/// x W + b for x [n, in], W [in, out], b [out].
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

/// Checkpoint: `<stem>.bin` holds every tensor's doubles back to back
/// (little-endian), `<stem>.json` lists {name, shape, offset} per tensor with
/// offsets counted in doubles.
void save_checkpoint(const std::filesystem::path& stem, const ParamSet& params);
ParamSet load_checkpoint(const std::filesystem::path& stem);

}  // namespace gabo::models
