#include "gabo/augment/augmenter.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gabo/features/centrality.hpp"

namespace gabo::augment {

using namespace gabo::ad;

std::string_view to_string(GenerationType t) {
  switch (t) {
    case GenerationType::noise: return "noise";
    case GenerationType::classic: return "classic";
    case GenerationType::gin: return "gin";
  }
  return "?";
}

std::string_view to_string(TransformType t) {
  switch (t) {
    case TransformType::bias: return "bias";
    case TransformType::elementwise: return "elementwise";
    case TransformType::shifted: return "shifted";
  }
  return "?";
}

GenerationType parse_generation(std::string_view s) {
  if (s == "noise") return GenerationType::noise;
  if (s == "classic") return GenerationType::classic;
  if (s == "gin") return GenerationType::gin;
  throw std::invalid_argument("unknown generation type '" + std::string(s) + "' (noise, classic, gin)");
}

TransformType parse_transform(std::string_view s) {
  if (s == "bias") return TransformType::bias;
  if (s == "elementwise") return TransformType::elementwise;
  if (s == "shifted") return TransformType::shifted;
  throw std::invalid_argument("unknown transform type '" + std::string(s) + "' (bias, elementwise, shifted)");
}

Tensor uniform_noise(std::size_t rows, std::size_t cols, Rng& rng) {
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor::matrix(rows, cols, std::move(v));
}

Tensor build_generator_input_noise(std::size_t num_nodes, std::size_t latent_dim, Rng& rng) {
  if (latent_dim == 0) throw std::invalid_argument("latent_dim must be at least 1");
  return uniform_noise(num_nodes, latent_dim, rng);
}

Tensor apply_transform(const Tensor& h, const Phi& phi, TransformType type) {
  switch (type) {
    case TransformType::bias:
      return add(h, phi.first);
    case TransformType::elementwise:
      return add(mul(phi.first, h), phi.second);
    case TransformType::shifted:
      return add(add(h, mul(phi.first, h)), phi.second);
  }
  throw std::logic_error("apply_transform: bad transform type");
}

Tensor baseline_noise_augment(const Tensor& h, Rng& rng) {
  return add(h, uniform_noise(h.rows(), h.cols(), rng));
}

Augmenter::Augmenter(AugmenterConfig config) : config_(config) {
  if (config_.latent_dim == 0) throw std::invalid_argument("Augmenter: latent_dim must be at least 1");
  if (config_.dim == 0 || config_.hidden == 0) throw std::invalid_argument("Augmenter: widths must be positive");
  gen_offset_ = config_.generation == GenerationType::gin ? 4 : 0;
}

std::size_t Augmenter::input_dim() const {
  switch (config_.generation) {
    case GenerationType::noise: return config_.latent_dim;
    case GenerationType::classic: return config_.latent_dim + features::kClassicWidth;
    case GenerationType::gin: return config_.latent_dim + config_.dim;
  }
  return 0;
}

std::size_t Augmenter::output_dim() const {
  return config_.transform == TransformType::bias ? config_.dim : 2 * config_.dim;
}

ParamSet Augmenter::init(Rng& rng) const {
  const auto d = config_.dim;
  ParamSet p;
  if (config_.generation == GenerationType::gin) {
    p.add("gin.w1", models::uniform_weight(rng, d, 2 * d));
    p.add("gin.b1", models::uniform_bias(rng, d, 2 * d));
    p.add("gin.w2", models::uniform_weight(rng, 2 * d, d));
    p.add("gin.b2", models::uniform_bias(rng, 2 * d, d));
  }
  p.add("gen.w1", models::uniform_weight(rng, input_dim(), config_.hidden));
  p.add("gen.b1", models::uniform_bias(rng, input_dim(), config_.hidden));
  p.add("gen.w2", models::uniform_weight(rng, config_.hidden, output_dim()));
  p.add("gen.b2", models::uniform_bias(rng, config_.hidden, output_dim()));
  return p;
}

ParamSet Augmenter::identity(Rng& rng) const {
  ParamSet p = init(rng);
  const auto out = output_dim();
  p.tensors[gen_offset_ + 2] = Tensor::zeros({config_.hidden, out});
  std::vector<double> bias(out, 0.0);
  if (config_.transform == TransformType::elementwise) std::fill(bias.begin(), bias.begin() + config_.dim, 1.0);
  p.tensors[gen_offset_ + 3] = Tensor::vector(std::move(bias));
  return p;
}

Tensor Augmenter::sample_latent(std::size_t num_nodes, Rng& rng) const {
  return build_generator_input_noise(num_nodes, config_.latent_dim, rng);
}

Tensor Augmenter::build_input(std::span<const Tensor> theta, const data::GraphBatch& batch, const Tensor& latent,
                              const Tensor& atom_h) const {
  if (latent.rank() != 2 || latent.rows() != batch.num_nodes || latent.cols() != config_.latent_dim) {
    throw ShapeError("build_input: latent of shape " + shape_str(latent.shape()) + " for " +
                     std::to_string(batch.num_nodes) + " nodes and latent_dim " + std::to_string(config_.latent_dim));
  }
  switch (config_.generation) {
    case GenerationType::noise:
      return latent;
    case GenerationType::classic: {
      if (!batch.classic) throw std::invalid_argument("build_input: classic generation needs cached classic features");
      Tensor feats = Tensor::matrix(batch.num_nodes, features::kClassicWidth, *batch.classic);
      const Tensor parts[] = {latent, feats};
      return concat_cols(parts);
    }
    case GenerationType::gin: {
      if (!atom_h.defined() || atom_h.rank() != 2 || atom_h.rows() != batch.num_nodes || atom_h.cols() != config_.dim) {
        throw ShapeError("build_input: gin generation needs atom embeddings of shape [" +
                         std::to_string(batch.num_nodes) + ", " + std::to_string(config_.dim) + "]");
      }
      const auto* w = theta.data();
      Tensor g = models::gin_layer(atom_h, batch.edge_src, batch.edge_dst, Tensor(), 0.0,
                                   [w](const Tensor& x) { return models::mlp2(x, w[0], w[1], w[2], w[3]); });
      const Tensor parts[] = {latent, g};
      return concat_cols(parts);
    }
  }
  throw std::logic_error("build_input: bad generation type");
}

Phi Augmenter::generate_phi(std::span<const Tensor> theta, const Tensor& inputs) const {
  if (theta.size() != gen_offset_ + 4) {
    throw std::invalid_argument("generate_phi: expected " + std::to_string(gen_offset_ + 4) +
                                " augmenter tensors, got " + std::to_string(theta.size()));
  }
  if (inputs.rank() != 2 || inputs.cols() != input_dim()) {
    throw ShapeError("generate_phi: input of shape " + shape_str(inputs.shape()) + " but the generator expects " +
                     std::to_string(input_dim()) + " columns");
  }
  const auto* w = theta.data() + gen_offset_;
  Tensor out = models::mlp2(inputs, w[0], w[1], w[2], w[3]);
  if (config_.transform == TransformType::bias) return {out, Tensor()};
  return {slice_cols(out, 0, config_.dim), slice_cols(out, config_.dim, config_.dim)};
}

Tensor Augmenter::augment(std::span<const Tensor> theta, const data::GraphBatch& batch, const Tensor& latent,
                          const Tensor& h, Phi* phi_out) const {
  Phi phi = generate_phi(theta, build_input(theta, batch, latent, h));
  Tensor out = apply_transform(h, phi, config_.transform);
  if (phi_out) *phi_out = phi;
  return out;
}

double phi_row_norm_mean(const Phi& phi) {
  const auto rows = phi.first.rows();
  if (rows == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    double sq = 0.0;
    for (const Tensor* part : {&phi.first, &phi.second}) {
      if (!part->defined()) continue;
      const auto c = part->cols();
      for (std::size_t j = 0; j < c; ++j) sq += part->at(i, j) * part->at(i, j);
    }
    total += std::sqrt(sq);
  }
  return total / static_cast<double>(rows);
}

}  // namespace gabo::augment
