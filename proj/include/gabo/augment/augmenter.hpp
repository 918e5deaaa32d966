#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "gabo/data/batch.hpp"
#include "gabo/models/classifier.hpp"

namespace gabo::augment {

using ad::Tensor;
using models::ParamSet;

enum class GenerationType { noise, classic, gin };
enum class TransformType { bias, elementwise, shifted };

std::string_view to_string(GenerationType t);
std::string_view to_string(TransformType t);
GenerationType parse_generation(std::string_view s);
TransformType parse_transform(std::string_view s);

struct AugmenterConfig {
  GenerationType generation = GenerationType::gin;
  TransformType transform = TransformType::bias;
  std::size_t dim = 256;  // classifier embedding width
  std::size_t latent_dim = 10;
  std::size_t hidden = 128;
};

/// U[-1, 1] matrix, filled row by row.
Tensor uniform_noise(std::size_t rows, std::size_t cols, Rng& rng);

/// Per-node transform parameters. `second` is set for the multiplicative
/// transforms.
struct Phi {
  Tensor first;
  Tensor second;
};

Tensor apply_transform(const Tensor& h, const Phi& phi, TransformType type);

/// h + U[-1, 1] noise, fresh per node and coordinate.
Tensor baseline_noise_augment(const Tensor& h, Rng& rng);

/// Generator: an MLP input -> hidden -> relu -> d (bias) or 2d, preceded in
/// gin mode by one GIN layer over the classifier's atom embeddings.
///
/// Parameter layout: gin mode starts with {gin.w1, gin.b1, gin.w2, gin.b2};
/// then gen.w1, gen.b1, gen.w2, gen.b2.
class Augmenter {
 public:
  explicit Augmenter(AugmenterConfig config);

  const AugmenterConfig& config() const { return config_; }
  std::size_t input_dim() const;
  std::size_t output_dim() const;

  ParamSet init(Rng& rng) const;
  /// Parameters whose generator output is the identity transform for every
  /// input: last layer zeroed, bias set to 0 (bias, shifted) or [1, 0]
  /// (elementwise).
  ParamSet identity(Rng& rng) const;

  /// Noise in [-1, 1] of width latent_dim, one row per node.
  Tensor sample_latent(std::size_t num_nodes, Rng& rng) const;

  /// Concatenates the latent rows with the mode's node features. `atom_h`
  /// (gin mode) is the classifier atom embeddings; gradients pass through.
  Tensor build_input(std::span<const Tensor> theta, const data::GraphBatch& batch, const Tensor& latent,
                     const Tensor& atom_h) const;

  Phi generate_phi(std::span<const Tensor> theta, const Tensor& inputs) const;

  /// build_input + generate_phi + apply_transform on h.
  Tensor augment(std::span<const Tensor> theta, const data::GraphBatch& batch, const Tensor& latent, const Tensor& h,
                 Phi* phi_out = nullptr) const;

 private:
  AugmenterConfig config_;
  std::size_t gen_offset_;
};

/// Noise-mode construction: z ~ U[-1, 1]^latent per node.
Tensor build_generator_input_noise(std::size_t num_nodes, std::size_t latent_dim, Rng& rng);

/// Mean over rows of the row L2 norm of phi (both halves together).
double phi_row_norm_mean(const Phi& phi);

}  // namespace gabo::augment
