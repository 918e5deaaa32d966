#pragma once

#include "gabo/augment/augmenter.hpp"
#include "gabo/models/classifier.hpp"
#include "gabo/train/bilevel.hpp"
#include "gabo/train/flag.hpp"

// Loss closures over one batch. Each closure keeps its own copy of the batch
// and references the model objects, which must outlive it.
namespace gabo::train {

/// Un-augmented BCE; ignores theta.
OuterLossFn plain_loss(const models::Classifier& model, data::GraphBatch batch);
InnerLossFn plain_inner_loss(const models::Classifier& model, data::GraphBatch batch);

/// BCE on embeddings transformed by the generator's phi for fixed latent
/// noise. `phi_out`, when given, receives the phi of the latest evaluation.
InnerLossFn augmented_loss(const models::Classifier& model, const augment::Augmenter& augmenter,
                           data::GraphBatch batch, Tensor latent, augment::Phi* phi_out = nullptr);

/// BCE on embeddings plus a fixed additive noise matrix.
InnerLossFn noisy_loss(const models::Classifier& model, data::GraphBatch batch, Tensor noise);

/// BCE with delta added to the atom embeddings.
PerturbedLossFn perturbed_loss(const models::Classifier& model, data::GraphBatch batch);

}  // namespace gabo::train
