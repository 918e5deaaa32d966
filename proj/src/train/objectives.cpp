#include "gabo/train/objectives.hpp"

#include <memory>

#include "gabo/autodiff/ops.hpp"

namespace gabo::train {

using models::bce_loss;

OuterLossFn plain_loss(const models::Classifier& model, data::GraphBatch batch) {
  auto b = std::make_shared<const data::GraphBatch>(std::move(batch));
  return [&model, b](std::span<const Tensor> omega) { return bce_loss(model.forward(omega, *b), b->labels); };
}

InnerLossFn plain_inner_loss(const models::Classifier& model, data::GraphBatch batch) {
  auto f = plain_loss(model, std::move(batch));
  return [f](std::span<const Tensor> omega, std::span<const Tensor>) { return f(omega); };
}

InnerLossFn augmented_loss(const models::Classifier& model, const augment::Augmenter& augmenter,
                           data::GraphBatch batch, Tensor latent, augment::Phi* phi_out) {
  auto b = std::make_shared<const data::GraphBatch>(std::move(batch));
  return [&model, &augmenter, b, latent, phi_out](std::span<const Tensor> omega, std::span<const Tensor> theta) {
    auto logits = model.forward(omega, *b, [&](const Tensor& h) {
      return augmenter.augment(theta, *b, latent, h, phi_out);
    });
    return bce_loss(logits, b->labels);
  };
}

InnerLossFn noisy_loss(const models::Classifier& model, data::GraphBatch batch, Tensor noise) {
  auto b = std::make_shared<const data::GraphBatch>(std::move(batch));
  return [&model, b, noise](std::span<const Tensor> omega, std::span<const Tensor>) {
    auto logits = model.forward(omega, *b, [&](const Tensor& h) { return ad::add(h, noise); });
    return bce_loss(logits, b->labels);
  };
}

PerturbedLossFn perturbed_loss(const models::Classifier& model, data::GraphBatch batch) {
  auto b = std::make_shared<const data::GraphBatch>(std::move(batch));
  return [&model, b](std::span<const Tensor> omega, const Tensor& delta) {
    auto logits = model.forward(omega, *b, [&](const Tensor& h) { return ad::add(h, delta); });
    return bce_loss(logits, b->labels);
  };
}

}  // namespace gabo::train
