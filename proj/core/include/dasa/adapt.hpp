#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dasa/autoencoder.hpp"
#include "dasa/sae_dnn.hpp"
#include "dasa/saliency.hpp"

namespace dasa {

enum class SaliencyStatistic { batch_mean, per_sample };

struct AdaptConfig {
  double tau = 0.1;  // transfer coefficient in [0,1]
  SaliencyStatistic statistic = SaliencyStatistic::batch_mean;
  double learning_rate = 0.3;
  std::size_t epochs = 50;
  std::size_t batch_size = 100;
  double beta = 0.1;  // sparsity penalty stays active during adaptation
  double rho = 0.04;
  std::uint64_t seed = 0;

  void validate() const;
  AeHyperparams as_hyperparams(std::uint64_t stage_seed) const;
};

// Decode with hidden activations elementwise gated by the saliency mask.
// An all-ones mask reproduces plain decode exactly.
Vector masked_decode(const AutoencoderParams& ae, const Vector& y, const SaliencyMask& s);

struct AdaptRecord {
  std::size_t epoch = 0;
  int layer = 1;
  double cost = 0.0;
  double gate_fraction = 1.0;
};
using AdaptTrace = std::vector<AdaptRecord>;

// Stage-one adaptation of one layer: mini-batch SGD on the autoencoding cost
// with the decoder gated by a saliency mask recomputed fresh for every
// mini-batch from that batch's activations. Gradients update every weight;
// the mask is a constant within a step. tau = 0 reproduces train_ae bit for
// bit under a shared seed.
AutoencoderParams adapt_layer(AutoencoderParams ae, std::span<const Vector> target_inputs,
                              const AdaptConfig& cfg, int layer_index = 1,
                              AdaptTrace* trace = nullptr);

// Adapts layer1 on raw target patches, then layer2 on the adapted layer1's
// encodings. The target layer and all dimensions are untouched.
SaeDnnModel adapt_model(SaeDnnModel m, std::span<const Vector> target_patches,
                        const AdaptConfig& cfg, AdaptTrace* trace = nullptr);

// The full two-stage pipeline: unsupervised weight adaptation with systematic
// dropout, then supervised fine-tuning on the limited labeled target set.
SaeDnnModel dasa(const SaeDnnModel& source_model, std::span<const Vector> target_unlabeled,
                 const LabeledBatch& target_labeled, const AdaptConfig& adapt_cfg,
                 const FinetuneConfig& finetune_cfg, AdaptTrace* adapt_trace = nullptr,
                 TrainTrace* finetune_trace = nullptr);

}  // namespace dasa
