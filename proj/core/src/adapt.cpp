#include "dasa/adapt.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dasa {

void AdaptConfig::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("AdaptConfig: tau must lie in [0,1], got " +
                                std::to_string(tau));
  }
  as_hyperparams(seed).validate();
}

AeHyperparams AdaptConfig::as_hyperparams(std::uint64_t stage_seed) const {
  AeHyperparams hp;
  hp.beta = beta;
  hp.rho = rho;
  hp.learning_rate = learning_rate;
  hp.epochs = epochs;
  hp.batch_size = batch_size;
  hp.seed = stage_seed;
  return hp;
}

Vector masked_decode(const AutoencoderParams& ae, const Vector& y, const SaliencyMask& s) {
  check_dim("masked_decode mask length vs activation length", s.size(), y.size());
  Vector gated(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) {
    gated[j] = y[j] * static_cast<double>(s.gates[j]);
  }
  return decode(ae, gated);
}

AutoencoderParams adapt_layer(AutoencoderParams ae, std::span<const Vector> target_inputs,
                              const AdaptConfig& cfg, int layer_index, AdaptTrace* trace) {
  cfg.validate();
  if (target_inputs.empty()) {
    throw std::invalid_argument("adapt_layer: empty target dataset");
  }

  const double tau = cfg.tau;
  MaskFn mask_fn;
  if (cfg.statistic == SaliencyStatistic::batch_mean) {
    mask_fn = [tau, layer_index](const Matrix& activations) {
      const SaliencyMask m = saliency_mask(activations, tau, layer_index);
      BatchGates g;
      g.gates = Matrix(1, m.size());
      for (std::size_t j = 0; j < m.size(); ++j) {
        g.gates(0, j) = static_cast<double>(m.gates[j]);
      }
      return std::optional<BatchGates>(std::move(g));
    };
  } else {
    mask_fn = [tau](const Matrix& activations) {
      BatchGates g;
      g.gates = saliency_gates_per_sample(activations, tau);
      return std::optional<BatchGates>(std::move(g));
    };
  }

  TrainTrace inner;
  ae = train_ae(std::move(ae), target_inputs, cfg.as_hyperparams(cfg.seed),
                trace != nullptr ? &inner : nullptr, mask_fn);
  if (trace != nullptr) {
    for (const EpochRecord& r : inner) {
      trace->push_back({r.epoch, layer_index, r.cost, r.gate_fraction});
    }
  }
  return ae;
}

SaeDnnModel adapt_model(SaeDnnModel m, std::span<const Vector> target_patches,
                        const AdaptConfig& cfg, AdaptTrace* trace) {
  m.validate();
  cfg.validate();
  if (target_patches.empty()) {
    throw std::invalid_argument("adapt_model: empty target dataset");
  }

  AdaptConfig cfg1 = cfg;
  cfg1.seed = derive_seed(cfg.seed, SeedTag::adapt_layer1);
  m.layer1 = adapt_layer(std::move(m.layer1), target_patches, cfg1, 1, trace);

  // layer2 adapts on encodings through the adapted layer1
  std::vector<Vector> encoded;
  encoded.reserve(target_patches.size());
  const std::size_t chunk = 512;
  const std::size_t input_dim = m.layer1.input_dim();
  for (std::size_t start = 0; start < target_patches.size(); start += chunk) {
    const std::size_t end = std::min(target_patches.size(), start + chunk);
    Matrix x(end - start, input_dim);
    for (std::size_t i = start; i < end; ++i) {
      check_dim("adapt_model patch length", target_patches[i].size(), input_dim);
      double* dst = x.row(i - start);
      for (std::size_t k = 0; k < input_dim; ++k) {
        dst[k] = target_patches[i][k];
      }
    }
    const Matrix y = encode_batch(m.layer1, x);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      encoded.push_back(y.row_vector(r));
    }
  }

  AdaptConfig cfg2 = cfg;
  cfg2.seed = derive_seed(cfg.seed, SeedTag::adapt_layer2);
  m.layer2 = adapt_layer(std::move(m.layer2), encoded, cfg2, 2, trace);
  return m;
}

SaeDnnModel dasa(const SaeDnnModel& source_model, std::span<const Vector> target_unlabeled,
                 const LabeledBatch& target_labeled, const AdaptConfig& adapt_cfg,
                 const FinetuneConfig& finetune_cfg, AdaptTrace* adapt_trace,
                 TrainTrace* finetune_trace) {
  SaeDnnModel m = adapt_model(source_model, target_unlabeled, adapt_cfg, adapt_trace);
  return finetune(std::move(m), target_labeled, finetune_cfg, finetune_trace);
}

}  // namespace dasa
