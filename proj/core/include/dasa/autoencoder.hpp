#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dasa/matrix.hpp"
#include "dasa/rng.hpp"
#include "dasa/saliency.hpp"

namespace dasa {

struct AeHyperparams {
  double beta = 0.1;            // sparsity penalty weight
  double rho = 0.04;            // imposed sparsity, strictly in (0,1)
  double learning_rate = 0.3;   // >= 0; zero gives a no-op update
  std::size_t epochs = 50;
  std::size_t batch_size = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

// One autoencoder's weight set: encoder w (J x K) with bias b (J), decoder
// w_dec (K x J) with bias b_dec (K). Weights are untied.
struct AutoencoderParams {
  Matrix w;
  Vector b;
  Matrix w_dec;
  Vector b_dec;

  std::size_t hidden_dim() const { return w.rows(); }
  std::size_t input_dim() const { return w.cols(); }

  void validate() const;

  bool operator==(const AutoencoderParams&) const = default;
};

struct AeGradients {
  Matrix w;
  Vector b;
  Matrix w_dec;
  Vector b_dec;
};

double sigmoid(double z);

Vector encode(const AutoencoderParams& ae, const Vector& p);
Vector decode(const AutoencoderParams& ae, const Vector& y);

// Batch variants; one sample per row.
Matrix encode_batch(const AutoencoderParams& ae, const Matrix& x);
Matrix decode_batch(const AutoencoderParams& ae, const Matrix& y);

// Unsupervised cost over a mini-batch: mean squared reconstruction error plus
// beta * sum_j |rho - rho_hat_j|, with rho_hat_j the mean activation of hidden
// node j over the batch. When a mask is given the decoder sees y elementwise
// gated by it; the sparsity term always sees the ungated activations.
double ae_cost(const AutoencoderParams& ae, std::span<const Vector> batch,
               const AeHyperparams& hp, const SaliencyMask* mask = nullptr);

// Gradients of ae_cost with respect to every parameter. The mask is treated
// as a constant of the objective, so gated-off nodes still receive gradient
// through the sparsity term and the encoder path, and every weight entry gets
// a gradient.
AeGradients ae_gradients(const AutoencoderParams& ae, std::span<const Vector> batch,
                         const AeHyperparams& hp, const SaliencyMask* mask = nullptr);

// Uniform weights in [-r, r] with r = sqrt(6 / (input_dim + hidden_dim)),
// zero biases. Deterministic per seed.
AutoencoderParams init_params(std::size_t input_dim, std::size_t hidden_dim,
                              std::uint64_t seed);

struct EpochRecord {
  std::size_t epoch = 0;
  double cost = 0.0;           // mean of mini-batch costs in the epoch
  double gate_fraction = 1.0;  // mean fraction of gates on; 1 when unmasked
};
using TrainTrace = std::vector<EpochRecord>;

// Per-batch gates: either one broadcast row (1 x J) or one row per sample
// (N x J). Produced fresh for every mini-batch from its activations.
struct BatchGates {
  Matrix gates;

  double on_fraction() const;
};
using MaskFn = std::function<std::optional<BatchGates>(const Matrix& activations)>;

// Mini-batch SGD on ae_cost. Shuffles each epoch with an RNG seeded from
// hp.seed, so a fixed seed gives bit-identical results. Aborts with a
// diagnostic naming epoch and batch index if the cost turns non-finite.
AutoencoderParams train_ae(AutoencoderParams ae, std::span<const Vector> data,
                           const AeHyperparams& hp, TrainTrace* trace = nullptr,
                           const MaskFn& mask_fn = nullptr);

namespace detail {

// Shared masked cost/gradient core on a gathered batch matrix. `gates` may be
// null (treated as all-ones), 1 x J, or N x J.
struct CostAndGrads {
  double cost = 0.0;
  AeGradients grads;
  double gate_fraction = 1.0;
};

CostAndGrads masked_cost_and_gradients(const AutoencoderParams& ae, const Matrix& x,
                                       const AeHyperparams& hp, const Matrix* gates,
                                       bool want_gradients);

// Same, with the batch's hidden activations already computed.
CostAndGrads cost_and_gradients_given_activations(const AutoencoderParams& ae,
                                                  const Matrix& x, const Matrix& y,
                                                  const AeHyperparams& hp,
                                                  const Matrix* gates,
                                                  bool want_gradients);

Matrix init_uniform(std::size_t rows, std::size_t cols, double half_range, Rng& rng);

}  // namespace detail

}  // namespace dasa
