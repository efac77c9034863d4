#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dasa/autoencoder.hpp"
#include "dasa/matrix.hpp"

namespace dasa {

inline constexpr double kProbFloor = 1e-7;

inline double clip_prob(double p) {
  if (p < kProbFloor) {
    return kProbFloor;
  }
  if (p > 1.0 - kProbFloor) {
    return 1.0 - kProbFloor;
  }
  return p;
}

// The prose calls the target layer a softmax regression layer while the
// network equation applies the sigmoid to it; both are supported and softmax
// is the default.
enum class OutputMode { softmax, sigmoid_as_written };

enum class LossKind { squared_error, cross_entropy };

inline constexpr int kBackgroundClass = 0;
inline constexpr int kVesselClass = 1;

// Two stacked encoder layers plus a target (classification) layer. The AE
// decoders ride along; supervised training never touches them but the
// unsupervised adaptation stage does.
struct SaeDnnModel {
  AutoencoderParams layer1;
  AutoencoderParams layer2;
  Matrix target_w;  // n_classes x hidden2
  Vector target_b;  // n_classes
  OutputMode output_mode = OutputMode::softmax;

  std::size_t input_dim() const { return layer1.input_dim(); }
  std::size_t hidden1_dim() const { return layer1.hidden_dim(); }
  std::size_t hidden2_dim() const { return layer2.hidden_dim(); }
  std::size_t n_classes() const { return target_w.rows(); }

  void validate() const;

  bool operator==(const SaeDnnModel&) const = default;
};

struct LabeledBatch {
  std::span<const Vector> patches;
  std::span<const int> labels;  // 0 = background, 1 = vessel

  void validate(std::size_t n_classes) const;
};

struct PretrainConfig {
  std::size_t hidden1 = 400;
  std::size_t hidden2 = 100;
  AeHyperparams ae;  // shared by both layers; ae.seed is the master seed
};

struct PretrainResult {
  AutoencoderParams layer1;
  AutoencoderParams layer2;
  TrainTrace trace1;
  TrainTrace trace2;
};

struct FinetuneConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 200;
  std::size_t batch_size = 100;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::squared_error;

  void validate() const;
};

// Class score vector t for one patch (length n_classes). Softmax rows sum to
// one; sigmoid_as_written scores are independently in (0,1).
Vector forward(const SaeDnnModel& m, const Vector& p);
Matrix forward_batch(const SaeDnnModel& m, const Matrix& x);

// Mean over the batch of the squared distance between t and the one-hot
// target (default), or categorical cross-entropy.
double supervised_cost(const SaeDnnModel& m, const LabeledBatch& batch,
                       LossKind loss = LossKind::squared_error);

// Greedy layer-wise pretraining: layer1 on raw patches, layer2 on layer1's
// encodings of the same data.
PretrainResult pretrain(std::span<const Vector> patches, const PretrainConfig& cfg);

// Assembles a model around pretrained layers; the target layer is freshly
// initialized from `seed`.
SaeDnnModel assemble_model(AutoencoderParams layer1, AutoencoderParams layer2,
                           std::size_t n_classes, std::uint64_t seed,
                           OutputMode mode = OutputMode::softmax);

// Joint mini-batch SGD on supervised_cost updating all three weight sets.
SaeDnnModel finetune(SaeDnnModel m, const LabeledBatch& data, const FinetuneConfig& cfg,
                     TrainTrace* trace = nullptr);

// Scalar vessel score in [kProbFloor, 1 - kProbFloor].
double predict_vessel_prob(const SaeDnnModel& m, const Vector& p);

// Vessel scores for a batch of patches (rows of x).
Vector predict_vessel_prob_batch(const SaeDnnModel& m, const Matrix& x);

namespace detail {

struct DnnGradients {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
  Matrix w3;
  Vector b3;
};

struct DnnStep {
  double cost = 0.0;
  DnnGradients grads;
};

DnnStep supervised_cost_and_gradients(const SaeDnnModel& m, const Matrix& x,
                                      std::span<const int> labels, LossKind loss,
                                      bool want_gradients);

}  // namespace detail

}  // namespace dasa
