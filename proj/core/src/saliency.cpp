#include "dasa/saliency.hpp"

#include <stdexcept>

namespace dasa {

SaliencyMask saliency_mask(const Matrix& activations, double tau, int layer_index) {
  if (activations.rows() == 0) {
    throw std::invalid_argument("saliency_mask: empty batch of activations");
  }
  const Vector means = col_means(activations);
  SaliencyMask m;
  m.layer_index = layer_index;
  m.tau = tau;
  m.gates.resize(means.size());
  for (std::size_t j = 0; j < means.size(); ++j) {
    m.gates[j] = means[j] >= tau ? 1 : 0;
  }
  return m;
}

Matrix saliency_gates_per_sample(const Matrix& activations, double tau) {
  if (activations.rows() == 0) {
    throw std::invalid_argument("saliency_gates_per_sample: empty batch of activations");
  }
  Matrix g(activations.rows(), activations.cols());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.values()[i] = activations.values()[i] >= tau ? 1.0 : 0.0;
  }
  return g;
}

}  // namespace dasa
