#pragma once

#include <cstdint>
#include <vector>

#include "dasa/matrix.hpp"

namespace dasa {

// Binary per-node gate vector for one hidden layer and one mini-batch.
// A node is salient (gate 1) when its response reaches the transfer
// coefficient tau; salient nodes are preserved during adaptation.
struct SaliencyMask {
  std::vector<std::uint8_t> gates;  // entries in {0,1}
  int layer_index = 1;              // 1 or 2
  double tau = 0.0;

  std::size_t size() const { return gates.size(); }

  double on_fraction() const {
    if (gates.empty()) {
      return 1.0;
    }
    std::size_t on = 0;
    for (auto g : gates) {
      on += g;
    }
    return static_cast<double>(on) / static_cast<double>(gates.size());
  }

  static SaliencyMask all_on(std::size_t n, int layer_index = 1) {
    SaliencyMask m;
    m.gates.assign(n, 1);
    m.layer_index = layer_index;
    m.tau = 0.0;
    return m;
  }

  bool operator==(const SaliencyMask&) const = default;
};

// Batch-mean statistic: gate j is on iff the mean activation of node j over
// the mini-batch is >= tau. The boundary value counts as salient.
SaliencyMask saliency_mask(const Matrix& activations, double tau, int layer_index = 1);

// Literal per-sample thresholding: one gate row per sample, entries {0,1}.
Matrix saliency_gates_per_sample(const Matrix& activations, double tau);

}  // namespace dasa
