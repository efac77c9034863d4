#pragma once

// Independent brute-force reference implementations used only by tests.
// These deliberately avoid the library's batched matrix paths: everything is
// plain double loops over the defining formulas.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "dasa/autoencoder.hpp"
#include "dasa/rng.hpp"
#include "dasa/sae_dnn.hpp"

namespace oracles {

using dasa::AeHyperparams;
using dasa::AutoencoderParams;
using dasa::Matrix;
using dasa::SaeDnnModel;
using dasa::Vector;

inline double sigmoid_ref(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline Vector naive_encode(const AutoencoderParams& ae, const Vector& p) {
  Vector y(ae.hidden_dim());
  for (std::size_t j = 0; j < ae.hidden_dim(); ++j) {
    double acc = ae.b[j];
    for (std::size_t k = 0; k < ae.input_dim(); ++k) {
      acc += ae.w(j, k) * p[k];
    }
    y[j] = sigmoid_ref(acc);
  }
  return y;
}

inline Vector naive_decode(const AutoencoderParams& ae, const Vector& y) {
  Vector p(ae.input_dim());
  for (std::size_t k = 0; k < ae.input_dim(); ++k) {
    double acc = ae.b_dec[k];
    for (std::size_t j = 0; j < ae.hidden_dim(); ++j) {
      acc += ae.w_dec(k, j) * y[j];
    }
    p[k] = sigmoid_ref(acc);
  }
  return p;
}

// Mean squared reconstruction error plus beta * sum_j |rho - rho_hat_j|,
// with optional decoder gates.
inline double naive_ae_cost(const AutoencoderParams& ae, const std::vector<Vector>& batch,
                            const AeHyperparams& hp,
                            const std::vector<double>* gates = nullptr) {
  const double n = static_cast<double>(batch.size());
  double recon = 0.0;
  std::vector<double> rho_hat(ae.hidden_dim(), 0.0);
  for (const Vector& p : batch) {
    Vector y = naive_encode(ae, p);
    for (std::size_t j = 0; j < y.size(); ++j) {
      rho_hat[j] += y[j] / n;
    }
    if (gates != nullptr) {
      for (std::size_t j = 0; j < y.size(); ++j) {
        y[j] *= (*gates)[j];
      }
    }
    const Vector p_hat = naive_decode(ae, y);
    for (std::size_t k = 0; k < p.size(); ++k) {
      recon += (p[k] - p_hat[k]) * (p[k] - p_hat[k]) / n;
    }
  }
  double sparsity = 0.0;
  for (double r : rho_hat) {
    sparsity += std::abs(hp.rho - r);
  }
  return recon + hp.beta * sparsity;
}

inline Vector naive_forward(const SaeDnnModel& m, const Vector& p) {
  const Vector h1 = naive_encode(m.layer1, p);
  const Vector h2 = naive_encode(m.layer2, h1);
  Vector t(m.n_classes());
  for (std::size_t c = 0; c < t.size(); ++c) {
    double acc = m.target_b[c];
    for (std::size_t j = 0; j < h2.size(); ++j) {
      acc += m.target_w(c, j) * h2[j];
    }
    t[c] = acc;
  }
  if (m.output_mode == dasa::OutputMode::softmax) {
    const double mx = *std::max_element(t.begin(), t.end());
    double sum = 0.0;
    for (double& v : t) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (double& v : t) {
      v /= sum;
    }
  } else {
    for (double& v : t) {
      v = sigmoid_ref(v);
    }
  }
  return t;
}

// Exhaustive (positive, negative) pair comparison with half credit for ties.
inline double pairwise_auc(const std::vector<double>& scores,
                           const std::vector<int>& labels) {
  double wins2 = 0.0;  // 2*wins + ties, kept integral
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 0) {
      continue;
    }
    ++n_pos;
    for (std::size_t k = 0; k < scores.size(); ++k) {
      if (labels[k] != 0) {
        continue;
      }
      if (scores[i] > scores[k]) {
        wins2 += 2.0;
      } else if (scores[i] == scores[k]) {
        wins2 += 1.0;
      }
    }
  }
  n_neg = scores.size() - n_pos;
  return wins2 / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1e-5, std::abs(a), std::abs(b)});
}

// Max guarded relative error between analytic gradients and central finite
// differences of `cost` over every entry reachable through `params`.
inline double max_grad_rel_err(std::vector<double*> params,
                               const std::vector<double>& analytic,
                               const std::function<double()>& cost,
                               double step = 1e-5) {
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = *params[i];
    *params[i] = saved + step;
    const double up = cost();
    *params[i] = saved - step;
    const double down = cost();
    *params[i] = saved;
    const double fd = (up - down) / (2.0 * step);
    worst = std::max(worst, rel_err(fd, analytic[i]));
  }
  return worst;
}

inline std::vector<double*> ae_param_ptrs(AutoencoderParams& ae) {
  std::vector<double*> ptrs;
  for (double& x : ae.w.values()) {
    ptrs.push_back(&x);
  }
  for (double& x : ae.b) {
    ptrs.push_back(&x);
  }
  for (double& x : ae.w_dec.values()) {
    ptrs.push_back(&x);
  }
  for (double& x : ae.b_dec) {
    ptrs.push_back(&x);
  }
  return ptrs;
}

inline std::vector<double> ae_grad_values(const dasa::AeGradients& g) {
  std::vector<double> v;
  for (double x : g.w.values()) {
    v.push_back(x);
  }
  for (double x : g.b) {
    v.push_back(x);
  }
  for (double x : g.w_dec.values()) {
    v.push_back(x);
  }
  for (double x : g.b_dec) {
    v.push_back(x);
  }
  return v;
}

// Random toy AE with non-zero biases so no gradient path is trivially dead.
inline AutoencoderParams random_ae(std::size_t input_dim, std::size_t hidden_dim,
                                   std::uint64_t seed) {
  AutoencoderParams ae = dasa::init_params(input_dim, hidden_dim, seed);
  dasa::Rng rng(seed ^ 0xb1a5ULL);
  for (double& b : ae.b) {
    b = rng.uniform(-0.4, 0.4);
  }
  for (double& b : ae.b_dec) {
    b = rng.uniform(-0.4, 0.4);
  }
  return ae;
}

inline std::vector<Vector> random_patches(std::size_t count, std::size_t dim,
                                          std::uint64_t seed) {
  dasa::Rng rng(seed);
  std::vector<Vector> out(count, Vector(dim));
  for (Vector& p : out) {
    for (double& x : p) {
      x = rng.uniform01();
    }
  }
  return out;
}

}  // namespace oracles
