#include "dasa/autoencoder.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dasa {

namespace {

void sigmoid_inplace(Matrix& m) {
  for (double& x : m.values()) {
    x = sigmoid(x);
  }
}

Matrix gather_batch(std::span<const Vector> batch, std::size_t input_dim) {
  if (batch.empty()) {
    throw std::invalid_argument("autoencoder: empty batch");
  }
  Matrix x(batch.size(), input_dim);
  for (std::size_t n = 0; n < batch.size(); ++n) {
    check_dim("autoencoder batch patch length", batch[n].size(), input_dim);
    double* dst = x.row(n);
    for (std::size_t k = 0; k < input_dim; ++k) {
      dst[k] = batch[n][k];
    }
  }
  return x;
}

Matrix gates_from_mask(const SaliencyMask& mask, std::size_t hidden_dim) {
  check_dim("saliency mask length", mask.size(), hidden_dim);
  Matrix g(1, hidden_dim);
  for (std::size_t j = 0; j < hidden_dim; ++j) {
    g(0, j) = static_cast<double>(mask.gates[j]);
  }
  return g;
}

}  // namespace

void AeHyperparams::validate() const {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw std::invalid_argument("AeHyperparams: rho must lie strictly inside (0,1), got " +
                                std::to_string(rho));
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("AeHyperparams: learning_rate must be finite and >= 0");
  }
  if (beta < 0.0 || !std::isfinite(beta)) {
    throw std::invalid_argument("AeHyperparams: beta must be finite and >= 0");
  }
  if (batch_size < 1) {
    throw std::invalid_argument("AeHyperparams: batch_size must be >= 1");
  }
}

void AutoencoderParams::validate() const {
  check_dim("AutoencoderParams encoder bias length", b.size(), w.rows());
  check_dim("AutoencoderParams decoder cols vs hidden dim", w_dec.cols(), w.rows());
  check_dim("AutoencoderParams decoder rows vs input dim", w_dec.rows(), w.cols());
  check_dim("AutoencoderParams decoder bias length", b_dec.size(), w.cols());
}

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Vector encode(const AutoencoderParams& ae, const Vector& p) {
  check_dim("encode input length vs encoder input dim", p.size(), ae.w.cols());
  Vector y = matvec(ae.w, p);
  for (std::size_t j = 0; j < y.size(); ++j) {
    y[j] = sigmoid(y[j] + ae.b[j]);
  }
  return y;
}

Vector decode(const AutoencoderParams& ae, const Vector& y) {
  check_dim("decode input length vs decoder input dim", y.size(), ae.w_dec.cols());
  Vector p = matvec(ae.w_dec, y);
  for (std::size_t k = 0; k < p.size(); ++k) {
    p[k] = sigmoid(p[k] + ae.b_dec[k]);
  }
  return p;
}

Matrix encode_batch(const AutoencoderParams& ae, const Matrix& x) {
  check_dim("encode_batch input cols vs encoder input dim", x.cols(), ae.w.cols());
  Matrix y = matmul_nt(x, ae.w);
  add_row_inplace(y, ae.b);
  sigmoid_inplace(y);
  return y;
}

Matrix decode_batch(const AutoencoderParams& ae, const Matrix& y) {
  check_dim("decode_batch input cols vs decoder input dim", y.cols(), ae.w_dec.cols());
  Matrix p = matmul_nt(y, ae.w_dec);
  add_row_inplace(p, ae.b_dec);
  sigmoid_inplace(p);
  return p;
}

double BatchGates::on_fraction() const {
  if (gates.size() == 0) {
    return 1.0;
  }
  double on = 0.0;
  for (double g : gates.values()) {
    on += g;
  }
  return on / static_cast<double>(gates.size());
}

namespace detail {

Matrix init_uniform(std::size_t rows, std::size_t cols, double half_range, Rng& rng) {
  Matrix m(rows, cols);
  for (double& x : m.values()) {
    x = rng.uniform(-half_range, half_range);
  }
  return m;
}

// Cost and optional gradients given precomputed hidden activations. `gates`
// may be null (all-ones), 1 x J, or N x J.
CostAndGrads cost_and_gradients_given_activations(const AutoencoderParams& ae,
                                                  const Matrix& x, const Matrix& y,
                                                  const AeHyperparams& hp,
                                                  const Matrix* gates,
                                                  bool want_gradients) {
  const std::size_t n = x.rows();
  const std::size_t hidden = ae.hidden_dim();
  const std::size_t input = ae.input_dim();

  if (gates != nullptr) {
    check_dim("batch gates width vs hidden dim", gates->cols(), hidden);
    if (gates->rows() != 1 && gates->rows() != n) {
      throw std::invalid_argument("batch gates rows must be 1 or the batch size, got " +
                                  std::to_string(gates->rows()));
    }
  }

  Matrix y_gated = y;
  double gate_fraction = 1.0;
  if (gates != nullptr) {
    double on = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double* g = gates->row(gates->rows() == 1 ? 0 : r);
      double* yr = y_gated.row(r);
      for (std::size_t j = 0; j < hidden; ++j) {
        yr[j] *= g[j];
      }
    }
    for (double g : gates->values()) {
      on += g;
    }
    gate_fraction = on / static_cast<double>(gates->size());
  }

  Matrix p_hat = decode_batch(ae, y_gated);

  const double inv_n = 1.0 / static_cast<double>(n);
  double recon = 0.0;
  for (std::size_t i = 0; i < p_hat.size(); ++i) {
    const double d = x.values()[i] - p_hat.values()[i];
    recon += d * d;
  }
  recon *= inv_n;

  const Vector rho_hat = col_means(y);
  double sparsity = 0.0;
  for (double r : rho_hat) {
    sparsity += std::abs(hp.rho - r);
  }
  sparsity *= hp.beta;

  CostAndGrads out;
  out.cost = recon + sparsity;
  out.gate_fraction = gate_fraction;
  if (!want_gradients) {
    return out;
  }

  // reconstruction path through the decoder
  Matrix delta_dec(n, input);
  for (std::size_t i = 0; i < delta_dec.size(); ++i) {
    const double p = p_hat.values()[i];
    delta_dec.values()[i] =
        2.0 * inv_n * (p - x.values()[i]) * p * (1.0 - p);
  }
  out.grads.w_dec = matmul_tn(delta_dec, y_gated);
  out.grads.b_dec = col_sums(delta_dec);

  // back to the hidden layer; the gates are constants of the objective
  Matrix d_y = matmul_nn(delta_dec, ae.w_dec);
  if (gates != nullptr) {
    for (std::size_t r = 0; r < n; ++r) {
      const double* g = gates->row(gates->rows() == 1 ? 0 : r);
      double* dr = d_y.row(r);
      for (std::size_t j = 0; j < hidden; ++j) {
        dr[j] *= g[j];
      }
    }
  }

  // sparsity path hits every node, gated or not; subgradient 0 at equality
  Vector sparse_grad(hidden, 0.0);
  for (std::size_t j = 0; j < hidden; ++j) {
    const double diff = rho_hat[j] - hp.rho;
    const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    sparse_grad[j] = hp.beta * sgn * inv_n;
  }

  Matrix delta_pre(n, hidden);
  for (std::size_t r = 0; r < n; ++r) {
    const double* yr = y.row(r);
    const double* dr = d_y.row(r);
    double* out_r = delta_pre.row(r);
    for (std::size_t j = 0; j < hidden; ++j) {
      out_r[j] = (dr[j] + sparse_grad[j]) * yr[j] * (1.0 - yr[j]);
    }
  }
  out.grads.w = matmul_tn(delta_pre, x);
  out.grads.b = col_sums(delta_pre);
  return out;
}

CostAndGrads masked_cost_and_gradients(const AutoencoderParams& ae, const Matrix& x,
                                       const AeHyperparams& hp, const Matrix* gates,
                                       bool want_gradients) {
  if (x.rows() == 0) {
    throw std::invalid_argument("autoencoder: empty batch");
  }
  check_dim("autoencoder batch width vs input dim", x.cols(), ae.input_dim());
  const Matrix y = encode_batch(ae, x);
  return cost_and_gradients_given_activations(ae, x, y, hp, gates, want_gradients);
}

}  // namespace detail

double ae_cost(const AutoencoderParams& ae, std::span<const Vector> batch,
               const AeHyperparams& hp, const SaliencyMask* mask) {
  ae.validate();
  const Matrix x = gather_batch(batch, ae.input_dim());
  if (mask != nullptr) {
    const Matrix gates = gates_from_mask(*mask, ae.hidden_dim());
    return detail::masked_cost_and_gradients(ae, x, hp, &gates, false).cost;
  }
  return detail::masked_cost_and_gradients(ae, x, hp, nullptr, false).cost;
}

AeGradients ae_gradients(const AutoencoderParams& ae, std::span<const Vector> batch,
                         const AeHyperparams& hp, const SaliencyMask* mask) {
  ae.validate();
  const Matrix x = gather_batch(batch, ae.input_dim());
  if (mask != nullptr) {
    const Matrix gates = gates_from_mask(*mask, ae.hidden_dim());
    return detail::masked_cost_and_gradients(ae, x, hp, &gates, true).grads;
  }
  return detail::masked_cost_and_gradients(ae, x, hp, nullptr, true).grads;
}

AutoencoderParams init_params(std::size_t input_dim, std::size_t hidden_dim,
                              std::uint64_t seed) {
  if (input_dim == 0 || hidden_dim == 0) {
    throw std::invalid_argument("init_params: dimensions must be >= 1, got " +
                                std::to_string(input_dim) + " x " +
                                std::to_string(hidden_dim));
  }
  const double r = std::sqrt(6.0 / static_cast<double>(input_dim + hidden_dim));
  Rng rng(seed);
  AutoencoderParams ae;
  ae.w = detail::init_uniform(hidden_dim, input_dim, r, rng);
  ae.b.assign(hidden_dim, 0.0);
  ae.w_dec = detail::init_uniform(input_dim, hidden_dim, r, rng);
  ae.b_dec.assign(input_dim, 0.0);
  return ae;
}

AutoencoderParams train_ae(AutoencoderParams ae, std::span<const Vector> data,
                           const AeHyperparams& hp, TrainTrace* trace,
                           const MaskFn& mask_fn) {
  hp.validate();
  ae.validate();
  if (data.empty()) {
    throw std::invalid_argument("train_ae: empty dataset");
  }
  const std::size_t input_dim = ae.input_dim();
  const std::size_t n = data.size();

  Rng rng(hp.seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    order[i] = i;
  }

  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    rng.shuffle(order);
    double cost_sum = 0.0;
    double gate_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += hp.batch_size) {
      const std::size_t end = std::min(n, start + hp.batch_size);
      Matrix x(end - start, input_dim);
      for (std::size_t i = start; i < end; ++i) {
        const Vector& patch = data[order[i]];
        check_dim("train_ae patch length", patch.size(), input_dim);
        double* dst = x.row(i - start);
        for (std::size_t k = 0; k < input_dim; ++k) {
          dst[k] = patch[k];
        }
      }

      const Matrix y = encode_batch(ae, x);
      std::optional<BatchGates> bg;
      if (mask_fn) {
        bg = mask_fn(y);
      }
      auto step = detail::cost_and_gradients_given_activations(
          ae, x, y, hp, bg ? &bg->gates : nullptr, true);
      if (!std::isfinite(step.cost)) {
        throw std::runtime_error("train_ae: diverged to non-finite cost at epoch " +
                                 std::to_string(epoch) + ", batch " +
                                 std::to_string(batches));
      }
      cost_sum += step.cost;
      gate_sum += step.gate_fraction;
      ++batches;

      const double lr = hp.learning_rate;
      for (std::size_t i = 0; i < ae.w.size(); ++i) {
        ae.w.values()[i] -= lr * step.grads.w.values()[i];
      }
      for (std::size_t j = 0; j < ae.b.size(); ++j) {
        ae.b[j] -= lr * step.grads.b[j];
      }
      for (std::size_t i = 0; i < ae.w_dec.size(); ++i) {
        ae.w_dec.values()[i] -= lr * step.grads.w_dec.values()[i];
      }
      for (std::size_t k = 0; k < ae.b_dec.size(); ++k) {
        ae.b_dec[k] -= lr * step.grads.b_dec[k];
      }
    }
    if (trace != nullptr) {
      trace->push_back({epoch, cost_sum / static_cast<double>(batches),
                        gate_sum / static_cast<double>(batches)});
    }
  }
  return ae;
}

}  // namespace dasa
