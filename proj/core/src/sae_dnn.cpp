#include "dasa/sae_dnn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dasa {

namespace {

Matrix gather_rows(std::span<const Vector> patches, std::size_t dim,
                   std::span<const std::size_t> order, std::size_t start, std::size_t end) {
  Matrix x(end - start, dim);
  for (std::size_t i = start; i < end; ++i) {
    const Vector& p = patches[order[i]];
    check_dim("labeled batch patch length", p.size(), dim);
    double* dst = x.row(i - start);
    for (std::size_t k = 0; k < dim; ++k) {
      dst[k] = p[k];
    }
  }
  return x;
}

void softmax_row_inplace(double* z, std::size_t n) {
  double mx = z[0];
  for (std::size_t i = 1; i < n; ++i) {
    mx = std::max(mx, z[i]);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = std::exp(z[i] - mx);
    sum += z[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    z[i] /= sum;
  }
}

}  // namespace

namespace detail {

DnnStep supervised_cost_and_gradients(const SaeDnnModel& m, const Matrix& x,
                                      std::span<const int> labels, LossKind loss,
                                      bool want_gradients) {
  const std::size_t n = x.rows();
  const std::size_t n_classes = m.n_classes();
  const double inv_n = 1.0 / static_cast<double>(n);

  const Matrix h1 = encode_batch(m.layer1, x);
  const Matrix h2 = encode_batch(m.layer2, h1);
  Matrix t = matmul_nt(h2, m.target_w);
  add_row_inplace(t, m.target_b);
  if (m.output_mode == OutputMode::softmax) {
    for (std::size_t r = 0; r < n; ++r) {
      softmax_row_inplace(t.row(r), n_classes);
    }
  } else {
    for (double& v : t.values()) {
      v = sigmoid(v);
    }
  }

  DnnStep out;
  if (loss == LossKind::squared_error) {
    double c = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double* tr = t.row(r);
      for (std::size_t c2 = 0; c2 < n_classes; ++c2) {
        const double e = c2 == static_cast<std::size_t>(labels[r]) ? 1.0 : 0.0;
        const double d = tr[c2] - e;
        c += d * d;
      }
    }
    out.cost = c * inv_n;
  } else {
    double c = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      c -= std::log(clip_prob(t(r, static_cast<std::size_t>(labels[r]))));
    }
    out.cost = c * inv_n;
  }
  if (!want_gradients) {
    return out;
  }

  // dC/dt, then through the output nonlinearity
  Matrix g(n, n_classes);
  if (loss == LossKind::squared_error) {
    for (std::size_t r = 0; r < n; ++r) {
      const double* tr = t.row(r);
      double* gr = g.row(r);
      for (std::size_t c2 = 0; c2 < n_classes; ++c2) {
        const double e = c2 == static_cast<std::size_t>(labels[r]) ? 1.0 : 0.0;
        gr[c2] = 2.0 * inv_n * (tr[c2] - e);
      }
    }
  } else {
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t lab = static_cast<std::size_t>(labels[r]);
      g(r, lab) = -inv_n / clip_prob(t(r, lab));
    }
  }

  Matrix delta_z(n, n_classes);
  if (m.output_mode == OutputMode::softmax) {
    for (std::size_t r = 0; r < n; ++r) {
      const double* tr = t.row(r);
      const double* gr = g.row(r);
      double dot = 0.0;
      for (std::size_t i = 0; i < n_classes; ++i) {
        dot += gr[i] * tr[i];
      }
      double* dz = delta_z.row(r);
      for (std::size_t i = 0; i < n_classes; ++i) {
        dz[i] = tr[i] * (gr[i] - dot);
      }
    }
  } else {
    for (std::size_t i = 0; i < delta_z.size(); ++i) {
      const double tv = t.values()[i];
      delta_z.values()[i] = g.values()[i] * tv * (1.0 - tv);
    }
  }

  out.grads.w3 = matmul_tn(delta_z, h2);
  out.grads.b3 = col_sums(delta_z);

  Matrix d_h2 = matmul_nn(delta_z, m.target_w);
  for (std::size_t i = 0; i < d_h2.size(); ++i) {
    const double h = h2.values()[i];
    d_h2.values()[i] *= h * (1.0 - h);
  }
  out.grads.w2 = matmul_tn(d_h2, h1);
  out.grads.b2 = col_sums(d_h2);

  Matrix d_h1 = matmul_nn(d_h2, m.layer2.w);
  for (std::size_t i = 0; i < d_h1.size(); ++i) {
    const double h = h1.values()[i];
    d_h1.values()[i] *= h * (1.0 - h);
  }
  out.grads.w1 = matmul_tn(d_h1, x);
  out.grads.b1 = col_sums(d_h1);
  return out;
}

}  // namespace detail

void SaeDnnModel::validate() const {
  layer1.validate();
  layer2.validate();
  check_dim("SaeDnnModel layer2 input vs layer1 hidden", layer2.input_dim(),
            layer1.hidden_dim());
  check_dim("SaeDnnModel target cols vs layer2 hidden", target_w.cols(),
            layer2.hidden_dim());
  check_dim("SaeDnnModel target bias length", target_b.size(), target_w.rows());
  if (target_w.rows() < 2) {
    throw std::invalid_argument("SaeDnnModel: need at least 2 classes, got " +
                                std::to_string(target_w.rows()));
  }
}

void LabeledBatch::validate(std::size_t n_classes) const {
  if (patches.empty()) {
    throw std::invalid_argument("LabeledBatch: empty batch");
  }
  if (patches.size() != labels.size()) {
    throw std::invalid_argument("LabeledBatch: " + std::to_string(patches.size()) +
                                " patches vs " + std::to_string(labels.size()) +
                                " labels");
  }
  for (int lab : labels) {
    if (lab < 0 || static_cast<std::size_t>(lab) >= n_classes) {
      throw std::invalid_argument("LabeledBatch: label " + std::to_string(lab) +
                                  " out of range for " + std::to_string(n_classes) +
                                  " classes");
    }
  }
}

void FinetuneConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("FinetuneConfig: learning_rate must be finite and >= 0");
  }
  if (batch_size < 1) {
    throw std::invalid_argument("FinetuneConfig: batch_size must be >= 1");
  }
}

Vector forward(const SaeDnnModel& m, const Vector& p) {
  const Vector h1 = encode(m.layer1, p);
  const Vector h2 = encode(m.layer2, h1);
  Vector t = matvec(m.target_w, h2);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] += m.target_b[i];
  }
  if (m.output_mode == OutputMode::softmax) {
    softmax_row_inplace(t.data(), t.size());
  } else {
    for (double& v : t) {
      v = sigmoid(v);
    }
  }
  return t;
}

Matrix forward_batch(const SaeDnnModel& m, const Matrix& x) {
  const Matrix h1 = encode_batch(m.layer1, x);
  const Matrix h2 = encode_batch(m.layer2, h1);
  Matrix t = matmul_nt(h2, m.target_w);
  add_row_inplace(t, m.target_b);
  if (m.output_mode == OutputMode::softmax) {
    for (std::size_t r = 0; r < t.rows(); ++r) {
      softmax_row_inplace(t.row(r), t.cols());
    }
  } else {
    for (double& v : t.values()) {
      v = sigmoid(v);
    }
  }
  return t;
}

double supervised_cost(const SaeDnnModel& m, const LabeledBatch& batch, LossKind loss) {
  m.validate();
  batch.validate(m.n_classes());
  const Matrix x = Matrix::from_rows(batch.patches);
  check_dim("supervised_cost patch length", x.cols(), m.input_dim());
  return detail::supervised_cost_and_gradients(m, x, batch.labels, loss, false).cost;
}

PretrainResult pretrain(std::span<const Vector> patches, const PretrainConfig& cfg) {
  if (patches.empty()) {
    throw std::invalid_argument("pretrain: empty dataset");
  }
  const std::size_t input_dim = patches[0].size();

  PretrainResult out;
  AeHyperparams hp1 = cfg.ae;
  hp1.seed = derive_seed(cfg.ae.seed, SeedTag::ae1_train);
  AutoencoderParams ae1 =
      init_params(input_dim, cfg.hidden1, derive_seed(cfg.ae.seed, SeedTag::ae1_init));
  out.layer1 = train_ae(std::move(ae1), patches, hp1, &out.trace1);

  // layer2 trains on layer1's encodings, chunked to keep memory flat
  std::vector<Vector> encoded;
  encoded.reserve(patches.size());
  const std::size_t chunk = 512;
  for (std::size_t start = 0; start < patches.size(); start += chunk) {
    const std::size_t end = std::min(patches.size(), start + chunk);
    Matrix x(end - start, input_dim);
    for (std::size_t i = start; i < end; ++i) {
      check_dim("pretrain patch length", patches[i].size(), input_dim);
      double* dst = x.row(i - start);
      for (std::size_t k = 0; k < input_dim; ++k) {
        dst[k] = patches[i][k];
      }
    }
    const Matrix y = encode_batch(out.layer1, x);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      encoded.push_back(y.row_vector(r));
    }
  }

  AeHyperparams hp2 = cfg.ae;
  hp2.seed = derive_seed(cfg.ae.seed, SeedTag::ae2_train);
  AutoencoderParams ae2 =
      init_params(cfg.hidden1, cfg.hidden2, derive_seed(cfg.ae.seed, SeedTag::ae2_init));
  out.layer2 = train_ae(std::move(ae2), encoded, hp2, &out.trace2);
  return out;
}

SaeDnnModel assemble_model(AutoencoderParams layer1, AutoencoderParams layer2,
                           std::size_t n_classes, std::uint64_t seed, OutputMode mode) {
  SaeDnnModel m;
  m.layer1 = std::move(layer1);
  m.layer2 = std::move(layer2);
  const std::size_t hidden2 = m.layer2.hidden_dim();
  const double r = std::sqrt(6.0 / static_cast<double>(hidden2 + n_classes));
  Rng rng(seed);
  m.target_w = detail::init_uniform(n_classes, hidden2, r, rng);
  m.target_b.assign(n_classes, 0.0);
  m.output_mode = mode;
  m.validate();
  return m;
}

SaeDnnModel finetune(SaeDnnModel m, const LabeledBatch& data, const FinetuneConfig& cfg,
                     TrainTrace* trace) {
  m.validate();
  cfg.validate();
  data.validate(m.n_classes());

  const std::size_t n = data.patches.size();
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    order[i] = i;
  }
  std::vector<int> batch_labels;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double cost_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      const Matrix x = gather_rows(data.patches, m.input_dim(), order, start, end);
      batch_labels.resize(end - start);
      for (std::size_t i = start; i < end; ++i) {
        batch_labels[i - start] = data.labels[order[i]];
      }

      auto step = detail::supervised_cost_and_gradients(m, x, batch_labels, cfg.loss, true);
      if (!std::isfinite(step.cost)) {
        throw std::runtime_error("finetune: diverged to non-finite cost at epoch " +
                                 std::to_string(epoch) + ", batch " +
                                 std::to_string(batches));
      }
      cost_sum += step.cost;
      ++batches;

      const double lr = cfg.learning_rate;
      for (std::size_t i = 0; i < m.layer1.w.size(); ++i) {
        m.layer1.w.values()[i] -= lr * step.grads.w1.values()[i];
      }
      for (std::size_t i = 0; i < m.layer1.b.size(); ++i) {
        m.layer1.b[i] -= lr * step.grads.b1[i];
      }
      for (std::size_t i = 0; i < m.layer2.w.size(); ++i) {
        m.layer2.w.values()[i] -= lr * step.grads.w2.values()[i];
      }
      for (std::size_t i = 0; i < m.layer2.b.size(); ++i) {
        m.layer2.b[i] -= lr * step.grads.b2[i];
      }
      for (std::size_t i = 0; i < m.target_w.size(); ++i) {
        m.target_w.values()[i] -= lr * step.grads.w3.values()[i];
      }
      for (std::size_t i = 0; i < m.target_b.size(); ++i) {
        m.target_b[i] -= lr * step.grads.b3[i];
      }
    }
    if (trace != nullptr) {
      trace->push_back({epoch, cost_sum / static_cast<double>(batches), 1.0});
    }
  }
  return m;
}

double predict_vessel_prob(const SaeDnnModel& m, const Vector& p) {
  const Vector t = forward(m, p);
  if (m.output_mode == OutputMode::softmax) {
    return clip_prob(t[kVesselClass]);
  }
  return clip_prob(t[kVesselClass] / (t[kVesselClass] + t[kBackgroundClass]));
}

Vector predict_vessel_prob_batch(const SaeDnnModel& m, const Matrix& x) {
  const Matrix t = forward_batch(m, x);
  Vector out(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    if (m.output_mode == OutputMode::softmax) {
      out[r] = clip_prob(t(r, kVesselClass));
    } else {
      out[r] = clip_prob(t(r, kVesselClass) /
                         (t(r, kVesselClass) + t(r, kBackgroundClass)));
    }
  }
  return out;
}

}  // namespace dasa
