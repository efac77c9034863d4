#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dasa/autoencoder.hpp"
#include "oracles.hpp"

using namespace dasa;

TEST_CASE("sigmoid basics") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(1.0) == doctest::Approx(0.7310585786300049).epsilon(1e-12));
  for (double z : {-40.0, -3.2, -1.0, 0.3, 7.7, 40.0, 800.0, -800.0}) {
    CHECK(std::isfinite(sigmoid(z)));
    CHECK(sigmoid(z) >= 0.0);
    CHECK(sigmoid(z) <= 1.0);
    CHECK(sigmoid(z) + sigmoid(-z) == doctest::Approx(1.0).epsilon(1e-15));
  }
  // monotone
  double prev = sigmoid(-10.0);
  for (double z = -9.5; z <= 10.0; z += 0.5) {
    CHECK(sigmoid(z) > prev);
    prev = sigmoid(z);
  }
}

TEST_CASE("encode: zero weights give 0.5 everywhere") {
  AutoencoderParams ae;
  ae.w = Matrix(3, 4);
  ae.b.assign(3, 0.0);
  ae.w_dec = Matrix(4, 3);
  ae.b_dec.assign(4, 0.0);
  const Vector y = encode(ae, {0.1, 0.9, 0.4, 0.7});
  REQUIRE(y.size() == 3);
  for (double v : y) {
    CHECK(v == 0.5);
  }
  const Vector p = decode(ae, y);
  REQUIRE(p.size() == 4);
  for (double v : p) {
    CHECK(v == 0.5);
  }
}

TEST_CASE("encode: worked single-node example") {
  AutoencoderParams ae;
  ae.w = Matrix(1, 2);
  ae.w(0, 0) = 1.0;
  ae.w(0, 1) = -1.0;
  ae.b = {0.5};
  ae.w_dec = Matrix(2, 1);
  ae.b_dec.assign(2, 0.0);
  const Vector y = encode(ae, {1.0, 0.5});
  REQUIRE(y.size() == 1);
  CHECK(y[0] == doctest::Approx(0.7310585786300049).epsilon(1e-12));
}

TEST_CASE("encode/decode match the naive double-loop oracle") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t k = 2 + seed % 7;
    const std::size_t j = 1 + seed % 5;
    AutoencoderParams ae = oracles::random_ae(k, j, seed);
    const auto patches = oracles::random_patches(3, k, seed + 100);
    for (const Vector& p : patches) {
      const Vector y = encode(ae, p);
      const Vector y_ref = oracles::naive_encode(ae, p);
      for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(y[i] == doctest::Approx(y_ref[i]).epsilon(1e-12));
        CHECK(y[i] > 0.0);
        CHECK(y[i] < 1.0);
      }
      const Vector ph = decode(ae, y);
      const Vector ph_ref = oracles::naive_decode(ae, y);
      REQUIRE(ph.size() == p.size());  // round-trip length contract
      for (std::size_t i = 0; i < ph.size(); ++i) {
        CHECK(ph[i] == doctest::Approx(ph_ref[i]).epsilon(1e-12));
        CHECK(ph[i] > 0.0);
        CHECK(ph[i] < 1.0);
      }
    }
  }
}

TEST_CASE("encode/decode reject shape mismatches with both dimensions named") {
  AutoencoderParams ae = oracles::random_ae(4, 3, 9);
  try {
    encode(ae, {0.1, 0.2});
    FAIL("expected a shape error");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2") != std::string::npos);
    CHECK(msg.find("4") != std::string::npos);
  }
  CHECK_THROWS_AS(decode(ae, {0.1}), std::invalid_argument);
}

TEST_CASE("ae_cost: zero under perfect reconstruction with matched sparsity") {
  AutoencoderParams ae;
  ae.w = Matrix(2, 3);
  ae.b.assign(2, 0.0);
  ae.w_dec = Matrix(3, 2);
  ae.b_dec.assign(3, 0.0);
  AeHyperparams hp;
  hp.beta = 0.7;
  hp.rho = 0.5;  // equals the observed mean activation of sigmoid(0)
  const std::vector<Vector> batch(4, Vector(3, 0.5));
  CHECK(ae_cost(ae, batch, hp) == 0.0);
}

TEST_CASE("ae_cost: beta=0 reduces to the mean squared reconstruction error") {
  AutoencoderParams ae = oracles::random_ae(5, 3, 17);
  const auto batch = oracles::random_patches(6, 5, 18);
  AeHyperparams hp;
  hp.beta = 0.0;
  hp.rho = 0.3;
  double recon = 0.0;
  for (const Vector& p : batch) {
    const Vector ph = oracles::naive_decode(ae, oracles::naive_encode(ae, p));
    for (std::size_t i = 0; i < p.size(); ++i) {
      recon += (p[i] - ph[i]) * (p[i] - ph[i]);
    }
  }
  recon /= static_cast<double>(batch.size());
  CHECK(ae_cost(ae, batch, hp) == doctest::Approx(recon).epsilon(1e-12));
}

TEST_CASE("ae_cost: three-patch two-node toy matches the brute-force oracle") {
  AutoencoderParams ae = oracles::random_ae(4, 2, 23);
  const auto batch = oracles::random_patches(3, 4, 24);
  AeHyperparams hp;
  hp.beta = 0.1;
  hp.rho = 0.04;
  CHECK(ae_cost(ae, batch, hp) ==
        doctest::Approx(oracles::naive_ae_cost(ae, batch, hp)).epsilon(1e-10));
  CHECK(ae_cost(ae, batch, hp) >= 0.0);
}

TEST_CASE("ae_cost: empty batch rejected") {
  AutoencoderParams ae = oracles::random_ae(4, 2, 3);
  AeHyperparams hp;
  const std::vector<Vector> empty;
  CHECK_THROWS_AS(ae_cost(ae, empty, hp), std::invalid_argument);
  CHECK_THROWS_AS(ae_gradients(ae, empty, hp), std::invalid_argument);
}

TEST_CASE("ae_gradients match central finite differences on a 4x3 toy AE") {
  AutoencoderParams ae = oracles::random_ae(4, 3, 42);
  const auto batch = oracles::random_patches(5, 4, 43);
  AeHyperparams hp;
  hp.beta = 0.1;
  hp.rho = 0.271828;  // keep the |rho - rho_hat| kink away from the operating point
  const AeGradients g = ae_gradients(ae, batch, hp);
  const double worst = oracles::max_grad_rel_err(
      oracles::ae_param_ptrs(ae), oracles::ae_grad_values(g),
      [&] { return ae_cost(ae, batch, hp); });
  CHECK(worst < 1e-4);
}

TEST_CASE("ae_gradients: identical patches give the same gradients for any batch size") {
  AutoencoderParams ae = oracles::random_ae(4, 3, 7);
  AeHyperparams hp;
  hp.rho = 0.3;
  const Vector p = oracles::random_patches(1, 4, 8)[0];
  const std::vector<Vector> single(1, p);
  const std::vector<Vector> repeated(5, p);
  const AeGradients g1 = ae_gradients(ae, single, hp);
  const AeGradients gn = ae_gradients(ae, repeated, hp);
  for (std::size_t i = 0; i < g1.w.size(); ++i) {
    CHECK(gn.w.values()[i] == doctest::Approx(g1.w.values()[i]).epsilon(1e-12));
  }
  for (std::size_t i = 0; i < g1.b_dec.size(); ++i) {
    CHECK(gn.b_dec[i] == doctest::Approx(g1.b_dec[i]).epsilon(1e-12));
  }
}

TEST_CASE("ae_gradients: all-ones mask equals unmasked exactly") {
  AutoencoderParams ae = oracles::random_ae(5, 4, 31);
  const auto batch = oracles::random_patches(6, 5, 32);
  AeHyperparams hp;
  const SaliencyMask ones = SaliencyMask::all_on(4);
  const AeGradients g = ae_gradients(ae, batch, hp);
  const AeGradients gm = ae_gradients(ae, batch, hp, &ones);
  CHECK(g.w == gm.w);
  CHECK(g.b == gm.b);
  CHECK(g.w_dec == gm.w_dec);
  CHECK(g.b_dec == gm.b_dec);
  CHECK(ae_cost(ae, batch, hp) == ae_cost(ae, batch, hp, &ones));
}

TEST_CASE("init_params: deterministic, seed-sensitive, zero biases") {
  const AutoencoderParams a = init_params(6, 4, 123);
  const AutoencoderParams b = init_params(6, 4, 123);
  const AutoencoderParams c = init_params(6, 4, 124);
  CHECK(a == b);
  CHECK(a != c);
  for (double v : a.b) {
    CHECK(v == 0.0);
  }
  for (double v : a.b_dec) {
    CHECK(v == 0.0);
  }
  const double r = std::sqrt(6.0 / 10.0);
  for (double v : a.w.values()) {
    CHECK(std::abs(v) <= r);
  }
  CHECK_THROWS_AS(init_params(0, 3, 1), std::invalid_argument);
  CHECK_THROWS_AS(init_params(3, 0, 1), std::invalid_argument);
}

TEST_CASE("init_params: weight mean is statistically centered at zero") {
  // 2 * 250 * 200 = 100k uniform draws in [-r, r]
  const std::size_t k = 250;
  const std::size_t j = 200;
  const AutoencoderParams ae = init_params(k, j, 777);
  double sum = 0.0;
  for (double v : ae.w.values()) {
    sum += v;
  }
  for (double v : ae.w_dec.values()) {
    sum += v;
  }
  const double n = static_cast<double>(2 * k * j);
  const double r = std::sqrt(6.0 / static_cast<double>(k + j));
  const double sigma_mean = r / std::sqrt(3.0 * n);
  CHECK(std::abs(sum / n) < 3.0 * sigma_mean);
}

TEST_CASE("train_ae: zero learning rate is the identity") {
  const AutoencoderParams ae = oracles::random_ae(6, 3, 55);
  const auto data = oracles::random_patches(40, 6, 56);
  AeHyperparams hp;
  hp.learning_rate = 0.0;
  hp.epochs = 3;
  hp.batch_size = 8;
  hp.seed = 9;
  const AutoencoderParams out = train_ae(ae, data, hp);
  CHECK(out == ae);
}

TEST_CASE("train_ae: fixed seed reproduces bit-identical parameters") {
  const auto data = oracles::random_patches(60, 5, 70);
  AeHyperparams hp;
  hp.epochs = 4;
  hp.batch_size = 16;
  hp.seed = 31;
  const AutoencoderParams a = train_ae(init_params(5, 3, 1), data, hp);
  const AutoencoderParams b = train_ae(init_params(5, 3, 1), data, hp);
  CHECK(a == b);
  hp.seed = 32;
  const AutoencoderParams c = train_ae(init_params(5, 3, 1), data, hp);
  CHECK(a != c);
}

TEST_CASE("train_ae: cost trace on the structured 200-sample set is non-increasing") {
  // regression fixture; blend-manifold data, lr 0.3, batch 50
  Rng r(2024);
  Vector v1(8), v2(8);
  for (auto& x : v1) {
    x = r.uniform01();
  }
  for (auto& x : v2) {
    x = r.uniform01();
  }
  std::vector<Vector> data;
  for (std::size_t i = 0; i < 200; ++i) {
    const double a = r.uniform01();
    Vector p(8);
    for (std::size_t jj = 0; jj < 8; ++jj) {
      p[jj] = std::clamp(a * v1[jj] + (1 - a) * v2[jj] + 0.02 * r.normal(), 0.0, 1.0);
    }
    data.push_back(p);
  }
  AeHyperparams hp;
  hp.epochs = 12;
  hp.batch_size = 50;
  hp.learning_rate = 0.3;
  hp.seed = 5;
  TrainTrace trace;
  train_ae(init_params(8, 4, 11), data, hp, &trace);
  REQUIRE(trace.size() == 12);
  for (std::size_t e = 1; e < 10; ++e) {
    CHECK(trace[e].cost <= trace[e - 1].cost);
  }
  const double expected[4] = {0.52183261500959743, 0.44789130013108869,
                              0.40648367300809241, 0.38116058687869031};
  for (std::size_t e = 0; e < 4; ++e) {
    CHECK(trace[e].cost == doctest::Approx(expected[e]).epsilon(1e-6));
    CHECK(trace[e].gate_fraction == 1.0);
  }
}

TEST_CASE("train_ae: non-finite cost aborts with epoch and batch in the diagnostic") {
  // huge learning rates alone only saturate the sigmoids (gradients then
  // vanish), so inject the non-finite state directly
  const auto data = oracles::random_patches(4, 3, 90);
  AeHyperparams hp;
  hp.epochs = 3;
  hp.batch_size = 2;
  hp.seed = 1;
  AutoencoderParams ae = init_params(3, 2, 2);
  ae.w(0, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    train_ae(ae, data, hp);
    FAIL("expected an abort on the non-finite cost");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("epoch 0") != std::string::npos);
    CHECK(msg.find("batch 0") != std::string::npos);
  }
}

TEST_CASE("hyperparameter validation") {
  AeHyperparams hp;
  hp.rho = 0.0;
  CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
  hp.rho = 1.0;
  CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
  hp.rho = 0.04;
  hp.learning_rate = -0.1;
  CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
  hp.learning_rate = 0.3;
  hp.batch_size = 0;
  CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
}
