/**
 * Copyright 2026 The cepvae Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <random>

#include "cepvae/cvae.h"
#include "cepvae/synthetic.h"
#include "doctest.h"
#include "test_util.h"

namespace cepvae {
namespace {

using Eigen::VectorXd;

CvaeConfig tiny_config(std::uint64_t seed = 1) {
  CvaeConfig cfg;
  cfg.input_dim = 4;
  cfg.latent_dim = 2;
  cfg.hidden_dims = {8};
  cfg.seed = seed;
  return cfg;
}

VectorXd random_vector(std::mt19937_64 &rng, int n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  VectorXd v(n);
  for (auto &x : v) x = d(rng);
  return v;
}

TEST_CASE("build_condition") {
  auto c = build_condition(21, 127);
  CHECK(c.pitch_norm == 0.0);
  CHECK(c.velocity_norm == 1.0);
  c = build_condition(69, 100);
  CHECK(c.pitch_norm == doctest::Approx(48.0 / 87.0));
  CHECK(c.velocity_norm == doctest::Approx(100.0 / 127.0));
  CHECK(build_condition(60.5, 64).pitch_norm == doctest::Approx(39.5 / 87.0));
  CHECK_THROWS_AS(build_condition(108, 0), Error);
  CHECK_THROWS_AS(build_condition(20, 100), Error);
  CHECK_THROWS_AS(build_condition(109, 100), Error);
  CHECK_THROWS_AS(build_condition(60, 128), Error);
}

TEST_CASE("CvaeConfig validation") {
  auto cfg = tiny_config();
  cfg.validate();
  cfg.latent_dim = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = tiny_config();
  cfg.hidden_dims = {8, 0};
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = tiny_config();
  cfg.beta = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("parameter layout") {
  const CvaeModel m(tiny_config());
  // enc 6->8, heads 8->2 twice, dec 4->8, out 8->4
  CHECK(m.num_parameters() == (6 * 8 + 8) + 2 * (8 * 2 + 2) + (4 * 8 + 8) + (8 * 4 + 4));
  REQUIRE(m.decoder_layers().size() == 2);
  CHECK(m.decoder_layers().back().out == 4);
  CHECK(m.decoder_layers().front().in == 4);
}

TEST_CASE("zero network: encode and decode give zeros") {
  const CvaeModel m(CvaeConfig{});
  const auto c = build_condition(60, 100);
  VectorXd x = VectorXd::LinSpaced(32, -1.0, 1.0);
  const auto enc = encode(m, x, c);
  CHECK(enc.mu.isZero(0.0));
  CHECK(enc.logvar.isZero(0.0));
  CHECK(decode(m, VectorXd::Ones(8), c).isZero(0.0));
  CHECK_THROWS_AS(encode(m, VectorXd::Zero(31), c), Error);
  CHECK_THROWS_AS(decode(m, VectorXd::Zero(7), c), Error);
}

TEST_CASE("hand-set forward pass") {
  CvaeConfig cfg;
  cfg.input_dim = 2;
  cfg.latent_dim = 1;
  cfg.hidden_dims = {1};
  CvaeModel m(cfg);
  auto p = m.parameters();
  const auto set_layer = [&](const DenseLayout &l, std::vector<double> w, std::vector<double> b) {
    for (std::size_t i = 0; i < w.size(); ++i) p[l.weight_offset + i] = w[i];
    for (std::size_t i = 0; i < b.size(); ++i) p[l.bias_offset + i] = b[i];
  };
  set_layer(m.encoder_layers()[0], {0.5, -0.25, 1.0, 2.0}, {0.1});
  set_layer(m.mu_head(), {3.0}, {-0.2});
  set_layer(m.logvar_head(), {-1.0}, {0.05});
  set_layer(m.decoder_layers()[0], {0.7, -0.4, 0.3}, {0.2});
  set_layer(m.decoder_layers()[1], {1.5, -2.0}, {0.25, 0.5});

  const ConditionVector c{0.4, 0.8};
  VectorXd x(2);
  x << 1.0, 2.0;
  const double h = std::tanh(0.5 * 1.0 - 0.25 * 2.0 + 1.0 * 0.4 + 2.0 * 0.8 + 0.1);
  const auto enc = encode(m, x, c);
  CHECK(enc.mu[0] == doctest::Approx(3.0 * h - 0.2).epsilon(1e-14));
  CHECK(enc.logvar[0] == doctest::Approx(-h + 0.05).epsilon(1e-14));

  VectorXd z(1);
  z << -0.6;
  const double g = std::tanh(0.7 * -0.6 - 0.4 * 0.4 + 0.3 * 0.8 + 0.2);
  const auto out = decode(m, z, c);
  CHECK(out[0] == doctest::Approx(1.5 * g + 0.25).epsilon(1e-14));
  CHECK(out[1] == doctest::Approx(-2.0 * g + 0.5).epsilon(1e-14));
  CHECK(decode(m, z, c) == out);
}

TEST_CASE("reparameterize") {
  VectorXd mu(3);
  mu << 0.5, -1.0, 2.0;
  CHECK(reparameterize(mu, VectorXd::Zero(3), VectorXd::Zero(3)) == mu);
  CHECK(reparameterize(mu, VectorXd::Zero(3), VectorXd::Ones(3)).isApprox((mu.array() + 1.0).matrix()));
  const VectorXd lv = VectorXd::Constant(3, 2.0 * std::log(3.0));
  CHECK(reparameterize(mu, lv, VectorXd::Ones(3)).isApprox((mu.array() + 3.0).matrix(), 1e-14));
  CHECK_THROWS_AS(reparameterize(mu, VectorXd::Zero(2), VectorXd::Zero(3)), Error);
}

TEST_CASE("reparameterize statistics over 1e5 draws") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n01;
  const int dims = 4;
  const int draws = 100000;
  VectorXd sum = VectorXd::Zero(dims), sq = VectorXd::Zero(dims);
  for (int i = 0; i < draws; ++i) {
    VectorXd eps(dims);
    for (auto &e : eps) e = n01(rng);
    const auto z = reparameterize(VectorXd::Zero(dims), VectorXd::Zero(dims), eps);
    sum += z;
    sq += z.cwiseProduct(z);
  }
  for (int d = 0; d < dims; ++d) {
    const double mean = sum[d] / draws;
    const double var = sq[d] / draws - mean * mean;
    CHECK(std::abs(mean) <= 0.02);
    CHECK(var >= 0.97);
    CHECK(var <= 1.03);
  }
}

TEST_CASE("elbo_loss values") {
  const VectorXd x = VectorXd::LinSpaced(4, 0.0, 1.0);
  auto t = elbo_loss(x, x, VectorXd::Zero(2), VectorXd::Zero(2), 0.5);
  CHECK(t.total == 0.0);
  CHECK(t.recon == 0.0);
  CHECK(t.kl == 0.0);

  t = elbo_loss(x, x, VectorXd::Ones(1), VectorXd::Zero(1), 1.0);
  CHECK(t.kl == doctest::Approx(0.5));

  const double ln4 = std::log(4.0);
  t = elbo_loss(x, x, VectorXd::Zero(1), VectorXd::Constant(1, ln4), 1.0);
  CHECK(t.kl == doctest::Approx(0.5 * (4.0 - 1.0 - ln4)));
  CHECK(std::abs(t.kl - 0.8069) < 1e-4);

  VectorXd x_hat = x;
  x_hat[1] += 2.0;
  t = elbo_loss(x, x_hat, VectorXd::Ones(1), VectorXd::Zero(1), 0.1);
  CHECK(t.recon == doctest::Approx(1.0));  // 4 / 4 coefficients
  CHECK(t.total == doctest::Approx(1.0 + 0.1 * 0.5));
  CHECK_THROWS_AS(elbo_loss(x, VectorXd::Zero(3), VectorXd::Zero(1), VectorXd::Zero(1), 1.0), Error);
}

TEST_CASE("kl is nonnegative and zero only at the prior") {
  std::mt19937_64 rng(5);
  const VectorXd x = VectorXd::Zero(2);
  for (int i = 0; i < 2000; ++i) {
    const auto mu = random_vector(rng, 3, 2.0);
    const auto lv = random_vector(rng, 3, 3.0);
    CHECK(elbo_loss(x, x, mu, lv, 1.0).kl > 0.0);
  }
  CHECK(elbo_loss(x, x, VectorXd::Zero(3), VectorXd::Zero(3), 1.0).kl == 0.0);
}

TEST_CASE("grad_check on 20 random tiny models") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto m = CvaeModel::initialize(tiny_config(seed));
    std::mt19937_64 rng(seed * 7919);
    const TrainingSample s{random_vector(rng, 4), build_condition(40 + static_cast<int>(seed), 90)};
    const auto r = grad_check(m, s, random_vector(rng, 2));
    CAPTURE(seed);
    CHECK(r.max_relative_error <= 1e-4);
  }
}

TEST_CASE("grad_check: identity activations are exact to 1e-7") {
  auto cfg = tiny_config(3);
  cfg.activation = Activation::kIdentity;
  const auto m = CvaeModel::initialize(cfg);
  std::mt19937_64 rng(99);
  const TrainingSample s{random_vector(rng, 4), build_condition(60, 100)};
  const auto r = grad_check(m, s, random_vector(rng, 2));
  CHECK(r.max_absolute_error <= 1e-7);
}

TEST_CASE("gradient of the output bias in a zero network") {
  CvaeModel m(tiny_config());
  const auto &out = m.decoder_layers().back();
  std::vector<double> b{0.5, -1.0, 0.25, 2.0};
  for (int i = 0; i < 4; ++i) m.parameters()[out.bias_offset + i] = b[i];
  const TrainingSample s{VectorXd::Zero(4), build_condition(60, 100)};
  std::vector<double> grad(m.num_parameters());
  loss_and_gradient(m, s, VectorXd::Zero(2), grad);
  // recon = mean((b - 0)^2) => d/db_i = 2 b_i / 4
  for (int i = 0; i < 4; ++i) CHECK(grad[out.bias_offset + i] == doctest::Approx(b[i] / 2.0));
  CHECK(grad_check(m, s, VectorXd::Zero(2)).max_relative_error <= 1e-4);
}

TEST_CASE("batch_gradient: parallel equals serial bit for bit") {
  const auto m = CvaeModel::initialize(CvaeConfig{});
  std::mt19937_64 rng(8);
  std::vector<TrainingSample> batch;
  std::vector<VectorXd> eps;
  for (int i = 0; i < 37; ++i) {
    batch.push_back({random_vector(rng, 32), build_condition(50 + i, 80)});
    eps.push_back(random_vector(rng, 8));
  }
  std::vector<double> g1(m.num_parameters()), g2(m.num_parameters());
  const auto a = batch_gradient(m, batch, eps, g1);
  const auto b = batch_gradient_serial(m, batch, eps, g2);
  CHECK(a.total == b.total);
  CHECK(g1 == g2);
}

std::vector<CepstralFrame> small_training_set() { return synthetic_cc_frames(120, 6, 4); }

CvaeConfig small_train_config() {
  CvaeConfig cfg;
  cfg.input_dim = 6;
  cfg.latent_dim = 2;
  cfg.hidden_dims = {16};
  cfg.epochs = 30;
  cfg.batch_size = 16;
  cfg.learning_rate = 3e-3;
  return cfg;
}

TEST_CASE("train: epochs = 0 leaves the initialisation untouched") {
  auto cfg = small_train_config();
  cfg.epochs = 0;
  const auto r = train(small_training_set(), cfg);
  CHECK(r.report.epoch_loss.empty());
  CHECK(r.report.steps == 0);
  const auto init = CvaeModel::initialize(cfg);
  CHECK(std::equal(init.parameters().begin(), init.parameters().end(), r.model.parameters().begin()));
}

TEST_CASE("train: deterministic and loss decreasing") {
  const auto data = small_training_set();
  const auto a = train(data, small_train_config());
  const auto b = train(data, small_train_config());
  CHECK(a.report.checksum == b.report.checksum);
  REQUIRE(a.report.epoch_loss.size() == b.report.epoch_loss.size());
  for (std::size_t i = 0; i < a.report.epoch_loss.size(); ++i) {
    CHECK(a.report.epoch_loss[i].total == b.report.epoch_loss[i].total);
  }
  CHECK(a.report.final.total < a.report.initial.total);
  CHECK(a.model.trained_pitches().front() >= 48);
  CHECK(a.model.trained_pitches().back() <= 72);

  auto other = small_train_config();
  other.seed = 2;
  CHECK(train(data, other).report.checksum != a.report.checksum);
}

TEST_CASE("train: errors") {
  CHECK_THROWS_AS(train({}, small_train_config()), Error);
  auto cfg = small_train_config();
  cfg.input_dim = 5;
  CHECK_THROWS_AS(train(small_training_set(), cfg), Error);
  cfg = small_train_config();
  cfg.learning_rate = 1e300;
  CHECK_THROWS_WITH_AS(train(small_training_set(), cfg), doctest::Contains("non-finite"), Error);
}

TEST_CASE("conditioning sensitivity after training") {
  const auto r = train(small_training_set(), small_train_config());
  const VectorXd z = VectorXd::Zero(2);
  const auto low = decode(r.model, z, build_condition(50, 100));
  const auto high = decode(r.model, z, build_condition(70, 100));
  CHECK((low - high).norm() > 1e-3);
}

TEST_CASE("model file round trip") {
  testing::TempDir dir;
  auto m = train(small_training_set(), small_train_config()).model;
  save_model(m, dir / "m.cvae");
  const auto back = load_model(dir / "m.cvae");
  CHECK(std::equal(m.parameters().begin(), m.parameters().end(), back.parameters().begin(),
                   back.parameters().end()));
  CHECK(back.cc_mean() == m.cc_mean());
  CHECK(back.cc_std() == m.cc_std());
  CHECK(back.trained_pitches() == m.trained_pitches());
  CHECK(back.config().hidden_dims == m.config().hidden_dims);
  CHECK(back.config().beta == m.config().beta);
  CHECK(back.checksum() == m.checksum());
  CHECK(serialize_model(back) == serialize_model(m));
}

TEST_CASE("model file errors") {
  const auto bytes = serialize_model(CvaeModel::initialize(tiny_config()));

  auto versioned = bytes;
  versioned[4] = 9;
  CHECK_THROWS_WITH_AS(deserialize_model(versioned), doctest::Contains("expected 1"), Error);
  CHECK_THROWS_WITH_AS(deserialize_model(versioned), doctest::Contains("version 9"), Error);

  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
    std::vector<std::uint8_t> truncated(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    CAPTURE(cut);
    CHECK_THROWS_AS(deserialize_model(truncated), Error);
  }

  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x40;
  CHECK_THROWS_AS(deserialize_model(flipped), Error);

  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(deserialize_model(trailing), Error);

  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_WITH_AS(deserialize_model(magic), doctest::Contains("magic"), Error);

  CHECK_THROWS_AS(load_model("/nonexistent/model.cvae"), Error);
}

}  // namespace
}  // namespace cepvae
