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

#include "cepvae/cvae.h"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "cepvae/dataset.h"
#include "cepvae/parallel.h"

namespace cepvae {
namespace {

using Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstVectorMap = Eigen::Map<const VectorXd>;
using VectorMap = Eigen::Map<VectorXd>;

constexpr double kGradCheckFloor = 1e-6;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEpsilon = 1e-8;

ConstMatrixMap weights(std::span<const double> p, const DenseLayout &l) {
  return ConstMatrixMap(p.data() + l.weight_offset, l.out, l.in);
}
ConstVectorMap bias(std::span<const double> p, const DenseLayout &l) {
  return ConstVectorMap(p.data() + l.bias_offset, l.out);
}
MatrixMap weights(std::span<double> p, const DenseLayout &l) {
  return MatrixMap(p.data() + l.weight_offset, l.out, l.in);
}
VectorMap bias(std::span<double> p, const DenseLayout &l) { return VectorMap(p.data() + l.bias_offset, l.out); }

VectorXd affine(std::span<const double> p, const DenseLayout &l, const VectorXd &in) {
  return weights(p, l) * in + bias(p, l);
}

void activate(VectorXd &v, Activation a) {
  if (a == Activation::kTanh) v = v.array().tanh().matrix();
}

// d(act)/d(pre) expressed through the activation output.
VectorXd activation_slope(const VectorXd &out, Activation a) {
  if (a == Activation::kTanh) return (1.0 - out.array().square()).matrix();
  return VectorXd::Ones(out.size());
}

VectorXd with_condition(const VectorXd &v, ConditionVector c) {
  VectorXd out(v.size() + 2);
  out.head(v.size()) = v;
  out[v.size()] = c.pitch_norm;
  out[v.size() + 1] = c.velocity_norm;
  return out;
}

// Activations kept for the backward pass.
struct ForwardPass {
  std::vector<VectorXd> enc;  // enc[0] = [x; c], enc[i] = output of hidden layer i
  VectorXd mu;
  VectorXd logvar;
  VectorXd z;
  std::vector<VectorXd> dec;  // dec[0] = [z; c], dec[i] = output of hidden layer i
  VectorXd x_hat;
};

ForwardPass forward(const CvaeModel &m, const TrainingSample &s, const VectorXd &eps) {
  const auto p = m.parameters();
  const auto act = m.config().activation;
  ForwardPass f;
  f.enc.push_back(with_condition(s.x, s.condition));
  for (const auto &layer : m.encoder_layers()) {
    VectorXd h = affine(p, layer, f.enc.back());
    activate(h, act);
    f.enc.push_back(std::move(h));
  }
  f.mu = affine(p, m.mu_head(), f.enc.back());
  f.logvar = affine(p, m.logvar_head(), f.enc.back());
  f.z = reparameterize(f.mu, f.logvar, eps);
  f.dec.push_back(with_condition(f.z, s.condition));
  const auto &layers = m.decoder_layers();
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
    VectorXd h = affine(p, layers[i], f.dec.back());
    activate(h, act);
    f.dec.push_back(std::move(h));
  }
  f.x_hat = affine(p, layers.back(), f.dec.back());
  return f;
}

// Accumulates d(loss)/d(params) for one affine layer and returns the gradient
// with respect to its input.
VectorXd backprop_affine(std::span<const double> p, std::span<double> grad, const DenseLayout &l,
                         const VectorXd &input, const VectorXd &g_out) {
  weights(grad, l).noalias() += g_out * input.transpose();
  bias(grad, l) += g_out;
  return weights(p, l).transpose() * g_out;
}

void check_sizes(const CvaeModel &m, const TrainingSample &s, const VectorXd &eps) {
  if (s.x.size() != m.input_dim()) {
    throw Error("input has " + std::to_string(s.x.size()) + " coefficients, model expects " +
                std::to_string(m.input_dim()));
  }
  if (eps.size() != m.latent_dim()) throw Error("noise draw length differs from latent_dim");
}

std::uint64_t fnv1a(std::uint64_t h, std::span<const double> values) {
  for (double v : values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

class Adam {
 public:
  Adam(std::size_t n, double lr) : lr_(lr), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = kAdamBeta1 * m_[i] + (1.0 - kAdamBeta1) * grad[i];
      v_[i] = kAdamBeta2 * v_[i] + (1.0 - kAdamBeta2) * grad[i] * grad[i];
      params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + kAdamEpsilon);
    }
  }

 private:
  double lr_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t t_ = 0;
};

VectorXd standard_normal(std::mt19937_64 &rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

}  // namespace

ConditionVector build_condition(int midi_pitch, int velocity) {
  return build_condition(static_cast<double>(midi_pitch), velocity);
}

ConditionVector build_condition(double midi_pitch, int velocity) {
  if (!(midi_pitch >= kMinMidiPitch && midi_pitch <= kMaxMidiPitch)) {
    throw Error("pitch " + std::to_string(midi_pitch) + " outside [" + std::to_string(kMinMidiPitch) + ", " +
                std::to_string(kMaxMidiPitch) + "]");
  }
  if (velocity < kMinVelocity || velocity > kMaxVelocity) {
    throw Error("velocity " + std::to_string(velocity) + " outside [" + std::to_string(kMinVelocity) + ", " +
                std::to_string(kMaxVelocity) + "]");
  }
  return {(midi_pitch - kMinMidiPitch) / static_cast<double>(kMaxMidiPitch - kMinMidiPitch),
          velocity / static_cast<double>(kMaxVelocity)};
}

void CvaeConfig::validate() const {
  if (input_dim < 1) throw Error("input_dim must be positive");
  if (latent_dim < 1) throw Error("latent_dim must be positive");
  for (int h : hidden_dims) {
    if (h < 1) throw Error("hidden layer sizes must be positive");
  }
  if (!(beta >= 0.0)) throw Error("beta must be non-negative");
  if (!(learning_rate > 0.0)) throw Error("learning rate must be positive");
  if (batch_size < 1) throw Error("batch_size must be positive");
  if (epochs < 0) throw Error("epochs must be non-negative");
}

CvaeModel::CvaeModel(const CvaeConfig &cfg) : config_(cfg) {
  config_.validate();
  std::size_t offset = 0;
  auto add = [&offset](int in, int out) {
    DenseLayout l{offset, offset + static_cast<std::size_t>(in) * out, in, out};
    offset = l.bias_offset + out;
    return l;
  };
  int width = cfg.input_dim + 2;
  for (int h : cfg.hidden_dims) {
    encoder_.push_back(add(width, h));
    width = h;
  }
  mu_head_ = add(width, cfg.latent_dim);
  logvar_head_ = add(width, cfg.latent_dim);
  width = cfg.latent_dim + 2;
  for (auto it = cfg.hidden_dims.rbegin(); it != cfg.hidden_dims.rend(); ++it) {
    decoder_.push_back(add(width, *it));
    width = *it;
  }
  decoder_.push_back(add(width, cfg.input_dim));
  params_.assign(offset, 0.0);
  cc_mean_.assign(cfg.input_dim, 0.0);
  cc_std_.assign(cfg.input_dim, 1.0);
}

CvaeModel CvaeModel::initialize(const CvaeConfig &cfg) {
  CvaeModel m(cfg);
  std::mt19937_64 rng(cfg.seed);
  auto init = [&](const DenseLayout &l) {
    const double limit = std::sqrt(6.0 / (l.in + l.out));
    std::uniform_real_distribution<double> uniform(-limit, limit);
    auto w = weights(std::span<double>(m.params_), l);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = uniform(rng);
  };
  for (const auto &l : m.encoder_) init(l);
  init(m.mu_head_);
  init(m.logvar_head_);
  for (const auto &l : m.decoder_) init(l);
  return m;
}

void CvaeModel::set_normalization(std::vector<double> mean, std::vector<double> std_dev) {
  if (mean.size() != static_cast<std::size_t>(input_dim()) || std_dev.size() != mean.size()) {
    throw Error("normalisation statistics must have input_dim entries");
  }
  for (double s : std_dev) {
    if (!(s > 0.0) || !std::isfinite(s)) throw Error("normalisation std must be positive and finite");
  }
  cc_mean_ = std::move(mean);
  cc_std_ = std::move(std_dev);
}

VectorXd CvaeModel::normalize(std::span<const double> ccs) const {
  if (ccs.size() != static_cast<std::size_t>(input_dim())) {
    throw Error("frame has " + std::to_string(ccs.size()) + " coefficients, model expects " +
                std::to_string(input_dim()));
  }
  VectorXd x(input_dim());
  for (int i = 0; i < input_dim(); ++i) x[i] = (ccs[i] - cc_mean_[i]) / cc_std_[i];
  return x;
}

std::vector<double> CvaeModel::denormalize(const VectorXd &x) const {
  std::vector<double> ccs(input_dim());
  for (int i = 0; i < input_dim(); ++i) ccs[i] = x[i] * cc_std_[i] + cc_mean_[i];
  return ccs;
}

std::uint64_t CvaeModel::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a(h, params_);
  h = fnv1a(h, cc_mean_);
  return fnv1a(h, cc_std_);
}

EncoderOutput encode(const CvaeModel &m, const VectorXd &x, ConditionVector c) {
  if (x.size() != m.input_dim()) {
    throw Error("input has " + std::to_string(x.size()) + " coefficients, model expects " +
                std::to_string(m.input_dim()));
  }
  const auto p = m.parameters();
  VectorXd h = with_condition(x, c);
  for (const auto &layer : m.encoder_layers()) {
    h = affine(p, layer, h);
    activate(h, m.config().activation);
  }
  return {affine(p, m.mu_head(), h), affine(p, m.logvar_head(), h)};
}

VectorXd reparameterize(const VectorXd &mu, const VectorXd &logvar, const VectorXd &eps) {
  if (mu.size() != logvar.size() || mu.size() != eps.size()) {
    throw Error("reparameterize: mu, logvar and eps lengths differ");
  }
  return (mu.array() + (0.5 * logvar.array()).exp() * eps.array()).matrix();
}

VectorXd decode(const CvaeModel &m, const VectorXd &z, ConditionVector c) {
  if (z.size() != m.latent_dim()) {
    throw Error("latent vector has length " + std::to_string(z.size()) + ", model expects " +
                std::to_string(m.latent_dim()));
  }
  const auto p = m.parameters();
  const auto &layers = m.decoder_layers();
  VectorXd h = with_condition(z, c);
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
    h = affine(p, layers[i], h);
    activate(h, m.config().activation);
  }
  return affine(p, layers.back(), h);
}

ElboTerms elbo_loss(const VectorXd &x, const VectorXd &x_hat, const VectorXd &mu, const VectorXd &logvar,
                    double beta) {
  if (x.size() != x_hat.size() || x.size() == 0) throw Error("elbo_loss: x and x_hat lengths differ");
  if (mu.size() != logvar.size()) throw Error("elbo_loss: mu and logvar lengths differ");
  ElboTerms t;
  t.recon = (x_hat - x).squaredNorm() / static_cast<double>(x.size());
  t.kl = 0.5 * (mu.array().square() + logvar.array().exp() - 1.0 - logvar.array()).sum();
  t.total = t.recon + beta * t.kl;
  return t;
}

ElboTerms sample_loss(const CvaeModel &m, const TrainingSample &sample, const VectorXd &eps) {
  check_sizes(m, sample, eps);
  const auto f = forward(m, sample, eps);
  return elbo_loss(sample.x, f.x_hat, f.mu, f.logvar, m.config().beta);
}

ElboTerms loss_and_gradient(const CvaeModel &m, const TrainingSample &sample, const VectorXd &eps,
                            std::span<double> grad) {
  check_sizes(m, sample, eps);
  if (grad.size() != m.num_parameters()) throw Error("gradient buffer has the wrong size");
  std::fill(grad.begin(), grad.end(), 0.0);
  const auto p = m.parameters();
  const auto act = m.config().activation;
  const double beta = m.config().beta;
  const auto f = forward(m, sample, eps);
  const ElboTerms loss = elbo_loss(sample.x, f.x_hat, f.mu, f.logvar, beta);

  // Decoder: linear output, then hidden layers in reverse.
  const auto &dec = m.decoder_layers();
  VectorXd g = 2.0 * (f.x_hat - sample.x) / static_cast<double>(sample.x.size());
  g = backprop_affine(p, grad, dec.back(), f.dec.back(), g);
  for (std::size_t i = dec.size() - 1; i-- > 0;) {
    g = (g.array() * activation_slope(f.dec[i + 1], act).array()).matrix();
    g = backprop_affine(p, grad, dec[i], f.dec[i], g);
  }
  const VectorXd g_z = g.head(m.latent_dim());

  // Reparameterisation and KL.
  const VectorXd sigma = (0.5 * f.logvar.array()).exp().matrix();
  const VectorXd g_mu = g_z + beta * f.mu;
  const VectorXd g_logvar =
      (g_z.array() * eps.array() * 0.5 * sigma.array() + beta * 0.5 * (f.logvar.array().exp() - 1.0)).matrix();

  // Heads, then encoder hidden layers in reverse.
  const VectorXd &h = f.enc.back();
  VectorXd g_h = backprop_affine(p, grad, m.mu_head(), h, g_mu);
  g_h += backprop_affine(p, grad, m.logvar_head(), h, g_logvar);
  const auto &enc = m.encoder_layers();
  for (std::size_t i = enc.size(); i-- > 0;) {
    g_h = (g_h.array() * activation_slope(f.enc[i + 1], act).array()).matrix();
    g_h = backprop_affine(p, grad, enc[i], f.enc[i], g_h);
  }
  return loss;
}

namespace {

void check_batch(const CvaeModel &m, std::span<const TrainingSample> batch, std::span<const VectorXd> eps,
                 std::span<double> grad) {
  if (batch.empty()) throw Error("empty batch");
  if (eps.size() != batch.size()) throw Error("one noise draw per sample is required");
  if (grad.size() != m.num_parameters()) throw Error("gradient buffer has the wrong size");
}

ElboTerms mean_terms(std::span<const ElboTerms> terms) {
  ElboTerms sum;
  for (const auto &t : terms) {
    sum.total += t.total;
    sum.recon += t.recon;
    sum.kl += t.kl;
  }
  const double n = static_cast<double>(terms.size());
  return {sum.total / n, sum.recon / n, sum.kl / n};
}

}  // namespace

ElboTerms batch_gradient(const CvaeModel &m, std::span<const TrainingSample> batch, std::span<const VectorXd> eps,
                         std::span<double> grad) {
  check_batch(m, batch, eps, grad);
  const std::size_t n = m.num_parameters();
  const std::size_t count = batch.size();
  thread_local std::vector<double> per_sample;
  per_sample.resize(count * n);
  std::vector<ElboTerms> terms(count);
  parallel_for(static_cast<long>(count), [&](long s) {
    terms[s] = loss_and_gradient(m, batch[s], eps[s], std::span<double>(per_sample).subspan(s * n, n));
  });
  // Parallel over parameter blocks; each parameter still sums samples in
  // index order, matching the serial reference bit for bit.
  constexpr std::size_t kBlock = 512;
  const double inv = 1.0 / static_cast<double>(count);
  parallel_for(static_cast<long>((n + kBlock - 1) / kBlock), [&](long b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = std::min(n, lo + kBlock);
    std::fill(grad.begin() + lo, grad.begin() + hi, 0.0);
    for (std::size_t s = 0; s < count; ++s) {
      const double *g = per_sample.data() + s * n;
      for (std::size_t i = lo; i < hi; ++i) grad[i] += g[i];
    }
    for (std::size_t i = lo; i < hi; ++i) grad[i] *= inv;
  });
  return mean_terms(terms);
}

ElboTerms batch_gradient_serial(const CvaeModel &m, std::span<const TrainingSample> batch,
                                std::span<const VectorXd> eps, std::span<double> grad) {
  check_batch(m, batch, eps, grad);
  const std::size_t n = m.num_parameters();
  std::vector<double> acc(n, 0.0);
  std::vector<double> g(n);
  std::vector<ElboTerms> terms;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    terms.push_back(loss_and_gradient(m, batch[s], eps[s], g));
    for (std::size_t i = 0; i < n; ++i) acc[i] += g[i];
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < n; ++i) grad[i] = acc[i] * inv;
  return mean_terms(terms);
}

GradCheckResult grad_check(const CvaeModel &m, const TrainingSample &sample, const VectorXd &eps, double step) {
  std::vector<double> analytic(m.num_parameters());
  loss_and_gradient(m, sample, eps, analytic);
  CvaeModel probe = m;
  auto params = probe.parameters();
  GradCheckResult result;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + step;
    const double up = sample_loss(probe, sample, eps).total;
    params[i] = saved - step;
    const double down = sample_loss(probe, sample, eps).total;
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double abs_err = std::abs(analytic[i] - numeric);
    const double rel_err = abs_err / std::max({std::abs(analytic[i]), std::abs(numeric), kGradCheckFloor});
    result.max_absolute_error = std::max(result.max_absolute_error, abs_err);
    if (rel_err > result.max_relative_error) {
      result.max_relative_error = rel_err;
      result.worst_parameter = i;
    }
  }
  return result;
}

std::vector<TrainingSample> make_samples(const CvaeModel &m, std::span<const CepstralFrame> data) {
  std::vector<TrainingSample> samples;
  samples.reserve(data.size());
  for (const auto &f : data) samples.push_back({m.normalize(f.ccs), build_condition(f.midi_pitch, f.velocity)});
  return samples;
}

TrainResult train(std::span<const CepstralFrame> data, const CvaeConfig &cfg) {
  cfg.validate();
  if (data.empty()) throw Error("training set is empty");
  const auto start = std::chrono::steady_clock::now();
  const int k = cfg.input_dim;
  for (const auto &f : data) {
    if (f.ccs.size() != static_cast<std::size_t>(k)) {
      throw Error("frame " + f.note_id + "/" + std::to_string(f.frame_index) + " has " +
                  std::to_string(f.ccs.size()) + " coefficients, config input_dim is " + std::to_string(k));
    }
  }

  TrainResult result{CvaeModel::initialize(cfg), {}};
  CvaeModel &model = result.model;

  std::vector<double> mean(k, 0.0), var(k, 0.0);
  for (const auto &f : data)
    for (int i = 0; i < k; ++i) mean[i] += f.ccs[i];
  for (double &v : mean) v /= static_cast<double>(data.size());
  for (const auto &f : data)
    for (int i = 0; i < k; ++i) var[i] += (f.ccs[i] - mean[i]) * (f.ccs[i] - mean[i]);
  std::vector<double> std_dev(k);
  for (int i = 0; i < k; ++i) {
    const double s = std::sqrt(var[i] / static_cast<double>(data.size()));
    std_dev[i] = s > 1e-12 ? s : 1.0;  // constant coefficient: centre only
  }
  model.set_normalization(std::move(mean), std::move(std_dev));
  std::set<int> pitches;
  for (const auto &f : data) pitches.insert(f.midi_pitch);
  model.set_trained_pitches({pitches.begin(), pitches.end()});

  const auto samples = make_samples(model, data);
  const std::size_t n = samples.size();

  // Same noise for both probes, so initial and final are comparable.
  const auto full_loss = [&] {
    std::mt19937_64 probe_rng(cfg.seed ^ 0x5DEECE66DULL);
    std::vector<ElboTerms> terms;
    terms.reserve(n);
    for (const auto &s : samples) terms.push_back(sample_loss(model, s, standard_normal(probe_rng, cfg.latent_dim)));
    return mean_terms(terms);
  };
  result.report.initial = full_loss();

  std::mt19937_64 rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  Adam adam(model.num_parameters(), cfg.learning_rate);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(model.num_parameters());
  std::vector<TrainingSample> batch;
  std::vector<VectorXd> eps;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
    ElboTerms sum;
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
      const std::size_t end = std::min(n, begin + static_cast<std::size_t>(cfg.batch_size));
      batch.clear();
      eps.clear();
      for (std::size_t i = begin; i < end; ++i) {
        batch.push_back(samples[order[i]]);
        eps.push_back(standard_normal(rng, cfg.latent_dim));
      }
      const ElboTerms loss = batch_gradient(model, batch, eps, grad);
      if (!std::isfinite(loss.total) ||
          !std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); })) {
        throw Error("non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                    std::to_string(result.report.steps) + " (recon " + std::to_string(loss.recon) + ", kl " +
                    std::to_string(loss.kl) + "); try a lower learning rate");
      }
      adam.step(model.parameters(), grad);
      ++result.report.steps;
      const double w = static_cast<double>(end - begin);
      sum.total += loss.total * w;
      sum.recon += loss.recon * w;
      sum.kl += loss.kl * w;
    }
    const double inv = 1.0 / static_cast<double>(n);
    result.report.epoch_loss.push_back({sum.total * inv, sum.recon * inv, sum.kl * inv});
  }

  result.report.final = full_loss();
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.report.checksum = model.checksum();
  return result;
}

}  // namespace cepvae
