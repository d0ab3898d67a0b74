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

#ifndef CEPVAE_CVAE_H_
#define CEPVAE_CVAE_H_

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cepvae/common.h"
#include "cepvae/source_filter.h"

namespace cepvae {

// pitch_norm = (pitch - 21) / 87, velocity_norm = velocity / 127.
struct ConditionVector {
  double pitch_norm = 0.0;
  double velocity_norm = 0.0;
};

ConditionVector build_condition(int midi_pitch, int velocity);
// Real-valued pitch, for sweeps between semitones.
ConditionVector build_condition(double midi_pitch, int velocity);

enum class Activation : std::uint32_t { kTanh = 0, kIdentity = 1 };

struct CvaeConfig {
  int input_dim = 32;
  int latent_dim = 8;
  std::vector<int> hidden_dims{64, 32};  // encoder order; the decoder mirrors it
  double beta = 0.01;
  double learning_rate = 1e-3;
  int batch_size = 64;
  int epochs = 200;
  std::uint64_t seed = 1;
  Activation activation = Activation::kTanh;

  void validate() const;
};

// Location of one fully connected layer inside the flat parameter vector.
// Weights are row-major, out x in.
struct DenseLayout {
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
  int in = 0;
  int out = 0;
};

class CvaeModel {
 public:
  // All parameters zero, identity normalisation.
  explicit CvaeModel(const CvaeConfig &cfg);
  // Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero, seeded by cfg.seed.
  static CvaeModel initialize(const CvaeConfig &cfg);

  const CvaeConfig &config() const { return config_; }
  int input_dim() const { return config_.input_dim; }
  int latent_dim() const { return config_.latent_dim; }

  std::span<const double> parameters() const { return params_; }
  std::span<double> parameters() { return params_; }
  std::size_t num_parameters() const { return params_.size(); }

  // Encoder: hidden layers, then the two linear heads. Decoder: hidden
  // layers followed by the linear output layer (last element).
  const std::vector<DenseLayout> &encoder_layers() const { return encoder_; }
  const DenseLayout &mu_head() const { return mu_head_; }
  const DenseLayout &logvar_head() const { return logvar_head_; }
  const std::vector<DenseLayout> &decoder_layers() const { return decoder_; }

  // Per-coefficient z-score statistics of the training CCs.
  const std::vector<double> &cc_mean() const { return cc_mean_; }
  const std::vector<double> &cc_std() const { return cc_std_; }
  void set_normalization(std::vector<double> mean, std::vector<double> std_dev);
  Eigen::VectorXd normalize(std::span<const double> ccs) const;
  std::vector<double> denormalize(const Eigen::VectorXd &x) const;

  // MIDI pitches seen in training (sorted, unique).
  const std::vector<int> &trained_pitches() const { return trained_pitches_; }
  void set_trained_pitches(std::vector<int> pitches) { trained_pitches_ = std::move(pitches); }

  // FNV-1a over parameters and normalisation statistics.
  std::uint64_t checksum() const;

 private:
  CvaeConfig config_;
  std::vector<DenseLayout> encoder_;
  DenseLayout mu_head_;
  DenseLayout logvar_head_;
  std::vector<DenseLayout> decoder_;
  std::vector<double> params_;
  std::vector<double> cc_mean_;
  std::vector<double> cc_std_;
  std::vector<int> trained_pitches_;
};

struct EncoderOutput {
  Eigen::VectorXd mu;
  Eigen::VectorXd logvar;
};

EncoderOutput encode(const CvaeModel &m, const Eigen::VectorXd &x, ConditionVector c);
// z = mu + exp(logvar / 2) * eps
Eigen::VectorXd reparameterize(const Eigen::VectorXd &mu, const Eigen::VectorXd &logvar,
                               const Eigen::VectorXd &eps);
Eigen::VectorXd decode(const CvaeModel &m, const Eigen::VectorXd &z, ConditionVector c);

struct ElboTerms {
  double total = 0.0;
  double recon = 0.0;  // mean squared error over coefficients
  double kl = 0.0;     // KL(N(mu, exp(logvar)) || N(0, I))
};

ElboTerms elbo_loss(const Eigen::VectorXd &x, const Eigen::VectorXd &x_hat, const Eigen::VectorXd &mu,
                    const Eigen::VectorXd &logvar, double beta);

struct TrainingSample {
  Eigen::VectorXd x;  // normalised CCs
  ConditionVector condition;
};

// Loss of one sample for a fixed noise draw, and its gradient with respect to
// every parameter (written to `grad`, which must have num_parameters() entries).
ElboTerms loss_and_gradient(const CvaeModel &m, const TrainingSample &sample, const Eigen::VectorXd &eps,
                            std::span<double> grad);
ElboTerms sample_loss(const CvaeModel &m, const TrainingSample &sample, const Eigen::VectorXd &eps);

// Batch-mean loss and gradient. Per-sample passes run in parallel (OpenMP);
// the reduction sums samples in index order, so the result is bitwise
// identical to batch_gradient_serial().
ElboTerms batch_gradient(const CvaeModel &m, std::span<const TrainingSample> batch,
                         std::span<const Eigen::VectorXd> eps, std::span<double> grad);
ElboTerms batch_gradient_serial(const CvaeModel &m, std::span<const TrainingSample> batch,
                                std::span<const Eigen::VectorXd> eps, std::span<double> grad);

struct GradCheckResult {
  // |analytic - numeric| / max(|analytic|, |numeric|, 1e-6); the floor keeps
  // round-off on near-zero gradients from dominating.
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::size_t worst_parameter = 0;
};

// Analytic gradient against central differences for every parameter.
GradCheckResult grad_check(const CvaeModel &m, const TrainingSample &sample, const Eigen::VectorXd &eps,
                           double step = 1e-5);

struct TrainReport {
  ElboTerms initial;                   // full-data loss before the first update
  ElboTerms final;                     // full-data loss after the last update, same noise draws
  std::vector<ElboTerms> epoch_loss;   // mean over each epoch's minibatches
  std::size_t steps = 0;
  double wall_seconds = 0.0;
  std::uint64_t checksum = 0;
};

struct TrainResult {
  CvaeModel model;
  TrainReport report;
};

// Adam on minibatches of z-scored CCs. Identical (data, cfg) give identical
// weights. Throws on empty data, a coefficient count different from
// cfg.input_dim, or a non-finite loss.
TrainResult train(std::span<const CepstralFrame> data, const CvaeConfig &cfg);

// Builds normalised samples with the model's statistics.
std::vector<TrainingSample> make_samples(const CvaeModel &m, std::span<const CepstralFrame> data);

inline constexpr std::uint32_t kModelFormatVersion = 1;

// Versioned little-endian binary container; layout in docs/model_format.md.
void save_model(const CvaeModel &m, const std::filesystem::path &path);
CvaeModel load_model(const std::filesystem::path &path);
std::vector<std::uint8_t> serialize_model(const CvaeModel &m);
CvaeModel deserialize_model(std::span<const std::uint8_t> bytes, const std::string &origin = "<memory>");

}  // namespace cepvae

#endif  // CEPVAE_CVAE_H_
