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

#include "cepvae/experiments.h"
#include "cepvae/synthesis.h"
#include "cepvae/synthetic.h"
#include "doctest.h"

namespace cepvae {
namespace {

using Eigen::VectorXd;

HarmonicFrame single_partial(double freq, double amp) {
  HarmonicFrame f;
  f.f0_hz = freq;
  f.harmonics = {{freq, amp}};
  return f;
}

double rms(const Waveform &w) {
  double acc = 0.0;
  for (double x : w.samples) acc += x * x;
  return std::sqrt(acc / static_cast<double>(w.size()));
}

// Small model trained on pitch-dependent synthetic CCs, shared by the tests.
const CvaeModel &toy_model() {
  static const CvaeModel model = [] {
    CvaeConfig cfg;
    cfg.input_dim = 8;
    cfg.latent_dim = 2;
    cfg.hidden_dims = {16};
    cfg.epochs = 40;
    cfg.batch_size = 16;
    cfg.learning_rate = 3e-3;
    return train(synthetic_cc_frames(150, 8, 9), cfg).model;
  }();
  return model;
}

TEST_CASE("additive_synthesis: steady unit sine") {
  const std::vector<HarmonicFrame> frames(100, single_partial(1000.0, 1.0));
  const auto w = additive_synthesis(frames, 160, 16000);
  REQUIRE(w.size() == 16000);
  CHECK(std::abs(rms(w) - std::sqrt(0.5)) <= 0.001);
  CHECK(w.samples[0] == 0.0);
  CHECK(w.samples[4] == doctest::Approx(std::sin(2.0 * M_PI * 1000.0 * 4 / 16000.0)));
}

TEST_CASE("additive_synthesis: silence, empty input and Nyquist muting") {
  const std::vector<HarmonicFrame> quiet(10, single_partial(440.0, 0.0));
  const auto w = additive_synthesis(quiet, 160, 16000);
  CHECK(std::all_of(w.samples.begin(), w.samples.end(), [](double x) { return x == 0.0; }));
  CHECK_THROWS_AS(additive_synthesis(std::vector<HarmonicFrame>{}, 160, 16000), Error);
  const std::vector<HarmonicFrame> high(4, single_partial(8000.0, 1.0));
  const auto muted = additive_synthesis(high, 160, 16000);
  CHECK(std::all_of(muted.samples.begin(), muted.samples.end(), [](double x) { return x == 0.0; }));
}

TEST_CASE("additive_synthesis: no jump beyond the slope bound") {
  std::vector<HarmonicFrame> frames;
  for (int i = 0; i < 60; ++i) {
    HarmonicFrame f;
    f.f0_hz = 200.0 + 5.0 * i;
    for (int k = 1; k <= 6; ++k) f.harmonics.push_back({k * f.f0_hz, 0.3 / k * (1.0 + 0.5 * std::sin(i * 0.3))});
    frames.push_back(f);
  }
  const auto w = additive_synthesis(frames, 160, 16000);
  // |d/dn sum a_k sin(phi_k)| <= sum a_k * 2 pi f_k / fs, over the largest values seen.
  double bound = 0.0;
  for (int k = 1; k <= 6; ++k) bound += 0.45 / k * 2.0 * M_PI * k * (200.0 + 5.0 * 59) / 16000.0;
  double worst = 0.0;
  for (std::size_t i = 1; i < w.size(); ++i) worst = std::max(worst, std::abs(w.samples[i] - w.samples[i - 1]));
  CHECK(worst <= bound);
}

TEST_CASE("additive_synthesis: options") {
  const std::vector<HarmonicFrame> frames(3, single_partial(500.0, 0.5));
  SynthesisOptions opts;
  opts.num_samples = 1000;
  CHECK(additive_synthesis(frames, opts).size() == 1000);
  opts.phase_mode = PhaseMode::kRandom;
  opts.phase_seed = 4;
  const auto a = additive_synthesis(frames, opts);
  CHECK(a.samples == additive_synthesis(frames, opts).samples);
  CHECK(a.samples[0] != 0.0);
}

TEST_CASE("normalize_peak") {
  Waveform w;
  w.samples = {0.1, -0.4, 0.2};
  normalize_peak(w, -3.0);
  CHECK(std::abs(w.samples[1]) == doctest::Approx(std::pow(10.0, -3.0 / 20.0)));
  Waveform z;
  z.samples = {0.0, 0.0};
  normalize_peak(z);
  CHECK(z.samples[0] == 0.0);
}

TEST_CASE("generate_note") {
  const auto &m = toy_model();
  SynthesisRequest req;
  req.duration_s = 0.5;
  req.z = VectorXd::Zero(2);
  const auto w = generate_note(m, req);
  CHECK(w.size() == 8000);
  double peak = 0.0;
  for (double x : w.samples) peak = std::max(peak, std::abs(x));
  CHECK(peak == doctest::Approx(std::pow(10.0, -3.0 / 20.0)));
  CHECK(generate_note(m, req).samples == w.samples);

  SynthesisRequest seeded;
  seeded.seed = 17;
  seeded.duration_s = 0.2;
  CHECK(generate_note(m, seeded).samples == generate_note(m, seeded).samples);

  req.velocity = 200;
  CHECK_THROWS_AS(generate_note(m, req), Error);
  req.velocity = 100;
  req.f0_hz = 9000.0;
  CHECK_THROWS_AS(generate_note(m, req), Error);
  req.f0_hz.reset();
  req.duration_s = 0.0;
  CHECK_THROWS_AS(generate_note(m, req), Error);
}

TEST_CASE("generate_note: pitch changes the envelope for a fixed z") {
  const auto &m = toy_model();
  const VectorXd z = VectorXd::Zero(2);
  const auto a = decoded_envelope_grid(m, z, build_condition(60, 100));
  const auto b = decoded_envelope_grid(m, z, build_condition(72, 100));
  CHECK(log_spectral_distance(a, b) > 0.01);
}

TEST_CASE("sweep") {
  SweepSpec spec;
  const auto p = sweep_pitches(spec);
  REQUIRE(p.size() == 24);
  for (std::size_t i = 1; i < p.size(); ++i) {
    CHECK(midi_to_hz(p[i]) / midi_to_hz(p[i - 1]) == doctest::Approx(std::pow(2.0, 0.5 / 12.0)));
  }
  SweepSpec two{60.0, 62.0, 2, 0.1};
  const auto w = pitch_sweep(toy_model(), two, VectorXd::Zero(2), 100);
  CHECK(w.size() == 3200);
  CHECK_THROWS_AS(sweep_pitches(SweepSpec{60.0, 72.0, 1, 0.1}), Error);
  CHECK_THROWS_AS(sweep_pitches(SweepSpec{60.0, 60.0, 4, 0.1}), Error);
  CHECK_THROWS_AS(pitch_sweep(toy_model(), SweepSpec{100.0, 130.0, 4, 0.1}, VectorXd::Zero(2), 100), Error);
}

TEST_CASE("interpolate_timbre endpoints") {
  const auto &m = toy_model();
  VectorXd za(2), zb(2);
  za << 0.3, -0.7;
  zb << -1.1, 0.4;
  CHECK(blend_latents(za, zb, 0.0) == za);
  CHECK(blend_latents(za, zb, 1.0) == zb);
  CHECK(blend_latents(za, zb, 0.5).isApprox(0.5 * (za + zb)));
  CHECK_THROWS_AS(blend_latents(za, zb, 1.5), Error);
  CHECK_THROWS_AS(blend_latents(za, zb, -0.1), Error);

  SynthesisRequest req;
  req.midi_pitch = 62;
  req.z = za;
  CHECK(interpolate_timbre(m, za, zb, 0.0, 62, 100).samples == generate_note(m, req).samples);
  req.z = zb;
  CHECK(interpolate_timbre(m, za, zb, 1.0, 62, 100).samples == generate_note(m, req).samples);
}

TEST_CASE("log_spectral_distance") {
  const std::vector<double> a{1.0, -2.0, 3.5, 0.0};
  std::vector<double> b = a;
  CHECK(log_spectral_distance(a, b) == 0.0);
  for (double &x : b) x += 6.0;
  CHECK(log_spectral_distance(a, b) == 6.0);
  const std::vector<double> c{0.0, 1.0, 2.0, -4.0};
  CHECK(log_spectral_distance(a, c) == log_spectral_distance(c, a));
  CHECK_THROWS_AS(log_spectral_distance(a, std::vector<double>{1.0}), Error);
}

TEST_CASE("eval_holdout: nothing held out when every pitch was trained") {
  const auto frames = synthetic_cc_frames(150, 8, 9);
  const auto report = eval_holdout(toy_model(), frames);
  CHECK(report.rows.empty());
  CHECK(report.to_json().find("\"held_out\": []") != std::string::npos);
}

TEST_CASE("eval_holdout: held-out rows and degenerate input") {
  auto frames = synthetic_cc_frames(150, 8, 9);
  CvaeModel m = toy_model();
  std::vector<int> odd;
  for (int p : m.trained_pitches())
    if (p % 2) odd.push_back(p);
  m.set_trained_pitches(odd);
  const auto report = eval_holdout(m, frames);
  CHECK_FALSE(report.rows.empty());
  for (const auto &row : report.rows) {
    CHECK(row.midi_pitch % 2 == 0);
    CHECK((row.lsd_truth_below || row.lsd_truth_above));
  }

  std::vector<CepstralFrame> single;
  for (const auto &f : frames)
    if (f.midi_pitch == frames.front().midi_pitch) single.push_back(f);
  CHECK_THROWS_WITH_AS(eval_holdout(m, single), doctest::Contains("no adjacent pitches"), Error);
  CHECK_THROWS_AS(eval_holdout(m, {}), Error);
}

TEST_CASE("mean_ccs_by_condition and posterior_mean") {
  std::vector<CepstralFrame> frames(2);
  frames[0].midi_pitch = frames[1].midi_pitch = 60;
  frames[0].velocity = frames[1].velocity = 100;
  frames[0].ccs.assign(8, 1.0);
  frames[1].ccs.assign(8, 3.0);
  const auto means = mean_ccs_by_condition(frames);
  REQUIRE(means.size() == 1);
  CHECK(means.at({60, 100}) == std::vector<double>(8, 2.0));
  CHECK(posterior_mean(toy_model(), frames).size() == 2);
}

}  // namespace
}  // namespace cepvae
