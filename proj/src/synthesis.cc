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

#include "cepvae/synthesis.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace cepvae {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// (frequency, amplitude) of harmonic k in a frame, zero-padded past its end.
std::pair<double, double> partial(const HarmonicFrame &f, std::size_t k) {
  if (k < f.harmonics.size()) return {f.harmonics[k].freq_hz, f.harmonics[k].amp_linear};
  return {f.f0_hz * static_cast<double>(k + 1), 0.0};
}

void check_generation(const GenerationConfig &cfg) {
  if (cfg.hop <= 0) throw Error("synthesis hop must be positive");
  if (cfg.sample_rate_hz <= 0) throw Error("sample rate must be positive");
  if (cfg.max_harmonics < 1) throw Error("max_harmonics must be at least 1");
}

std::size_t duration_samples(double duration_s, int sample_rate_hz) {
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) throw Error("duration must be positive");
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
}

HarmonicFrame envelope_frame(const CvaeModel &m, const Eigen::VectorXd &z, double midi_pitch, int velocity,
                             double f0_hz, double gain_db, const GenerationConfig &cfg) {
  if (!(f0_hz > 0.0) || f0_hz >= cfg.sample_rate_hz / 2.0) {
    throw Error("f0 " + std::to_string(f0_hz) + " Hz must lie in (0, Nyquist)");
  }
  auto env = decoded_envelope(m, z, build_condition(midi_pitch, velocity));
  env.gain_db = gain_db;
  return harmonic_amps_from_envelope(env, f0_hz, cfg.max_harmonics, cfg.sample_rate_hz);
}

Waveform render(std::span<const HarmonicFrame> frames, std::size_t samples, const GenerationConfig &cfg) {
  SynthesisOptions opts;
  opts.hop = cfg.hop;
  opts.sample_rate_hz = cfg.sample_rate_hz;
  opts.num_samples = samples;
  opts.phase_mode = cfg.phase_mode;
  opts.phase_seed = cfg.phase_seed;
  auto w = additive_synthesis(frames, opts);
  if (cfg.normalize) normalize_peak(w, cfg.peak_dbfs);
  return w;
}

}  // namespace

Waveform additive_synthesis(std::span<const HarmonicFrame> frames, int hop, int sample_rate_hz) {
  SynthesisOptions opts;
  opts.hop = hop;
  opts.sample_rate_hz = sample_rate_hz;
  return additive_synthesis(frames, opts);
}

Waveform additive_synthesis(std::span<const HarmonicFrame> frames, const SynthesisOptions &opts) {
  if (frames.empty()) throw Error("additive_synthesis needs at least one frame");
  if (opts.hop <= 0) throw Error("synthesis hop must be positive");
  if (opts.sample_rate_hz <= 0) throw Error("sample rate must be positive");

  std::size_t partials = 0;
  for (const auto &f : frames) partials = std::max(partials, f.harmonics.size());
  const std::size_t n_frames = frames.size();
  // Row-major [frame][partial] tables.
  std::vector<double> freq(n_frames * partials), amp(n_frames * partials);
  for (std::size_t i = 0; i < n_frames; ++i) {
    for (std::size_t k = 0; k < partials; ++k) {
      std::tie(freq[i * partials + k], amp[i * partials + k]) = partial(frames[i], k);
    }
  }

  Waveform out;
  out.sample_rate_hz = opts.sample_rate_hz;
  out.samples.assign(opts.num_samples ? opts.num_samples : n_frames * opts.hop, 0.0);

  std::vector<double> phase(partials, 0.0);
  if (opts.phase_mode == PhaseMode::kRandom) {
    std::mt19937_64 rng(opts.phase_seed);
    std::uniform_real_distribution<double> uniform(0.0, kTwoPi);
    for (double &p : phase) p = uniform(rng);
  }
  const double nyquist = opts.sample_rate_hz / 2.0;
  const double step = kTwoPi / opts.sample_rate_hz;

  for (std::size_t n = 0; n < out.samples.size(); ++n) {
    const double pos = (static_cast<double>(n) - opts.frame_offset) / opts.hop;
    std::size_t lo = 0, hi = 0;
    double frac = 0.0;
    if (pos >= static_cast<double>(n_frames - 1)) {
      lo = hi = n_frames - 1;
    } else if (pos > 0.0) {
      lo = static_cast<std::size_t>(pos);
      hi = lo + 1;
      frac = pos - static_cast<double>(lo);
    }
    const double *f_lo = freq.data() + lo * partials;
    const double *f_hi = freq.data() + hi * partials;
    const double *a_lo = amp.data() + lo * partials;
    const double *a_hi = amp.data() + hi * partials;
    double acc = 0.0;
    for (std::size_t k = 0; k < partials; ++k) {
      const double f = f_lo[k] + frac * (f_hi[k] - f_lo[k]);
      const double a = a_lo[k] + frac * (a_hi[k] - a_lo[k]);
      if (f < nyquist && a != 0.0) acc += a * std::sin(phase[k]);
      phase[k] += step * f;
      if (phase[k] >= kTwoPi) phase[k] -= kTwoPi;
    }
    out.samples[n] = acc;
  }
  return out;
}

void normalize_peak(Waveform &w, double peak_dbfs) {
  double peak = 0.0;
  for (double x : w.samples) peak = std::max(peak, std::abs(x));
  if (peak == 0.0) return;
  const double scale = std::pow(10.0, peak_dbfs / 20.0) / peak;
  for (double &x : w.samples) x *= scale;
}

CepstralFrame decoded_envelope(const CvaeModel &m, const Eigen::VectorXd &z, ConditionVector c) {
  CepstralFrame cf;
  cf.ccs = m.denormalize(decode(m, z, c));
  return cf;
}

std::vector<double> decoded_envelope_grid(const CvaeModel &m, const Eigen::VectorXd &z, ConditionVector c,
                                          int grid_size) {
  return envelope_shape_on_grid(decoded_envelope(m, z, c).ccs, grid_size);
}

Eigen::VectorXd prior_sample(int latent_dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(latent_dim);
  for (int i = 0; i < latent_dim; ++i) z[i] = normal(rng);
  return z;
}

Waveform generate_note(const CvaeModel &m, const SynthesisRequest &req, const GenerationConfig &cfg) {
  check_generation(cfg);
  const double f0 = req.f0_hz ? *req.f0_hz : midi_to_hz(req.midi_pitch);
  const double pitch = req.f0_hz ? hz_to_midi(*req.f0_hz) : req.midi_pitch;
  const std::size_t samples = duration_samples(req.duration_s, cfg.sample_rate_hz);
  const Eigen::VectorXd z = req.z ? *req.z : prior_sample(m.latent_dim(), req.seed);
  const HarmonicFrame frame = envelope_frame(m, z, pitch, req.velocity, f0, req.gain_db, cfg);
  return render(std::span<const HarmonicFrame>(&frame, 1), samples, cfg);
}

std::vector<double> sweep_pitches(const SweepSpec &spec) {
  if (spec.steps < 2) throw Error("a sweep needs at least two steps");
  if (spec.start_midi == spec.end_midi) throw Error("sweep start and end must differ");
  std::vector<double> pitches(spec.steps);
  for (int i = 0; i < spec.steps; ++i) {
    pitches[i] = spec.start_midi + (spec.end_midi - spec.start_midi) * i / spec.steps;
  }
  return pitches;
}

Waveform pitch_sweep(const CvaeModel &m, const SweepSpec &spec, const Eigen::VectorXd &z, int velocity,
                     const GenerationConfig &cfg) {
  check_generation(cfg);
  const auto pitches = sweep_pitches(spec);
  const std::size_t step_samples = duration_samples(spec.step_duration_s, cfg.sample_rate_hz);
  std::vector<HarmonicFrame> per_step;
  for (double p : pitches) {
    const double f0 = midi_to_hz(p);
    if (f0 >= cfg.sample_rate_hz / 2.0) throw Error("sweep crosses Nyquist at MIDI " + std::to_string(p));
    per_step.push_back(envelope_frame(m, z, p, velocity, f0, 0.0, cfg));
  }
  const std::size_t total = step_samples * pitches.size();
  std::vector<HarmonicFrame> frames;
  for (std::size_t pos = 0; pos < total; pos += cfg.hop) frames.push_back(per_step[pos / step_samples]);
  return render(frames, total, cfg);
}

Eigen::VectorXd blend_latents(const Eigen::VectorXd &za, const Eigen::VectorXd &zb, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha " + std::to_string(alpha) + " outside [0, 1]");
  if (za.size() != zb.size()) throw Error("latent vectors differ in length");
  if (alpha == 0.0) return za;
  if (alpha == 1.0) return zb;
  return (1.0 - alpha) * za + alpha * zb;
}

Waveform interpolate_timbre(const CvaeModel &m, const Eigen::VectorXd &za, const Eigen::VectorXd &zb, double alpha,
                            double midi_pitch, int velocity, double duration_s, const GenerationConfig &cfg) {
  SynthesisRequest req;
  req.midi_pitch = midi_pitch;
  req.velocity = velocity;
  req.duration_s = duration_s;
  req.z = blend_latents(za, zb, alpha);
  return generate_note(m, req, cfg);
}

double log_spectral_distance(std::span<const double> e1, std::span<const double> e2) {
  if (e1.size() != e2.size()) {
    throw Error("envelope lengths differ (" + std::to_string(e1.size()) + " vs " + std::to_string(e2.size()) + ")");
  }
  if (e1.empty()) throw Error("empty envelopes");
  double acc = 0.0;
  for (std::size_t i = 0; i < e1.size(); ++i) acc += (e1[i] - e2[i]) * (e1[i] - e2[i]);
  return std::sqrt(acc / static_cast<double>(e1.size()));
}

}  // namespace cepvae
