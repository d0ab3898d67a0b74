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

#ifndef CEPVAE_SYNTHESIS_H_
#define CEPVAE_SYNTHESIS_H_

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cepvae/cvae.h"
#include "cepvae/harmonic.h"
#include "cepvae/wav.h"

namespace cepvae {

enum class PhaseMode { kZero, kRandom };

struct SynthesisOptions {
  int hop = 160;
  int sample_rate_hz = kCanonicalSampleRate;
  std::size_t num_samples = 0;  // 0: frames.size() * hop
  double frame_offset = 0.0;    // sample position of frame 0; frame i sits at offset + i*hop
  PhaseMode phase_mode = PhaseMode::kZero;
  std::uint64_t phase_seed = 0;
};

// Oscillator bank, one sinusoid per harmonic index. Frequency and amplitude
// are linearly interpolated between frame positions and held beyond the
// first/last frame; phase accumulates sample by sample. Partials at or above
// Nyquist are muted. Output is not normalised.
Waveform additive_synthesis(std::span<const HarmonicFrame> frames, int hop, int sample_rate_hz);
Waveform additive_synthesis(std::span<const HarmonicFrame> frames, const SynthesisOptions &opts);

struct GenerationConfig {
  int max_harmonics = 40;
  int hop = 160;
  int sample_rate_hz = kCanonicalSampleRate;
  bool normalize = true;
  double peak_dbfs = -3.0;
  PhaseMode phase_mode = PhaseMode::kZero;
  std::uint64_t phase_seed = 0;
};

struct SynthesisRequest {
  double midi_pitch = 60.0;
  std::optional<double> f0_hz;  // overrides midi_pitch for the oscillator; condition uses its MIDI value
  int velocity = 100;
  std::optional<Eigen::VectorXd> z;  // unset: draw from the prior with `seed`
  std::uint64_t seed = 0;
  double duration_s = 1.0;
  double gain_db = 0.0;
};

// Scales so the absolute peak sits at peak_dbfs. Silence is left alone.
void normalize_peak(Waveform &w, double peak_dbfs = -3.0);

// Decoded, denormalised envelope (gain_db = 0) for latent z under condition c.
CepstralFrame decoded_envelope(const CvaeModel &m, const Eigen::VectorXd &z, ConditionVector c);
// Same envelope sampled on the uniform [0, Nyquist] grid, in dB.
std::vector<double> decoded_envelope_grid(const CvaeModel &m, const Eigen::VectorXd &z, ConditionVector c,
                                          int grid_size = 256);

Eigen::VectorXd prior_sample(int latent_dim, std::uint64_t seed);

Waveform generate_note(const CvaeModel &m, const SynthesisRequest &req, const GenerationConfig &cfg = {});

struct SweepSpec {
  double start_midi = 60.0;
  double end_midi = 72.0;
  int steps = 24;
  double step_duration_s = 0.1;
};

// Step i uses MIDI value start + i*(end - start)/steps, i = 0..steps-1, so 24
// steps over an octave are quarter tones. One oscillator bank spans the whole
// sweep, keeping phase continuous across step boundaries.
std::vector<double> sweep_pitches(const SweepSpec &spec);
Waveform pitch_sweep(const CvaeModel &m, const SweepSpec &spec, const Eigen::VectorXd &z, int velocity,
                     const GenerationConfig &cfg = {});

// Decodes (1 - alpha) * za + alpha * zb; alpha 0 and 1 reproduce za and zb exactly.
Eigen::VectorXd blend_latents(const Eigen::VectorXd &za, const Eigen::VectorXd &zb, double alpha);
Waveform interpolate_timbre(const CvaeModel &m, const Eigen::VectorXd &za, const Eigen::VectorXd &zb, double alpha,
                            double midi_pitch, int velocity, double duration_s = 1.0,
                            const GenerationConfig &cfg = {});

// Root-mean-square difference of two dB envelopes on the same grid.
double log_spectral_distance(std::span<const double> e1, std::span<const double> e2);

}  // namespace cepvae

#endif  // CEPVAE_SYNTHESIS_H_
