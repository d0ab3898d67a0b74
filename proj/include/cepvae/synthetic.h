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

#ifndef CEPVAE_SYNTHETIC_H_
#define CEPVAE_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cepvae/dataset.h"
#include "cepvae/source_filter.h"
#include "cepvae/wav.h"

namespace cepvae {

// sum_k amplitudes[k-1] * sin(2 pi k f0 n / fs), zero initial phase.
Waveform harmonic_tone(double f0_hz, std::span<const double> amplitudes, double duration_s,
                       int sample_rate_hz = kCanonicalSampleRate);

// Spectral envelope in dB as a function of (frequency, MIDI pitch, velocity).
using EnvelopeFn = std::function<double(double freq_hz, int midi_pitch, int velocity)>;

struct SyntheticInstrument {
  std::string family;
  EnvelopeFn envelope_db;
};

// A Gaussian formant whose centre moves with pitch, over a spectral tilt that
// steepens as velocity drops.
struct FormantParams {
  double center_hz = 1000.0;        // at MIDI 60
  double hz_per_semitone = 60.0;
  double width_hz = 500.0;
  double peak_db = 24.0;
  double tilt_db_per_khz = 4.0;
  double soft_tilt_db_per_khz = 3.0;  // extra tilt at velocity 0
};
SyntheticInstrument formant_instrument(std::string family, const FormantParams &p);

// Amplitudes of harmonics 1..H (k*f0 below Nyquist, H <= max_harmonics),
// scaled so the amplitudes sum to `headroom`.
std::vector<double> envelope_amplitudes(const SyntheticInstrument &inst, int midi_pitch, int velocity,
                                        int max_harmonics = 40, double headroom = 0.9,
                                        int sample_rate_hz = kCanonicalSampleRate);

// Writes audio/<note_id>.wav and examples.json under `root` for every
// (instrument, pitch, velocity) combination. Returns the metadata written.
std::vector<NoteMetadata> write_synthetic_dataset(const std::filesystem::path &root,
                                                  std::span<const SyntheticInstrument> instruments,
                                                  std::span<const int> pitches, std::span<const int> velocities,
                                                  double duration_s = 4.0);

// Cepstral frames whose coefficients depend smoothly on pitch and velocity,
// plus small Gaussian noise. Pitches in [48, 72], velocities in {64, 100}.
std::vector<CepstralFrame> synthetic_cc_frames(std::size_t count, int num_coeffs, std::uint64_t seed);

}  // namespace cepvae

#endif  // CEPVAE_SYNTHETIC_H_
