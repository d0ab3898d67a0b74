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

#include "cepvae/synthetic.h"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "cepvae/harmonic.h"

namespace cepvae {

Waveform harmonic_tone(double f0_hz, std::span<const double> amplitudes, double duration_s, int sample_rate_hz) {
  Waveform w;
  w.sample_rate_hz = sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
  w.samples.assign(n, 0.0);
  for (std::size_t k = 0; k < amplitudes.size(); ++k) {
    const double omega = 2.0 * std::numbers::pi * f0_hz * static_cast<double>(k + 1) / sample_rate_hz;
    for (std::size_t i = 0; i < n; ++i) w.samples[i] += amplitudes[k] * std::sin(omega * static_cast<double>(i));
  }
  return w;
}

SyntheticInstrument formant_instrument(std::string family, const FormantParams &p) {
  return {std::move(family), [p](double f, int pitch, int velocity) {
            const double centre = p.center_hz + p.hz_per_semitone * (pitch - 60);
            const double d = (f - centre) / p.width_hz;
            const double tilt = p.tilt_db_per_khz + p.soft_tilt_db_per_khz * (1.0 - velocity / 127.0);
            return p.peak_db * std::exp(-0.5 * d * d) - tilt * f / 1000.0;
          }};
}

std::vector<double> envelope_amplitudes(const SyntheticInstrument &inst, int midi_pitch, int velocity,
                                        int max_harmonics, double headroom, int sample_rate_hz) {
  const double f0 = midi_to_hz(midi_pitch);
  std::vector<double> amps;
  for (int k = 1; k <= max_harmonics && k * f0 < sample_rate_hz / 2.0; ++k) {
    amps.push_back(std::pow(10.0, inst.envelope_db(k * f0, midi_pitch, velocity) / 20.0));
  }
  const double sum = std::accumulate(amps.begin(), amps.end(), 0.0);
  for (double &a : amps) a *= headroom / sum;
  return amps;
}

std::vector<NoteMetadata> write_synthetic_dataset(const std::filesystem::path &root,
                                                  std::span<const SyntheticInstrument> instruments,
                                                  std::span<const int> pitches, std::span<const int> velocities,
                                                  double duration_s) {
  std::filesystem::create_directories(root / "audio");
  std::vector<NoteMetadata> notes;
  for (const auto &inst : instruments) {
    for (int p : pitches) {
      for (int v : velocities) {
        NoteMetadata n;
        n.note_id = inst.family + "_synthetic_" + std::to_string(1000 + p).substr(1) + "-" +
                    std::to_string(1000 + v).substr(1);
        n.midi_pitch = p;
        n.velocity = v;
        n.instrument_family = inst.family;
        n.source_file = root / "audio" / (n.note_id + ".wav");
        const auto amps = envelope_amplitudes(inst, p, v);
        write_wav(n.source_file, harmonic_tone(midi_to_hz(p), amps, duration_s));
        notes.push_back(std::move(n));
      }
    }
  }
  write_dataset_index(root, notes);
  return notes;
}

std::vector<CepstralFrame> synthetic_cc_frames(std::size_t count, int num_coeffs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pitch(48, 72);
  std::bernoulli_distribution loud(0.5);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<CepstralFrame> frames;
  frames.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    CepstralFrame f;
    f.midi_pitch = pitch(rng);
    f.velocity = loud(rng) ? 100 : 64;
    f.note_id = "cc_" + std::to_string(f.midi_pitch) + "_" + std::to_string(f.velocity);
    f.frame_index = static_cast<int>(i);
    f.f0_hz = midi_to_hz(f.midi_pitch);
    f.gain_db = -20.0;
    const double x = (f.midi_pitch - 60) / 12.0;
    const double v = f.velocity / 127.0;
    for (int n = 0; n < num_coeffs; ++n) {
      const double scale = 6.0 / (1.0 + n);
      f.ccs.push_back(scale * (std::sin(1.3 * x + 0.7 * n) + 0.5 * v * std::cos(0.4 * n)) + noise(rng));
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace cepvae
