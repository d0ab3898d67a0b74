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

#ifndef CEPVAE_HARMONIC_H_
#define CEPVAE_HARMONIC_H_

#include <span>
#include <vector>

#include "cepvae/common.h"
#include "cepvae/spectral.h"

namespace cepvae {

struct Peak {
  double freq_hz = 0.0;
  double amp_db = 0.0;
  double bin_interp_offset = 0.0;  // in (-0.5, 0.5)
};

struct Harmonic {
  double freq_hz = 0.0;
  double amp_linear = 0.0;
};

// harmonics[k-1] is harmonic number k.
struct HarmonicFrame {
  double f0_hz = 0.0;
  std::vector<Harmonic> harmonics;
  int frame_index = 0;
};

struct HarmonicConfig {
  double threshold_db = -80.0;
  int max_harmonics = 40;
  double tolerance = 0.03;   // relative search width around k*f0
  bool refine_f0 = true;     // false: f0 comes straight from the MIDI label
};

// 440 * 2^((pitch - 69) / 12). The integer overload enforces [0, 127].
double midi_to_hz(int midi_pitch);
double midi_to_hz(double midi_pitch);
double hz_to_midi(double hz);

// Vertex of the parabola through (-1, left), (0, centre), (1, right).
struct ParabolicVertex {
  double offset;
  double height;
};
ParabolicVertex parabolic_vertex(double left, double centre, double right);

// Strict local maxima above threshold_db, refined by quadratic interpolation
// in dB. Sorted by frequency.
std::vector<Peak> detect_peaks(const SpectralFrame &s, double threshold_db, double floor_db = kDefaultFloorDb);

// Reconciles a MIDI label with the observed peaks: nearest strong peak within
// one semitone of the label; otherwise a strong peak near an overtone of the
// label divided by its harmonic number; otherwise the label frequency.
double refine_f0(std::span<const Peak> peaks, int midi_hint);

// For k = 1..max_harmonics with k*f0 below Nyquist, the strongest peak within
// +-tolerance of k*f0, or amplitude 0 at k*f0 when none exists.
HarmonicFrame extract_harmonics(std::span<const Peak> peaks, double f0_hz, double nyquist_hz, int max_harmonics,
                                double tolerance = 0.03);
HarmonicFrame extract_harmonics(const SpectralFrame &s, double f0_hz, int max_harmonics,
                                double threshold_db = -80.0, double floor_db = kDefaultFloorDb);

// Full per-frame chain: peaks -> f0 (label or refined) -> harmonics. Frames
// run in parallel (OpenMP).
std::vector<HarmonicFrame> analyze_harmonics(std::span<const SpectralFrame> frames, int midi_hint,
                                             const HarmonicConfig &cfg, double floor_db = kDefaultFloorDb);
// Serial reference for analyze_harmonics().
std::vector<HarmonicFrame> analyze_harmonics_serial(std::span<const SpectralFrame> frames, int midi_hint,
                                                    const HarmonicConfig &cfg, double floor_db = kDefaultFloorDb);

}  // namespace cepvae

#endif  // CEPVAE_HARMONIC_H_
