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

#ifndef CEPVAE_SOURCE_FILTER_H_
#define CEPVAE_SOURCE_FILTER_H_

#include <span>
#include <string>
#include <vector>

#include "cepvae/common.h"
#include "cepvae/harmonic.h"

namespace cepvae {

// Filter (cepstral envelope shape) plus source (f0, gain) for one frame,
// with the labels the conditional model trains on.
struct CepstralFrame {
  std::vector<double> ccs;
  double f0_hz = 0.0;
  double gain_db = 0.0;
  int midi_pitch = 0;
  int velocity = 0;
  std::string note_id;
  int frame_index = 0;
};

struct EnvelopeConfig {
  int num_coeffs = 32;
  int grid_size = 256;
  double floor_db = kDefaultFloorDb;
  int sample_rate_hz = kCanonicalSampleRate;

  void validate() const;
};

// Harmonic log-amplitudes (dB, floored) linearly interpolated onto a uniform
// grid of grid_size points spanning [0, Nyquist], with the first/last value
// held to the edges. The mean harmonic level is subtracted and returned in
// `gain_db`.
struct GriddedEnvelope {
  std::vector<double> values_db;
  double gain_db = 0.0;
};
GriddedEnvelope grid_log_envelope(const HarmonicFrame &h, const EnvelopeConfig &cfg);

// The envelope is the cosine series
//   E(f) = gain_db + sum_n ccs[n] * cos(pi * n * f / nyquist),
// with coefficients from a DCT-I of the gridded envelope, so keeping all
// grid_size coefficients reproduces the grid exactly.
CepstralFrame cepstral_envelope(const HarmonicFrame &h, const EnvelopeConfig &cfg);

// Series coefficients of an arbitrary gridded curve (the transform used by
// cepstral_envelope). Returns the first num_coeffs of them.
std::vector<double> cosine_series(std::span<const double> grid_values, int num_coeffs);

double envelope_at(const CepstralFrame &cf, double freq_hz, int sample_rate_hz = kCanonicalSampleRate);

// E(f) - gain_db sampled on the uniform [0, Nyquist] grid.
std::vector<double> envelope_shape_on_grid(std::span<const double> ccs, int grid_size);

// Harmonic k at k*f0 with amplitude 10^(E(k*f0)/20), for k*f0 < Nyquist.
HarmonicFrame harmonic_amps_from_envelope(const CepstralFrame &cf, double f0_hz, int max_harmonics,
                                          int sample_rate_hz = kCanonicalSampleRate);

}  // namespace cepvae

#endif  // CEPVAE_SOURCE_FILTER_H_
