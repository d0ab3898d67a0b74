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

#ifndef CEPVAE_SPECTRAL_H_
#define CEPVAE_SPECTRAL_H_

#include <span>
#include <string_view>
#include <vector>

#include "cepvae/common.h"
#include "cepvae/wav.h"

namespace cepvae {

enum class WindowKind { kHann, kHamming, kBlackman, kRectangular };

WindowKind parse_window(std::string_view name);

struct AnalysisConfig {
  int frame_len = 1024;
  int hop = 256;
  WindowKind window = WindowKind::kHann;
  int fft_size = 8192;
  double floor_db = kDefaultFloorDb;

  // Throws Error when an invariant is violated.
  void validate() const;
};

struct SpectralFrame {
  std::vector<double> magnitudes_db;  // fft_size / 2 + 1 bins
  double bin_hz = 0.0;
  int frame_index = 0;
  double time_s = 0.0;  // frame centre

  double nyquist_hz() const { return bin_hz * static_cast<double>(magnitudes_db.size() - 1); }
};

// Periodic window of length n.
std::vector<double> make_window(WindowKind kind, int n);

// Frame i starts at sample i*hop; views alias `w`.
std::vector<std::span<const double>> frame_signal(const Waveform &w, const AnalysisConfig &cfg);

// Windows, zero-pads to fft_size and returns 20*log10 magnitudes clamped at
// floor_db. Magnitudes are divided by the window's coherent gain, so a
// bin-centred sinusoid of amplitude A reads 20*log10(A).
SpectralFrame magnitude_spectrum(std::span<const double> frame, const AnalysisConfig &cfg, int sample_rate_hz,
                                 int frame_index = 0, double time_s = 0.0);

// All frames of `w`. Frames are processed in parallel (OpenMP).
std::vector<SpectralFrame> spectrogram(const Waveform &w, const AnalysisConfig &cfg);
// Serial reference for spectrogram(); results are bitwise identical.
std::vector<SpectralFrame> spectrogram_serial(const Waveform &w, const AnalysisConfig &cfg);

}  // namespace cepvae

#endif  // CEPVAE_SPECTRAL_H_
