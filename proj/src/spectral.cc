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

#include "cepvae/spectral.h"

#include <cmath>
#include <numbers>
#include <numeric>

#include "cepvae/fft.h"
#include "cepvae/parallel.h"

namespace cepvae {
namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Shared per-call state so the window and FFT plan are built once per signal.
struct SpectrumKernel {
  SpectrumKernel(const AnalysisConfig &cfg, int sample_rate_hz)
      : cfg(cfg),
        window(make_window(cfg.window, cfg.frame_len)),
        fft(cfg.fft_size),
        scale(2.0 / std::accumulate(window.begin(), window.end(), 0.0)),
        bin_hz(static_cast<double>(sample_rate_hz) / cfg.fft_size) {}

  SpectralFrame operator()(std::span<const double> frame, int index, double time_s) const {
    std::vector<double> windowed(frame.size());
    for (std::size_t i = 0; i < frame.size(); ++i) windowed[i] = frame[i] * window[i];
    const auto spectrum = fft.execute(windowed);
    SpectralFrame out;
    out.bin_hz = bin_hz;
    out.frame_index = index;
    out.time_s = time_s;
    out.magnitudes_db.resize(spectrum.size());
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
      const double mag = std::abs(spectrum[k]) * scale;
      const double db = mag > 0.0 ? 20.0 * std::log10(mag) : cfg.floor_db;
      out.magnitudes_db[k] = std::max(db, cfg.floor_db);
    }
    return out;
  }

  const AnalysisConfig &cfg;
  std::vector<double> window;
  RealFft fft;
  double scale;
  double bin_hz;
};

double frame_time(const AnalysisConfig &cfg, int index, int sample_rate_hz) {
  return (static_cast<double>(index) * cfg.hop + cfg.frame_len / 2.0) / sample_rate_hz;
}

}  // namespace

WindowKind parse_window(std::string_view name) {
  if (name == "hann") return WindowKind::kHann;
  if (name == "hamming") return WindowKind::kHamming;
  if (name == "blackman") return WindowKind::kBlackman;
  if (name == "rect" || name == "rectangular") return WindowKind::kRectangular;
  throw Error("unknown window '" + std::string(name) + "'");
}

void AnalysisConfig::validate() const {
  if (!is_power_of_two(frame_len)) throw Error("frame_len must be a power of two");
  if (hop <= 0 || hop > frame_len) throw Error("hop must lie in (0, frame_len]");
  if (fft_size < frame_len || !is_power_of_two(fft_size)) {
    throw Error("fft_size must be a power of two and at least frame_len");
  }
  if (!(floor_db < 0.0)) throw Error("floor_db must be negative");
}

std::vector<double> make_window(WindowKind kind, int n) {
  std::vector<double> w(n);
  const double two_pi = 2.0 * std::numbers::pi;
  for (int i = 0; i < n; ++i) {
    const double x = two_pi * i / n;
    switch (kind) {
      case WindowKind::kHann: w[i] = 0.5 - 0.5 * std::cos(x); break;
      case WindowKind::kHamming: w[i] = 0.54 - 0.46 * std::cos(x); break;
      case WindowKind::kBlackman: w[i] = 0.42 - 0.5 * std::cos(x) + 0.08 * std::cos(2.0 * x); break;
      case WindowKind::kRectangular: w[i] = 1.0; break;
    }
  }
  return w;
}

std::vector<std::span<const double>> frame_signal(const Waveform &w, const AnalysisConfig &cfg) {
  cfg.validate();
  const auto len = static_cast<std::size_t>(cfg.frame_len);
  if (w.samples.size() < len) {
    throw Error("signal of " + std::to_string(w.samples.size()) + " samples is shorter than one frame (" +
                std::to_string(cfg.frame_len) + ")");
  }
  const std::size_t count = (w.samples.size() - len) / cfg.hop + 1;
  std::vector<std::span<const double>> frames;
  frames.reserve(count);
  std::span<const double> all(w.samples);
  for (std::size_t i = 0; i < count; ++i) frames.push_back(all.subspan(i * cfg.hop, len));
  return frames;
}

SpectralFrame magnitude_spectrum(std::span<const double> frame, const AnalysisConfig &cfg, int sample_rate_hz,
                                 int frame_index, double time_s) {
  cfg.validate();
  if (frame.size() != static_cast<std::size_t>(cfg.frame_len)) {
    throw Error("frame has " + std::to_string(frame.size()) + " samples, expected " +
                std::to_string(cfg.frame_len));
  }
  return SpectrumKernel(cfg, sample_rate_hz)(frame, frame_index, time_s);
}

std::vector<SpectralFrame> spectrogram(const Waveform &w, const AnalysisConfig &cfg) {
  const auto frames = frame_signal(w, cfg);
  const SpectrumKernel kernel(cfg, w.sample_rate_hz);
  std::vector<SpectralFrame> out(frames.size());
  parallel_for(static_cast<long>(frames.size()), [&](long i) {
    out[i] = kernel(frames[i], static_cast<int>(i), frame_time(cfg, static_cast<int>(i), w.sample_rate_hz));
  });
  return out;
}

std::vector<SpectralFrame> spectrogram_serial(const Waveform &w, const AnalysisConfig &cfg) {
  const auto frames = frame_signal(w, cfg);
  const SpectrumKernel kernel(cfg, w.sample_rate_hz);
  std::vector<SpectralFrame> out;
  out.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    out.push_back(kernel(frames[i], static_cast<int>(i), frame_time(cfg, static_cast<int>(i), w.sample_rate_hz)));
  }
  return out;
}

}  // namespace cepvae
