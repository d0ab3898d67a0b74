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

#include "cepvae/harmonic.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cepvae/parallel.h"

namespace cepvae {
namespace {

// Peaks more than this far below the loudest one do not count as "strong"
// when reconciling the label with the spectrum.
constexpr double kStrongPeakRangeDb = 40.0;
constexpr int kMaxOvertoneSearch = 8;

const double kSemitone = std::pow(2.0, 1.0 / 12.0);

HarmonicFrame analyze_one(const SpectralFrame &frame, int midi_hint, const HarmonicConfig &cfg, double floor_db) {
  const auto peaks = detect_peaks(frame, cfg.threshold_db, floor_db);
  const double f0 = cfg.refine_f0 && !peaks.empty() ? refine_f0(peaks, midi_hint) : midi_to_hz(midi_hint);
  auto h = extract_harmonics(peaks, f0, frame.nyquist_hz(), cfg.max_harmonics, cfg.tolerance);
  h.frame_index = frame.frame_index;
  return h;
}

}  // namespace

double midi_to_hz(int midi_pitch) {
  if (midi_pitch < 0 || midi_pitch > 127) {
    throw Error("midi pitch " + std::to_string(midi_pitch) + " outside [0, 127]");
  }
  return midi_to_hz(static_cast<double>(midi_pitch));
}

double midi_to_hz(double midi_pitch) { return 440.0 * std::pow(2.0, (midi_pitch - 69.0) / 12.0); }

double hz_to_midi(double hz) { return 69.0 + 12.0 * std::log2(hz / 440.0); }

ParabolicVertex parabolic_vertex(double left, double centre, double right) {
  const double denom = left - 2.0 * centre + right;
  if (denom == 0.0) return {0.0, centre};
  const double p = 0.5 * (left - right) / denom;
  return {p, centre - 0.25 * (left - right) * p};
}

std::vector<Peak> detect_peaks(const SpectralFrame &s, double threshold_db, double floor_db) {
  if (!(threshold_db > floor_db)) throw Error("peak threshold must lie above the spectral floor");
  std::vector<Peak> peaks;
  const auto &m = s.magnitudes_db;
  for (std::size_t k = 1; k + 1 < m.size(); ++k) {
    if (m[k] <= threshold_db || !(m[k] > m[k - 1]) || !(m[k] > m[k + 1])) continue;
    const auto v = parabolic_vertex(m[k - 1], m[k], m[k + 1]);
    peaks.push_back({(static_cast<double>(k) + v.offset) * s.bin_hz, v.height, v.offset});
  }
  return peaks;
}

double refine_f0(std::span<const Peak> peaks, int midi_hint) {
  const double hint_hz = midi_to_hz(midi_hint);
  if (peaks.empty()) return hint_hz;
  double loudest = -std::numeric_limits<double>::infinity();
  for (const auto &p : peaks) loudest = std::max(loudest, p.amp_db);
  const double strong_db = loudest - kStrongPeakRangeDb;

  for (int harmonic = 1; harmonic <= kMaxOvertoneSearch; ++harmonic) {
    const double target = harmonic * hint_hz;
    const Peak *best = nullptr;
    for (const auto &p : peaks) {
      if (p.amp_db < strong_db) continue;
      if (p.freq_hz < target / kSemitone || p.freq_hz > target * kSemitone) continue;
      if (!best || std::abs(p.freq_hz - target) < std::abs(best->freq_hz - target)) best = &p;
    }
    if (best) return best->freq_hz / harmonic;
  }
  return hint_hz;
}

HarmonicFrame extract_harmonics(std::span<const Peak> peaks, double f0_hz, double nyquist_hz, int max_harmonics,
                                double tolerance) {
  if (!(f0_hz > 0.0)) throw Error("f0 must be positive");
  if (f0_hz >= nyquist_hz) throw Error("f0 " + std::to_string(f0_hz) + " Hz is not below Nyquist");
  HarmonicFrame frame;
  frame.f0_hz = f0_hz;
  for (int k = 1; k <= max_harmonics && k * f0_hz < nyquist_hz; ++k) {
    const double target = k * f0_hz;
    const Peak *best = nullptr;
    for (const auto &p : peaks) {
      if (std::abs(p.freq_hz - target) > tolerance * target) continue;
      if (!best || p.amp_db > best->amp_db) best = &p;
    }
    if (best) {
      frame.harmonics.push_back({best->freq_hz, std::pow(10.0, best->amp_db / 20.0)});
    } else {
      frame.harmonics.push_back({target, 0.0});
    }
  }
  return frame;
}

HarmonicFrame extract_harmonics(const SpectralFrame &s, double f0_hz, int max_harmonics, double threshold_db,
                                double floor_db) {
  const auto peaks = detect_peaks(s, threshold_db, floor_db);
  auto frame = extract_harmonics(peaks, f0_hz, s.nyquist_hz(), max_harmonics);
  frame.frame_index = s.frame_index;
  return frame;
}

std::vector<HarmonicFrame> analyze_harmonics(std::span<const SpectralFrame> frames, int midi_hint,
                                             const HarmonicConfig &cfg, double floor_db) {
  std::vector<HarmonicFrame> out(frames.size());
  parallel_for(static_cast<long>(frames.size()),
               [&](long i) { out[i] = analyze_one(frames[i], midi_hint, cfg, floor_db); });
  return out;
}

std::vector<HarmonicFrame> analyze_harmonics_serial(std::span<const SpectralFrame> frames, int midi_hint,
                                                    const HarmonicConfig &cfg, double floor_db) {
  std::vector<HarmonicFrame> out;
  out.reserve(frames.size());
  for (const auto &f : frames) out.push_back(analyze_one(f, midi_hint, cfg, floor_db));
  return out;
}

}  // namespace cepvae
