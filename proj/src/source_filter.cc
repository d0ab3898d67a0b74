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

#include "cepvae/source_filter.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cepvae {

void EnvelopeConfig::validate() const {
  if (grid_size < 2) throw Error("envelope grid needs at least two points");
  if (num_coeffs < 1 || num_coeffs > grid_size) throw Error("num_coeffs must lie in [1, grid_size]");
  if (!(floor_db < 0.0)) throw Error("floor_db must be negative");
  if (sample_rate_hz <= 0) throw Error("sample rate must be positive");
}

GriddedEnvelope grid_log_envelope(const HarmonicFrame &h, const EnvelopeConfig &cfg) {
  cfg.validate();
  const bool voiced = std::any_of(h.harmonics.begin(), h.harmonics.end(),
                                  [](const Harmonic &x) { return x.amp_linear > 0.0; });
  if (!voiced) throw Error("harmonic frame has no partial with positive amplitude");

  std::vector<std::pair<double, double>> points;
  points.reserve(h.harmonics.size());
  double sum = 0.0;
  for (const auto &x : h.harmonics) {
    const double db = x.amp_linear > 0.0 ? std::max(20.0 * std::log10(x.amp_linear), cfg.floor_db) : cfg.floor_db;
    points.emplace_back(x.freq_hz, db);
    sum += db;
  }
  std::stable_sort(points.begin(), points.end(), [](const auto &a, const auto &b) { return a.first < b.first; });

  GriddedEnvelope env;
  env.gain_db = sum / static_cast<double>(points.size());
  env.values_db.resize(cfg.grid_size);
  const double nyquist = cfg.sample_rate_hz / 2.0;
  std::size_t seg = 0;
  for (int j = 0; j < cfg.grid_size; ++j) {
    const double f = nyquist * j / (cfg.grid_size - 1);
    double v;
    if (f <= points.front().first) {
      v = points.front().second;
    } else if (f >= points.back().first) {
      v = points.back().second;
    } else {
      while (points[seg + 1].first < f) ++seg;
      const auto &[f_lo, v_lo] = points[seg];
      const auto &[f_hi, v_hi] = points[seg + 1];
      const double t = f_hi > f_lo ? (f - f_lo) / (f_hi - f_lo) : 0.0;
      v = v_lo + t * (v_hi - v_lo);
    }
    env.values_db[j] = v - env.gain_db;
  }
  return env;
}

std::vector<double> cosine_series(std::span<const double> grid_values, int num_coeffs) {
  const auto m = static_cast<int>(grid_values.size());
  if (m < 2 || num_coeffs < 1 || num_coeffs > m) throw Error("cosine_series: bad sizes");
  const double last = m - 1;
  std::vector<double> c(num_coeffs);
  for (int n = 0; n < num_coeffs; ++n) {
    double acc = 0.5 * grid_values[0] + 0.5 * ((n % 2 == 0) ? 1.0 : -1.0) * grid_values[m - 1];
    for (int j = 1; j < m - 1; ++j) acc += grid_values[j] * std::cos(std::numbers::pi * n * j / last);
    const double edge = (n == 0 || n == m - 1) ? 0.5 : 1.0;
    c[n] = 2.0 / last * edge * acc;
  }
  return c;
}

CepstralFrame cepstral_envelope(const HarmonicFrame &h, const EnvelopeConfig &cfg) {
  const auto env = grid_log_envelope(h, cfg);
  CepstralFrame cf;
  cf.ccs = cosine_series(env.values_db, cfg.num_coeffs);
  cf.gain_db = env.gain_db;
  cf.f0_hz = h.f0_hz;
  cf.frame_index = h.frame_index;
  return cf;
}

double envelope_at(const CepstralFrame &cf, double freq_hz, int sample_rate_hz) {
  const double nyquist = sample_rate_hz / 2.0;
  if (!(freq_hz >= 0.0 && freq_hz <= nyquist)) {
    throw Error("frequency " + std::to_string(freq_hz) + " Hz outside [0, " + std::to_string(nyquist) + "]");
  }
  double acc = cf.gain_db;
  const double x = std::numbers::pi * freq_hz / nyquist;
  for (std::size_t n = 0; n < cf.ccs.size(); ++n) acc += cf.ccs[n] * std::cos(x * static_cast<double>(n));
  return acc;
}

std::vector<double> envelope_shape_on_grid(std::span<const double> ccs, int grid_size) {
  if (grid_size < 2) throw Error("envelope grid needs at least two points");
  std::vector<double> out(grid_size, 0.0);
  for (int j = 0; j < grid_size; ++j) {
    const double x = std::numbers::pi * j / (grid_size - 1);
    double acc = 0.0;
    for (std::size_t n = 0; n < ccs.size(); ++n) acc += ccs[n] * std::cos(x * static_cast<double>(n));
    out[j] = acc;
  }
  return out;
}

HarmonicFrame harmonic_amps_from_envelope(const CepstralFrame &cf, double f0_hz, int max_harmonics,
                                          int sample_rate_hz) {
  if (!(f0_hz > 0.0)) throw Error("f0 must be positive");
  const double nyquist = sample_rate_hz / 2.0;
  HarmonicFrame h;
  h.f0_hz = f0_hz;
  h.frame_index = cf.frame_index;
  for (int k = 1; k <= max_harmonics && k * f0_hz < nyquist; ++k) {
    const double f = k * f0_hz;
    h.harmonics.push_back({f, std::pow(10.0, envelope_at(cf, f, sample_rate_hz) / 20.0)});
  }
  return h;
}

}  // namespace cepvae
