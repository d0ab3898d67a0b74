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

#include <cmath>

#include "cepvae/analysis.h"
#include "cepvae/harmonic.h"
#include "cepvae/spectral.h"
#include "cepvae/synthetic.h"
#include "doctest.h"

namespace cepvae {
namespace {

SpectralFrame spectrum_of(const Waveform &w, const AnalysisConfig &cfg = {}) {
  return magnitude_spectrum(std::span(w.samples).subspan(4000, cfg.frame_len), cfg, w.sample_rate_hz);
}

TEST_CASE("midi_to_hz") {
  CHECK(midi_to_hz(69) == 440.0);
  CHECK(midi_to_hz(81) == 880.0);
  CHECK(midi_to_hz(60) == doctest::Approx(440.0 * std::pow(2.0, -9.0 / 12.0)).epsilon(1e-12));
  CHECK(std::abs(midi_to_hz(60) - 261.6256) < 1e-4);
  CHECK(hz_to_midi(440.0) == doctest::Approx(69.0));
  CHECK(midi_to_hz(69.5) == doctest::Approx(440.0 * std::pow(2.0, 0.5 / 12.0)));
  CHECK_THROWS_AS(midi_to_hz(128), Error);
  CHECK_THROWS_AS(midi_to_hz(-1), Error);
}

TEST_CASE("parabolic_vertex") {
  const auto sym = parabolic_vertex(8, 12, 8);
  CHECK(sym.offset == 0.0);
  CHECK(sym.height == 12.0);

  // Parabola through (-1, 6), (0, 10), (1, 2): y = 10 - 2x - 6x^2.
  const auto v = parabolic_vertex(6, 10, 2);
  const double xv = -2.0 / 12.0;
  CHECK(v.offset == doctest::Approx(xv));
  CHECK(v.offset == doctest::Approx(-1.0 / 6.0));
  CHECK(v.height == doctest::Approx(10.0 - 2.0 * xv - 6.0 * xv * xv));
  CHECK(v.height == doctest::Approx(10.0 + 1.0 / 6.0));
}

TEST_CASE("detect_peaks") {
  SpectralFrame s;
  s.bin_hz = 10.0;
  s.magnitudes_db.assign(64, -100.0);
  s.magnitudes_db[9] = 8;
  s.magnitudes_db[10] = 12;
  s.magnitudes_db[11] = 8;
  s.magnitudes_db[29] = 6;
  s.magnitudes_db[30] = 10;
  s.magnitudes_db[31] = 2;
  const auto peaks = detect_peaks(s, -80.0);
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0].freq_hz == 100.0);
  CHECK(peaks[0].amp_db == 12.0);
  CHECK(peaks[1].freq_hz == doctest::Approx(300.0 - 10.0 / 6.0));
  CHECK(peaks[1].amp_db == doctest::Approx(10.0 + 1.0 / 6.0));

  CHECK(detect_peaks(s, 20.0).empty());
  CHECK_THROWS_AS(detect_peaks(s, -120.0), Error);
}

TEST_CASE("detect_peaks output is sorted and strictly increasing") {
  const std::vector<double> amps{1.0, 0.5, 0.25, 0.125, 0.0625, 0.03};
  const auto s = spectrum_of(harmonic_tone(220.0, amps, 1.0));
  const auto peaks = detect_peaks(s, -80.0);
  REQUIRE(peaks.size() >= amps.size());
  for (std::size_t i = 1; i < peaks.size(); ++i) CHECK(peaks[i].freq_hz > peaks[i - 1].freq_hz);
}

TEST_CASE("refine_f0") {
  const std::vector<double> unit{1.0};
  const auto at440 = detect_peaks(spectrum_of(harmonic_tone(440.0, unit, 1.0)), -80.0);
  CHECK(std::abs(refine_f0(at440, 69) - 440.0) < 0.5);

  const auto at437 = detect_peaks(spectrum_of(harmonic_tone(437.0, unit, 1.0)), -80.0);
  CHECK(std::abs(refine_f0(at437, 69) - 437.0) < 0.5);

  const auto far = detect_peaks(spectrum_of(harmonic_tone(300.0, unit, 1.0)), -80.0);
  CHECK(refine_f0(far, 69) == midi_to_hz(69));
  CHECK(refine_f0({}, 69) == midi_to_hz(69));

  // Missing fundamental: overtones 2..4 of 220 Hz.
  const std::vector<double> no_fund{0.0, 1.0, 0.7, 0.5};
  const auto overtones = detect_peaks(spectrum_of(harmonic_tone(220.0, no_fund, 1.0)), -80.0);
  CHECK(std::abs(refine_f0(overtones, 57) - 220.0) < 0.5);
}

TEST_CASE("extract_harmonics: five-partial tone within 5%") {
  const std::vector<double> amps{1.0, 0.5, 0.25, 0.125, 0.0625};
  const auto s = spectrum_of(harmonic_tone(300.0, amps, 1.0));
  const auto h = extract_harmonics(s, 300.0, 40);
  REQUIRE(h.harmonics.size() == 26);  // k*300 < 8000
  for (std::size_t k = 0; k < amps.size(); ++k) {
    CHECK(std::abs(h.harmonics[k].amp_linear / amps[k] - 1.0) <= 0.05);
  }
  for (std::size_t k = 0; k < h.harmonics.size(); ++k) {
    const auto &x = h.harmonics[k];
    const double ratio = x.freq_hz / h.f0_hz;
    CHECK(ratio >= (k + 1) * 0.97);
    CHECK(ratio <= (k + 1) * 1.03);
  }
}

TEST_CASE("extract_harmonics: pure sinusoid") {
  const std::vector<double> unit{0.8};
  const auto h = extract_harmonics(spectrum_of(harmonic_tone(500.0, unit, 1.0)), 500.0, 40);
  CHECK(h.harmonics[0].amp_linear == doctest::Approx(0.8).epsilon(0.01));
  for (std::size_t k = 1; k < h.harmonics.size(); ++k) CHECK(h.harmonics[k].amp_linear < 1e-4);
}

TEST_CASE("extract_harmonics: Nyquist cutoff and domain") {
  SpectralFrame s;
  s.bin_hz = 16000.0 / 2048;
  s.magnitudes_db.assign(1025, -100.0);
  CHECK(extract_harmonics(s, 7000.0, 40).harmonics.size() == 1);
  CHECK(extract_harmonics(s, 1000.0, 3).harmonics.size() == 3);
  CHECK_THROWS_AS(extract_harmonics(s, 0.0, 40), Error);
  CHECK_THROWS_AS(extract_harmonics(s, -5.0, 40), Error);
}

TEST_CASE("extract_harmonics: strongest peak within tolerance wins") {
  std::vector<Peak> peaks{{98.0, -30.0, 0.0}, {101.0, -10.0, 0.0}, {150.0, 0.0, 0.0}, {210.0, -20.0, 0.0}};
  const auto h = extract_harmonics(peaks, 100.0, 8000.0, 3, 0.03);
  REQUIRE(h.harmonics.size() == 3);
  CHECK(h.harmonics[0].freq_hz == 101.0);
  CHECK(h.harmonics[0].amp_linear == doctest::Approx(std::pow(10.0, -0.5)));
  CHECK(h.harmonics[1].freq_hz == 200.0);  // 210 is outside +-3%
  CHECK(h.harmonics[1].amp_linear == 0.0);
}

TEST_CASE("analyze_harmonics: parallel equals serial") {
  const std::vector<double> amps{1.0, 0.6, 0.3};
  AnalysisConfig acfg;
  const auto frames = spectrogram(harmonic_tone(246.94, amps, 1.0), acfg);
  HarmonicConfig hcfg;
  const auto par = analyze_harmonics(frames, 59, hcfg);
  const auto ser = analyze_harmonics_serial(frames, 59, hcfg);
  REQUIRE(par.size() == ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) {
    CHECK(par[i].f0_hz == ser[i].f0_hz);
    REQUIRE(par[i].harmonics.size() == ser[i].harmonics.size());
    for (std::size_t k = 0; k < par[i].harmonics.size(); ++k) {
      CHECK(par[i].harmonics[k].amp_linear == ser[i].harmonics[k].amp_linear);
    }
  }
  hcfg.refine_f0 = false;
  CHECK(analyze_harmonics(frames, 59, hcfg)[0].f0_hz == midi_to_hz(59));
}

TEST_CASE("analyze_note rejects other sample rates") {
  Waveform w = harmonic_tone(440.0, std::vector<double>{0.5}, 3.0, 22050);
  NoteMetadata note;
  note.midi_pitch = 69;
  CHECK_THROWS_WITH_AS(analyze_note(w, note, {}), doctest::Contains("22050"), Error);
}

}  // namespace
}  // namespace cepvae
