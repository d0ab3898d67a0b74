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

#include "cepvae/analysis.h"

#include <algorithm>

namespace cepvae {

std::vector<HarmonicFrame> analyze_waveform(const Waveform &w, int midi_hint, const PipelineConfig &cfg) {
  const auto spectra = spectrogram(w, cfg.analysis);
  return analyze_harmonics(spectra, midi_hint, cfg.harmonic, cfg.analysis.floor_db);
}

std::vector<CepstralFrame> analyze_note(const Waveform &w, const NoteMetadata &note, const PipelineConfig &cfg) {
  if (w.sample_rate_hz != kCanonicalSampleRate) {
    throw Error(note.source_file.string() + ": sample rate " + std::to_string(w.sample_rate_hz) + " Hz, expected " +
                std::to_string(kCanonicalSampleRate) + " Hz (resampling is not supported)");
  }
  const auto sustain = extract_sustain(w, cfg.sustain);
  const auto harmonics = analyze_waveform(sustain, note.midi_pitch, cfg);

  std::vector<CepstralFrame> frames;
  frames.reserve(harmonics.size());
  for (const auto &h : harmonics) {
    const bool voiced = std::any_of(h.harmonics.begin(), h.harmonics.end(),
                                    [](const Harmonic &x) { return x.amp_linear > 0.0; });
    if (!voiced) continue;
    auto cf = cepstral_envelope(h, cfg.envelope);
    cf.midi_pitch = note.midi_pitch;
    cf.velocity = note.velocity;
    cf.note_id = note.note_id;
    frames.push_back(std::move(cf));
  }
  return frames;
}

std::vector<CepstralFrame> analyze_dataset(const DatasetIndex &index, const PipelineConfig &cfg) {
  std::vector<CepstralFrame> all;
  for (const auto &note : index.entries) {
    auto frames = analyze_note(load_wav(note.source_file), note, cfg);
    all.insert(all.end(), std::make_move_iterator(frames.begin()), std::make_move_iterator(frames.end()));
  }
  return all;
}

}  // namespace cepvae
