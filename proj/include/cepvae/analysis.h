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

#ifndef CEPVAE_ANALYSIS_H_
#define CEPVAE_ANALYSIS_H_

#include <vector>

#include "cepvae/dataset.h"
#include "cepvae/harmonic.h"
#include "cepvae/source_filter.h"
#include "cepvae/spectral.h"
#include "cepvae/wav.h"

namespace cepvae {

struct PipelineConfig {
  SustainWindow sustain;
  AnalysisConfig analysis;
  HarmonicConfig harmonic;
  EnvelopeConfig envelope;
};

// Spectrogram + harmonic analysis of a whole waveform (no sustain cut).
std::vector<HarmonicFrame> analyze_waveform(const Waveform &w, int midi_hint, const PipelineConfig &cfg);

// Sustain segment of one note -> labelled cepstral frames. Frames without any
// detected partial are dropped. Rejects non-canonical sample rates.
std::vector<CepstralFrame> analyze_note(const Waveform &w, const NoteMetadata &note, const PipelineConfig &cfg);

// Every entry of the index, in index order.
std::vector<CepstralFrame> analyze_dataset(const DatasetIndex &index, const PipelineConfig &cfg);

}  // namespace cepvae

#endif  // CEPVAE_ANALYSIS_H_
