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

#ifndef CEPVAE_DATASET_H_
#define CEPVAE_DATASET_H_

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cepvae/common.h"

namespace cepvae {

inline constexpr int kMinMidiPitch = 21;
inline constexpr int kMaxMidiPitch = 108;
inline constexpr int kMinVelocity = 1;
inline constexpr int kMaxVelocity = 127;

struct NoteMetadata {
  std::string note_id;
  int midi_pitch = 60;
  int velocity = 100;
  std::string instrument_family;
  std::filesystem::path source_file;
};

enum class PitchParity { kAll, kOdd, kEven };

PitchParity parse_parity(std::string_view text);
std::string_view parity_name(PitchParity parity);
bool parity_accepts(PitchParity parity, int midi_pitch);

// Conjunction of the set constraints; an empty set means "any".
struct FilterSpec {
  PitchParity parity = PitchParity::kAll;
  std::set<std::string> families;
  std::set<int> velocities;

  bool empty() const { return parity == PitchParity::kAll && families.empty() && velocities.empty(); }
  bool accepts(const NoteMetadata &note) const;
  std::string describe() const;
};

struct DatasetIndex {
  std::vector<NoteMetadata> entries;  // sorted by note_id
  std::filesystem::path root;
  std::optional<FilterSpec> filter;
};

class DatasetError : public Error {
 public:
  using Error::Error;
};

// Reads <root>/examples.json (NSynth schema: note_id -> {pitch, velocity,
// instrument_family_str, ...}); audio lives at <root>/audio/<note_id>.wav.
DatasetIndex load_dataset(const std::filesystem::path &root, const FilterSpec &filter = {});

// Writes examples.json for `notes`; audio files are the caller's business.
void write_dataset_index(const std::filesystem::path &root, const std::vector<NoteMetadata> &notes);

}  // namespace cepvae

#endif  // CEPVAE_DATASET_H_
