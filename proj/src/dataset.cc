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

#include "cepvae/dataset.h"

#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace cepvae {

using nlohmann::json;

PitchParity parse_parity(std::string_view text) {
  if (text == "all") return PitchParity::kAll;
  if (text == "odd") return PitchParity::kOdd;
  if (text == "even") return PitchParity::kEven;
  throw Error("unknown pitch filter '" + std::string(text) + "' (expected odd, even or all)");
}

std::string_view parity_name(PitchParity parity) {
  switch (parity) {
    case PitchParity::kOdd: return "odd";
    case PitchParity::kEven: return "even";
    case PitchParity::kAll: break;
  }
  return "all";
}

bool parity_accepts(PitchParity parity, int midi_pitch) {
  switch (parity) {
    case PitchParity::kOdd: return midi_pitch % 2 != 0;
    case PitchParity::kEven: return midi_pitch % 2 == 0;
    case PitchParity::kAll: break;
  }
  return true;
}

bool FilterSpec::accepts(const NoteMetadata &note) const {
  if (!parity_accepts(parity, note.midi_pitch)) return false;
  if (!families.empty() && !families.contains(note.instrument_family)) return false;
  if (!velocities.empty() && !velocities.contains(note.velocity)) return false;
  return true;
}

std::string FilterSpec::describe() const {
  std::ostringstream os;
  os << "pitch=" << parity_name(parity);
  if (!families.empty()) {
    os << " family=";
    for (auto it = families.begin(); it != families.end(); ++it) os << (it == families.begin() ? "" : ",") << *it;
  }
  if (!velocities.empty()) {
    os << " velocity=";
    for (auto it = velocities.begin(); it != velocities.end(); ++it)
      os << (it == velocities.begin() ? "" : ",") << *it;
  }
  return os.str();
}

DatasetIndex load_dataset(const std::filesystem::path &root, const FilterSpec &filter) {
  const auto index_path = root / "examples.json";
  std::ifstream in(index_path);
  if (!in) throw DatasetError("missing index file " + index_path.string());

  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception &e) {
    throw DatasetError(index_path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw DatasetError(index_path.string() + ": top level must be an object");

  // std::map keeps note_id order deterministic.
  std::map<std::string, NoteMetadata> notes;
  for (const auto &[note_id, value] : doc.items()) {
    NoteMetadata note;
    note.note_id = note_id;
    try {
      note.midi_pitch = value.at("pitch").get<int>();
      note.velocity = value.at("velocity").get<int>();
      note.instrument_family = value.value("instrument_family_str", std::string{});
    } catch (const json::exception &e) {
      throw DatasetError(index_path.string() + ": entry '" + note_id + "': " + e.what());
    }
    if (note.midi_pitch < kMinMidiPitch || note.midi_pitch > kMaxMidiPitch) {
      throw DatasetError("entry '" + note_id + "': pitch " + std::to_string(note.midi_pitch) + " outside [" +
                         std::to_string(kMinMidiPitch) + ", " + std::to_string(kMaxMidiPitch) + "]");
    }
    if (note.velocity < kMinVelocity || note.velocity > kMaxVelocity) {
      throw DatasetError("entry '" + note_id + "': velocity " + std::to_string(note.velocity) + " outside [" +
                         std::to_string(kMinVelocity) + ", " + std::to_string(kMaxVelocity) + "]");
    }
    note.source_file = root / "audio" / (note_id + ".wav");
    std::error_code ec;
    if (!std::filesystem::is_regular_file(note.source_file, ec)) {
      throw DatasetError("entry '" + note_id + "' references missing audio " + note.source_file.string());
    }
    notes.emplace(note_id, std::move(note));
  }

  DatasetIndex index;
  index.root = root;
  if (!filter.empty()) index.filter = filter;
  for (auto &[id, note] : notes) {
    if (filter.accepts(note)) index.entries.push_back(std::move(note));
  }
  return index;
}

void write_dataset_index(const std::filesystem::path &root, const std::vector<NoteMetadata> &notes) {
  json doc = json::object();
  for (const auto &n : notes) {
    doc[n.note_id] = {{"note_str", n.note_id},
                      {"pitch", n.midi_pitch},
                      {"velocity", n.velocity},
                      {"instrument_family_str", n.instrument_family},
                      {"sample_rate", kCanonicalSampleRate}};
  }
  std::filesystem::create_directories(root);
  std::ofstream out(root / "examples.json");
  if (!out) throw DatasetError("cannot write " + (root / "examples.json").string());
  out << doc.dump(2) << '\n';
}

}  // namespace cepvae
