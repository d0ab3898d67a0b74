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

#include "cepvae/cc_records.h"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

namespace cepvae {
namespace {

void put_real(std::string &line, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  line.append(buf, end);
}

template <typename T>
T parse_field(std::string_view text, const std::string &where) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(where + ": cannot parse field '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    fields.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

}  // namespace

void write_cc_records(std::ostream &out, const std::vector<CepstralFrame> &frames) {
  out << "# cepvae-ccs v1: note_id frame_index midi_pitch velocity f0_hz gain_db c_0..c_{K-1}\n";
  std::string line;
  for (const auto &f : frames) {
    if (f.note_id.empty() || f.note_id.find_first_of(" \t\r\n") != std::string::npos) {
      throw Error("note_id '" + f.note_id + "' is empty or contains whitespace");
    }
    line = f.note_id;
    line += '\t' + std::to_string(f.frame_index) + '\t' + std::to_string(f.midi_pitch) + '\t' +
            std::to_string(f.velocity) + '\t';
    put_real(line, f.f0_hz);
    line += '\t';
    put_real(line, f.gain_db);
    for (double c : f.ccs) {
      line += '\t';
      put_real(line, c);
    }
    out << line << '\n';
  }
}

void write_cc_records(const std::filesystem::path &path, const std::vector<CepstralFrame> &frames) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  write_cc_records(out, frames);
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<CepstralFrame> read_cc_records(std::istream &in, const std::string &origin) {
  std::vector<CepstralFrame> frames;
  std::string line;
  std::size_t line_no = 0;
  std::size_t k = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    const auto fields = split_tabs(line);
    if (fields.size() < 7) throw Error(where + ": expected at least 7 fields, found " + std::to_string(fields.size()));
    CepstralFrame f;
    f.note_id = std::string(fields[0]);
    f.frame_index = parse_field<int>(fields[1], where);
    f.midi_pitch = parse_field<int>(fields[2], where);
    f.velocity = parse_field<int>(fields[3], where);
    f.f0_hz = parse_field<double>(fields[4], where);
    f.gain_db = parse_field<double>(fields[5], where);
    for (std::size_t i = 6; i < fields.size(); ++i) f.ccs.push_back(parse_field<double>(fields[i], where));
    if (frames.empty()) {
      k = f.ccs.size();
    } else if (f.ccs.size() != k) {
      throw Error(where + ": record has " + std::to_string(f.ccs.size()) + " coefficients, expected " +
                  std::to_string(k));
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<CepstralFrame> read_cc_records(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_cc_records(in, path.string());
}

}  // namespace cepvae
