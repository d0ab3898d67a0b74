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

#ifndef CEPVAE_WAV_H_
#define CEPVAE_WAV_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cepvae/common.h"

namespace cepvae {

// Mono PCM signal. Samples lie in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = kCanonicalSampleRate;

  std::size_t size() const { return samples.size(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

enum class WavErrorKind { kMissingFile, kMalformedHeader, kUnsupportedEncoding, kIo };

class WavError : public Error {
 public:
  WavError(WavErrorKind kind, const std::string &path, const std::string &detail);
  WavErrorKind kind() const { return kind_; }
  const std::string &path() const { return path_; }

 private:
  WavErrorKind kind_;
  std::string path_;
};

// Reads a RIFF/WAVE file. Accepts 16-bit integer PCM and 32-bit IEEE float;
// multichannel input keeps channel 0 and prints a warning.
Waveform load_wav(const std::filesystem::path &path);

// Same as load_wav but from an in-memory image; `origin` names the source in
// error messages.
Waveform decode_wav(std::span<const std::uint8_t> bytes, const std::string &origin);

// 16-bit little-endian mono PCM. Samples are clamped to [-1, 1] and scaled
// by 32768, so 16-bit input round-trips bit-exactly.
std::vector<std::uint8_t> encode_wav(const Waveform &w);
void write_wav(const std::filesystem::path &path, const Waveform &w);

struct SustainWindow {
  double start_s = 0.5;
  double end_s = 2.5;
};

// Samples in [start_s, end_s), boundaries rounded to the nearest sample.
Waveform extract_sustain(const Waveform &w, SustainWindow window);

}  // namespace cepvae

#endif  // CEPVAE_WAV_H_
