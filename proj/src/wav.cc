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

#include "cepvae/wav.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>

namespace cepvae {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::string kind_name(WavErrorKind kind) {
  switch (kind) {
    case WavErrorKind::kMissingFile: return "missing file";
    case WavErrorKind::kMalformedHeader: return "malformed header";
    case WavErrorKind::kUnsupportedEncoding: return "unsupported encoding";
    case WavErrorKind::kIo: return "i/o error";
  }
  return "wav error";
}

// Little-endian cursor over the file image.
class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, const std::string &origin)
      : bytes_(bytes), origin_(origin) {}

  bool has(std::size_t n) const { return pos_ + n <= bytes_.size(); }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void seek(std::size_t p) { pos_ = p; }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = bytes_[pos_] | (bytes_[pos_ + 1] << 8) | (bytes_[pos_ + 2] << 16) |
                      (static_cast<std::uint32_t>(bytes_[pos_ + 3]) << 24);
    pos_ += 4;
    return v;
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::string tag() {
    need(4);
    std::string t(reinterpret_cast<const char *>(bytes_.data() + pos_), 4);
    pos_ += 4;
    return t;
  }
  const std::uint8_t *at(std::size_t p) const { return bytes_.data() + p; }

 private:
  void need(std::size_t n) const {
    if (!has(n)) throw WavError(WavErrorKind::kMalformedHeader, origin_, "unexpected end of file");
  }

  std::span<const std::uint8_t> bytes_;
  const std::string &origin_;
  std::size_t pos_ = 0;
};

void put_u32(std::vector<std::uint8_t> &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u16(std::vector<std::uint8_t> &out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put_tag(std::vector<std::uint8_t> &out, const char *tag) { out.insert(out.end(), tag, tag + 4); }

}  // namespace

WavError::WavError(WavErrorKind kind, const std::string &path, const std::string &detail)
    : Error(path + ": " + kind_name(kind) + (detail.empty() ? "" : " (" + detail + ")")),
      kind_(kind),
      path_(path) {}

Waveform decode_wav(std::span<const std::uint8_t> bytes, const std::string &origin) {
  Reader r(bytes, origin);
  if (r.tag() != "RIFF") throw WavError(WavErrorKind::kMalformedHeader, origin, "missing RIFF tag");
  r.u32();
  if (r.tag() != "WAVE") throw WavError(WavErrorKind::kMalformedHeader, origin, "missing WAVE tag");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  while (r.has(8)) {
    std::string id = r.tag();
    std::uint32_t size = r.u32();
    std::size_t body = r.pos();
    if (id == "fmt ") {
      if (size < 16) throw WavError(WavErrorKind::kMalformedHeader, origin, "fmt chunk too short");
      format = r.u16();
      channels = r.u16();
      rate = r.u32();
      r.u32();  // byte rate
      r.u16();  // block align
      bits = r.u16();
      if (format == kFormatExtensible) {
        if (size < 40) throw WavError(WavErrorKind::kMalformedHeader, origin, "extensible fmt too short");
        r.u16();  // cbSize
        r.u16();  // valid bits
        r.u32();  // channel mask
        format = r.u16();  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw WavError(WavErrorKind::kMalformedHeader, origin, "data chunk before fmt");
      if (channels == 0) throw WavError(WavErrorKind::kMalformedHeader, origin, "zero channels");
      if (rate == 0) throw WavError(WavErrorKind::kMalformedHeader, origin, "zero sample rate");
      const bool pcm16 = format == kFormatPcm && bits == 16;
      const bool float32 = format == kFormatFloat && bits == 32;
      if (!pcm16 && !float32) {
        throw WavError(WavErrorKind::kUnsupportedEncoding, origin,
                       "format " + std::to_string(format) + ", " + std::to_string(bits) + " bits");
      }
      if (size > r.remaining()) throw WavError(WavErrorKind::kMalformedHeader, origin, "data chunk truncated");
      if (channels > 1) {
        std::cerr << "warning: " << origin << ": " << channels << " channels, using channel 0\n";
      }
      const std::size_t bytes_per_sample = bits / 8;
      const std::size_t frame_bytes = bytes_per_sample * channels;
      const std::size_t n = size / frame_bytes;
      if (n == 0) throw WavError(WavErrorKind::kMalformedHeader, origin, "no samples");

      Waveform w;
      w.sample_rate_hz = static_cast<int>(rate);
      w.samples.resize(n);
      const std::uint8_t *p = r.at(body);
      for (std::size_t i = 0; i < n; ++i, p += frame_bytes) {
        if (pcm16) {
          auto s = static_cast<std::int16_t>(p[0] | (p[1] << 8));
          w.samples[i] = s / 32768.0;
        } else {
          std::uint32_t u = p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
          float f = std::bit_cast<float>(u);
          if (!std::isfinite(f)) {
            throw WavError(WavErrorKind::kMalformedHeader, origin,
                           "non-finite sample at index " + std::to_string(i));
          }
          w.samples[i] = std::clamp(static_cast<double>(f), -1.0, 1.0);
        }
      }
      return w;
    }
    std::size_t next = body + size + (size & 1);
    if (next > bytes.size()) break;
    r.seek(next);
  }
  throw WavError(WavErrorKind::kMalformedHeader, origin, have_fmt ? "no data chunk" : "no fmt chunk");
}

Waveform load_wav(const std::filesystem::path &path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw WavError(WavErrorKind::kMissingFile, path.string(), "");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError(WavErrorKind::kMissingFile, path.string(), "cannot open");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_wav(bytes, path.string());
}

std::vector<std::uint8_t> encode_wav(const Waveform &w) {
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate_hz));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate_hz) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double x : w.samples) {
    double scaled = std::round(std::clamp(x, -1.0, 1.0) * 32768.0);
    auto s = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    put_u16(out, static_cast<std::uint16_t>(s));
  }
  return out;
}

void write_wav(const std::filesystem::path &path, const Waveform &w) {
  auto bytes = encode_wav(w);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw WavError(WavErrorKind::kIo, path.string(), "cannot open for writing");
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw WavError(WavErrorKind::kIo, path.string(), "write failed");
}

Waveform extract_sustain(const Waveform &w, SustainWindow window) {
  const double rate = w.sample_rate_hz;
  const auto begin = static_cast<long long>(std::llround(window.start_s * rate));
  const auto end = static_cast<long long>(std::llround(window.end_s * rate));
  if (window.start_s < 0.0 || !(window.start_s < window.end_s) || begin < 0 || end <= begin ||
      end > static_cast<long long>(w.samples.size())) {
    throw Error("sustain window [" + std::to_string(window.start_s) + ", " + std::to_string(window.end_s) +
                "] s lies outside the " + std::to_string(w.duration_s()) + " s signal");
  }
  Waveform out;
  out.sample_rate_hz = w.sample_rate_hz;
  out.samples.assign(w.samples.begin() + begin, w.samples.begin() + end);
  return out;
}

}  // namespace cepvae
