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

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "cepvae/cvae.h"

namespace cepvae {
namespace {

constexpr char kMagic[4] = {'C', 'V', 'A', 'E'};
// Bounds that keep a corrupt header from triggering huge allocations.
constexpr std::uint64_t kMaxDim = 1u << 20;
constexpr std::uint64_t kMaxParameters = 1ull << 28;

class Writer {
 public:
  void u32(std::uint32_t v) { raw(v, 4); }
  void u64(std::uint64_t v) { raw(v, 8); }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const char *p, std::size_t n) { out.insert(out.end(), p, p + n); }
  std::vector<std::uint8_t> out;

 private:
  void raw(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> b, const std::string &origin) : b_(b), origin_(origin) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(raw(4)); }
  std::uint64_t u64() { return raw(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ == b_.size(); }
  void expect_magic() {
    need(4);
    if (std::memcmp(b_.data(), kMagic, 4) != 0) fail("not a cepvae model file (bad magic)");
    pos_ = 4;
  }
  [[noreturn]] void fail(const std::string &why) const { throw Error(origin_ + ": " + why); }
  std::uint64_t bounded(std::uint64_t v, std::uint64_t limit, const char *what) const {
    if (v > limit) fail(std::string("implausible ") + what + " " + std::to_string(v));
    return v;
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) fail("truncated model file at byte " + std::to_string(pos_));
  }
  std::uint64_t raw(int n) {
    need(n);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
    pos_ += n;
    return v;
  }
  std::span<const std::uint8_t> b_;
  const std::string &origin_;
  std::size_t pos_ = 0;
};

std::uint64_t fnv1a_bytes(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const CvaeModel &m) {
  const auto &cfg = m.config();
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(cfg.input_dim));
  w.u32(static_cast<std::uint32_t>(cfg.latent_dim));
  w.u32(static_cast<std::uint32_t>(cfg.hidden_dims.size()));
  for (int h : cfg.hidden_dims) w.u32(static_cast<std::uint32_t>(h));
  w.u32(static_cast<std::uint32_t>(cfg.activation));
  w.f64(cfg.beta);
  w.f64(cfg.learning_rate);
  w.u32(static_cast<std::uint32_t>(cfg.batch_size));
  w.u32(static_cast<std::uint32_t>(cfg.epochs));
  w.u64(cfg.seed);
  w.u32(static_cast<std::uint32_t>(m.trained_pitches().size()));
  for (int p : m.trained_pitches()) w.i32(p);
  for (double v : m.cc_mean()) w.f64(v);
  for (double v : m.cc_std()) w.f64(v);
  w.u64(m.num_parameters());
  for (double v : m.parameters()) w.f64(v);
  w.u64(fnv1a_bytes(w.out));
  return std::move(w.out);
}

CvaeModel deserialize_model(std::span<const std::uint8_t> bytes, const std::string &origin) {
  Reader r(bytes, origin);
  r.expect_magic();
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion) {
    r.fail("unsupported model format version " + std::to_string(version) + " (expected " +
           std::to_string(kModelFormatVersion) + ")");
  }
  CvaeConfig cfg;
  cfg.input_dim = static_cast<int>(r.bounded(r.u32(), kMaxDim, "input_dim"));
  cfg.latent_dim = static_cast<int>(r.bounded(r.u32(), kMaxDim, "latent_dim"));
  const auto hidden = r.bounded(r.u32(), 64, "hidden layer count");
  cfg.hidden_dims.clear();
  for (std::uint64_t i = 0; i < hidden; ++i) cfg.hidden_dims.push_back(static_cast<int>(r.bounded(r.u32(), kMaxDim, "hidden size")));
  const std::uint32_t act = r.u32();
  if (act > static_cast<std::uint32_t>(Activation::kIdentity)) r.fail("unknown activation " + std::to_string(act));
  cfg.activation = static_cast<Activation>(act);
  cfg.beta = r.f64();
  cfg.learning_rate = r.f64();
  cfg.batch_size = static_cast<int>(r.u32());
  cfg.epochs = static_cast<int>(r.u32());
  cfg.seed = r.u64();
  const auto n_pitches = r.bounded(r.u32(), 128, "pitch count");
  std::vector<int> pitches;
  for (std::uint64_t i = 0; i < n_pitches; ++i) pitches.push_back(r.i32());
  std::vector<double> mean(cfg.input_dim), std_dev(cfg.input_dim);
  for (double &v : mean) v = r.f64();
  for (double &v : std_dev) v = r.f64();
  const std::uint64_t n_params = r.bounded(r.u64(), kMaxParameters, "parameter count");

  CvaeModel m = [&] {
    try {
      return CvaeModel(cfg);
    } catch (const Error &e) {
      r.fail(std::string("invalid config: ") + e.what());
    }
  }();
  if (n_params != m.num_parameters()) {
    r.fail("parameter count " + std::to_string(n_params) + " does not match the architecture (" +
           std::to_string(m.num_parameters()) + ")");
  }
  auto params = m.parameters();
  for (double &v : params) v = r.f64();
  const std::size_t body_end = r.pos();
  const std::uint64_t stored = r.u64();
  if (!r.at_end()) r.fail("trailing bytes after checksum");
  if (stored != fnv1a_bytes(bytes.first(body_end))) r.fail("checksum mismatch (corrupt file)");
  try {
    m.set_normalization(std::move(mean), std::move(std_dev));
  } catch (const Error &e) {
    r.fail(e.what());
  }
  m.set_trained_pitches(std::move(pitches));
  return m;
}

void save_model(const CvaeModel &m, const std::filesystem::path &path) {
  const auto bytes = serialize_model(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

CvaeModel load_model(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes, path.string());
}

}  // namespace cepvae
