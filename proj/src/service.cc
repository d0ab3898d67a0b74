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

#include "cepvae/service.h"

#include <cmath>

#include "cepvae/dataset.h"
#include "httplib.h"
#include "json.hpp"

namespace cepvae {
namespace {

using nlohmann::json;

constexpr int kEnvelopeMaxHarmonics = 40;

// Validation failure carrying the HTTP status and offending field.
struct RequestError {
  int status;
  std::string field;
  std::string message;
};

HttpReply json_reply(int status, const json &body) { return {status, "application/json", body.dump()}; }

HttpReply error_reply(const RequestError &e) {
  return json_reply(e.status, {{"error", e.message}, {"field", e.field}});
}

struct Query {
  double pitch = 0.0;
  int velocity = 0;
  Eigen::VectorXd z;
};

json parse_body(std::string_view body) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw RequestError{400, "", "request body is not valid JSON"};
  if (!doc.is_object()) throw RequestError{400, "", "request body must be a JSON object"};
  return doc;
}

const json &field(const json &doc, const char *name) {
  auto it = doc.find(name);
  if (it == doc.end()) throw RequestError{400, name, std::string("missing field '") + name + "'"};
  return *it;
}

Query parse_query(const json &doc, int latent_dim) {
  Query q;
  const auto &pitch = field(doc, "pitch");
  if (!pitch.is_number()) throw RequestError{400, "pitch", "pitch must be a number"};
  q.pitch = pitch.get<double>();
  if (!std::isfinite(q.pitch) || q.pitch < kMinMidiPitch || q.pitch > kMaxMidiPitch) {
    throw RequestError{400, "pitch", "pitch must lie in [" + std::to_string(kMinMidiPitch) + ", " +
                                         std::to_string(kMaxMidiPitch) + "]"};
  }
  const auto &velocity = field(doc, "velocity");
  if (!velocity.is_number_integer()) throw RequestError{400, "velocity", "velocity must be an integer"};
  const auto v = velocity.get<long long>();
  if (v < kMinVelocity || v > kMaxVelocity) {
    throw RequestError{400, "velocity", "velocity must lie in [" + std::to_string(kMinVelocity) + ", " +
                                            std::to_string(kMaxVelocity) + "]"};
  }
  q.velocity = static_cast<int>(v);
  const auto &z = field(doc, "z");
  if (!z.is_array() || z.size() != static_cast<std::size_t>(latent_dim)) {
    throw RequestError{400, "z", "z must be an array of " + std::to_string(latent_dim) + " numbers"};
  }
  q.z.resize(latent_dim);
  for (int i = 0; i < latent_dim; ++i) {
    if (!z[i].is_number() || !std::isfinite(z[i].get<double>())) {
      throw RequestError{400, "z", "z[" + std::to_string(i) + "] must be a finite number"};
    }
    q.z[i] = z[i].get<double>();
  }
  return q;
}

}  // namespace

void ServiceConfig::validate() const {
  if (!(max_duration_s > 0.0)) throw Error("max duration must be positive");
  if (port < 0 || port > 65535) throw Error("port out of range");
  if (timeout_s <= 0) throw Error("timeout must be positive");
}

SynthesisService::SynthesisService(CvaeModel model, ServiceConfig cfg)
    : model_(std::move(model)), cfg_(std::move(cfg)) {
  cfg_.validate();
  const auto &mc = model_.config();
  json info = {{"format_version", kModelFormatVersion},
               {"latent_dim", mc.latent_dim},
               {"num_coeffs", mc.input_dim},
               {"hidden_dims", mc.hidden_dims},
               {"pitch_min", kMinMidiPitch},
               {"pitch_max", kMaxMidiPitch},
               {"velocity_min", kMinVelocity},
               {"velocity_max", kMaxVelocity},
               {"sample_rate_hz", generation_.sample_rate_hz},
               {"max_duration_s", cfg_.max_duration_s},
               {"trained_pitches", model_.trained_pitches()}};
  info_ = info.dump();
}

SynthesisService SynthesisService::from_config(const ServiceConfig &cfg) {
  return SynthesisService(load_model(cfg.model_path), cfg);
}

HttpReply SynthesisService::model_info() const { return {200, "application/json", info_}; }

HttpReply SynthesisService::synthesize(std::string_view body) const {
  try {
    const json doc = parse_body(body);
    const Query q = parse_query(doc, model_.latent_dim());
    const auto &dur = field(doc, "duration_s");
    if (!dur.is_number()) throw RequestError{400, "duration_s", "duration_s must be a number"};
    const double duration = dur.get<double>();
    if (!std::isfinite(duration) || duration <= 0.0) {
      throw RequestError{400, "duration_s", "duration_s must be positive"};
    }
    if (duration > cfg_.max_duration_s) {
      throw RequestError{413, "duration_s",
                         "duration_s exceeds the service limit of " + std::to_string(cfg_.max_duration_s) + " s"};
    }
    SynthesisRequest req;
    req.midi_pitch = q.pitch;
    req.velocity = q.velocity;
    req.z = q.z;
    req.duration_s = duration;
    const auto wav = encode_wav(generate_note(model_, req, generation_));
    return {200, "audio/wav", std::string(wav.begin(), wav.end())};
  } catch (const RequestError &e) {
    return error_reply(e);
  } catch (const Error &e) {
    return error_reply({400, "", e.what()});
  }
}

HttpReply SynthesisService::envelope(std::string_view body) const {
  try {
    const Query q = parse_query(parse_body(body), model_.latent_dim());
    auto env = decoded_envelope(model_, q.z, build_condition(q.pitch, q.velocity));
    const auto h = harmonic_amps_from_envelope(env, midi_to_hz(q.pitch), kEnvelopeMaxHarmonics,
                                               generation_.sample_rate_hz);
    json points = json::array();
    for (const auto &x : h.harmonics) {
      points.push_back({{"freq_hz", x.freq_hz}, {"amp_db", envelope_at(env, x.freq_hz, generation_.sample_rate_hz)}});
    }
    return json_reply(200, points);
  } catch (const RequestError &e) {
    return error_reply(e);
  } catch (const Error &e) {
    return error_reply({400, "", e.what()});
  }
}

void SynthesisService::mount(httplib::Server &server) const {
  auto send = [](httplib::Response &res, const HttpReply &reply) {
    res.status = reply.status;
    res.set_content(reply.body, reply.content_type);
  };
  server.Get("/model/info", [this, send](const httplib::Request &, httplib::Response &res) {
    send(res, model_info());
  });
  server.Post("/synthesize", [this, send](const httplib::Request &req, httplib::Response &res) {
    send(res, synthesize(req.body));
  });
  server.Post("/envelope", [this, send](const httplib::Request &req, httplib::Response &res) {
    send(res, envelope(req.body));
  });
  if (cfg_.cors) {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Options(R"(/.*)", [](const httplib::Request &, httplib::Response &res) { res.status = 204; });
  }
  server.set_read_timeout(cfg_.timeout_s, 0);
  server.set_write_timeout(cfg_.timeout_s, 0);
}

bool SynthesisService::listen() const {
  httplib::Server server;
  mount(server);
  return server.listen(cfg_.host, cfg_.port);
}

}  // namespace cepvae
