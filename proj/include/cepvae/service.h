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

#ifndef CEPVAE_SERVICE_H_
#define CEPVAE_SERVICE_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "cepvae/cvae.h"
#include "cepvae/synthesis.h"

namespace httplib {
class Server;
}

namespace cepvae {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path model_path;
  double max_duration_s = 10.0;
  int timeout_s = 10;
  bool cors = true;  // permissive Access-Control-Allow-Origin

  void validate() const;
};

struct HttpReply {
  int status = 200;
  std::string content_type;
  std::string body;
};

// Stateless request handlers over one immutable model. Every handler is
// const and may run concurrently.
class SynthesisService {
 public:
  SynthesisService(CvaeModel model, ServiceConfig cfg);
  // Loads cfg.model_path.
  static SynthesisService from_config(const ServiceConfig &cfg);

  const CvaeModel &model() const { return model_; }
  const ServiceConfig &config() const { return cfg_; }

  // GET /model/info
  HttpReply model_info() const;
  // POST /synthesize {pitch, velocity, z, duration_s} -> audio/wav
  HttpReply synthesize(std::string_view body) const;
  // POST /envelope {pitch, velocity, z} -> [{freq_hz, amp_db}, ...]
  HttpReply envelope(std::string_view body) const;

  // Registers the routes (and CORS handling when enabled) on `server`.
  void mount(httplib::Server &server) const;
  // Blocking; returns false if the socket could not be bound.
  bool listen() const;

 private:
  CvaeModel model_;
  ServiceConfig cfg_;
  GenerationConfig generation_;
  std::string info_;
};

}  // namespace cepvae

#endif  // CEPVAE_SERVICE_H_
