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

#include <thread>

#include "cepvae/service.h"
#include "cepvae/synthetic.h"
#include "cepvae/wav.h"
#include "doctest.h"
#include "httplib.h"
#include "json.hpp"

namespace cepvae {
namespace {

using nlohmann::json;

// K = 32, latent 8, trained briefly on a flat envelope.
CvaeModel flat_model() {
  CvaeConfig cfg;
  cfg.hidden_dims = {16};
  cfg.epochs = 300;
  cfg.learning_rate = 1e-2;
  std::vector<CepstralFrame> frames;
  for (int p = 48; p <= 72; ++p) {
    CepstralFrame f;
    f.midi_pitch = p;
    f.velocity = 100;
    f.ccs.assign(32, 0.0);
    frames.push_back(f);
  }
  return train(frames, cfg).model;
}

const SynthesisService &service() {
  static const SynthesisService s(flat_model(), ServiceConfig{.max_duration_s = 2.0});
  return s;
}

std::string request(double pitch, int velocity, int z_len, double duration) {
  json body = {{"pitch", pitch}, {"velocity", velocity}, {"z", std::vector<double>(z_len, 0.0)}};
  if (duration > 0.0) body["duration_s"] = duration;
  return body.dump();
}

TEST_CASE("model_info") {
  const auto r = service().model_info();
  CHECK(r.status == 200);
  CHECK(r.content_type == "application/json");
  const auto info = json::parse(r.body);
  CHECK(info["latent_dim"] == 8);
  CHECK(info["num_coeffs"] == 32);
  CHECK(info["pitch_min"] == 21);
  CHECK(info["pitch_max"] == 108);
  CHECK(info["velocity_min"] == 1);
  CHECK(info["velocity_max"] == 127);
  CHECK(info["format_version"] == kModelFormatVersion);
  CHECK(service().model_info().body == r.body);
}

TEST_CASE("synthesize") {
  const auto r = service().synthesize(request(60.0, 100, 8, 0.5));
  REQUIRE(r.status == 200);
  CHECK(r.content_type == "audio/wav");
  const auto w = decode_wav(std::span(reinterpret_cast<const std::uint8_t *>(r.body.data()), r.body.size()), "body");
  CHECK(w.size() == 8000);
  CHECK(service().synthesize(request(60.0, 100, 8, 0.5)).body == r.body);
  CHECK(service().synthesize(request(60.25, 100, 8, 0.1)).status == 200);
}

TEST_CASE("synthesize validation") {
  auto check = [](const std::string &body, int status, const std::string &field) {
    const auto r = service().synthesize(body);
    CAPTURE(body);
    CHECK(r.status == status);
    const auto doc = json::parse(r.body);
    CHECK(doc["field"] == field);
  };
  const auto r = service().synthesize(request(60.0, 100, 3, 0.5));
  CHECK(r.status == 400);
  CHECK(json::parse(r.body)["error"].get<std::string>().find("8") != std::string::npos);
  check(request(60.0, 100, 3, 0.5), 400, "z");
  check(request(60.0, 100, 8, 5.0), 413, "duration_s");
  check(request(60.0, 100, 8, -1.0), 400, "duration_s");
  check(request(60.0, 100, 8, 0.0), 400, "duration_s");
  check(request(10.0, 100, 8, 0.5), 400, "pitch");
  check(request(60.0, 0, 8, 0.5), 400, "velocity");
  check(request(60.0, 200, 8, 0.5), 400, "velocity");
  check(R"({"pitch": "high", "velocity": 100, "z": [0,0,0,0,0,0,0,0], "duration_s": 1})", 400, "pitch");
  check(R"({"pitch": 60, "velocity": 100.5, "z": [0,0,0,0,0,0,0,0], "duration_s": 1})", 400, "velocity");
  check(R"({"pitch": 60, "velocity": 100, "z": [0,0,0,0,0,0,0,"x"], "duration_s": 1})", 400, "z");
  check(R"({"velocity": 100, "z": [], "duration_s": 1})", 400, "pitch");
  check("not json", 400, "");
  check("[1, 2]", 400, "");
}

TEST_CASE("envelope") {
  const auto r60 = service().envelope(request(60.0, 100, 8, 0.0));
  const auto r72 = service().envelope(request(72.0, 100, 8, 0.0));
  REQUIRE(r60.status == 200);
  const auto a = json::parse(r60.body);
  const auto b = json::parse(r72.body);
  REQUIRE(a.is_array());
  CHECK(a.size() == 30);  // k * 261.6 < 8000
  CHECK(b.size() == 15);
  CHECK(a[0]["freq_hz"].get<double>() == doctest::Approx(261.6255653));
  for (const auto &pt : a) CHECK(std::abs(pt["amp_db"].get<double>()) < 0.5);
  CHECK(service().envelope("{").status == 400);
  CHECK(service().envelope(request(60.0, 100, 2, 0.0)).status == 400);
}

TEST_CASE("HTTP server end to end") {
  httplib::Server server;
  service().mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread runner([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto info = client.Get("/model/info");
  REQUIRE(info);
  CHECK(info->status == 200);
  CHECK(json::parse(info->body)["latent_dim"] == 8);

  auto missing = client.Get("/nope");
  REQUIRE(missing);
  CHECK(missing->status == 404);

  auto audio = client.Post("/synthesize", request(64.0, 90, 8, 0.5), "application/json");
  REQUIRE(audio);
  CHECK(audio->status == 200);
  CHECK(audio->get_header_value("Content-Type") == "audio/wav");
  CHECK(audio->body.size() == 44 + 2 * 8000);

  auto bad = client.Post("/synthesize", request(64.0, 90, 8, 9.0), "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 413);

  // Concurrent identical requests return identical bytes.
  std::vector<std::string> bodies(4);
  std::vector<std::thread> workers;
  for (int i = 0; i < 4; ++i) {
    workers.emplace_back([&, i] {
      httplib::Client c("127.0.0.1", port);
      auto r = c.Post("/synthesize", request(66.5, 70, 8, 0.3), "application/json");
      if (r) bodies[i] = r->body;
    });
  }
  for (auto &t : workers) t.join();
  for (const auto &b : bodies) {
    CHECK_FALSE(b.empty());
    CHECK(b == bodies[0]);
  }

  server.stop();
  runner.join();
}

TEST_CASE("CORS headers follow the config") {
  for (bool cors : {false, true}) {
    SynthesisService svc(flat_model(), ServiceConfig{.cors = cors});
    httplib::Server server;
    svc.mount(server);
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread runner([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    httplib::Client client("127.0.0.1", port);
    auto r = client.Get("/model/info");
    REQUIRE(r);
    CHECK(r->has_header("Access-Control-Allow-Origin") == cors);
    server.stop();
    runner.join();
  }
}

TEST_CASE("ServiceConfig validation") {
  CHECK_THROWS_AS(SynthesisService(flat_model(), ServiceConfig{.max_duration_s = 0.0}), Error);
  ServiceConfig missing;
  missing.model_path = "/nonexistent.cvae";
  CHECK_THROWS_AS(SynthesisService::from_config(missing), Error);
}

}  // namespace
}  // namespace cepvae
