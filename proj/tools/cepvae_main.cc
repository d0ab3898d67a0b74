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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "cepvae/analysis.h"
#include "cepvae/cc_records.h"
#include "cepvae/experiments.h"
#include "cepvae/service.h"
#include "cepvae/synthesis.h"
#include "cepvae/synthetic.h"

namespace {

using namespace cepvae;

struct AnalysisFlags {
  PipelineConfig pipeline;
  std::string window = "hann";
  std::string f0_mode = "refine";
  std::string pitch_filter = "all";
  std::vector<std::string> families;

  void add_to(CLI::App *cmd) {
    auto &p = pipeline;
    cmd->add_option("--frame-len", p.analysis.frame_len, "analysis frame length (samples)")->capture_default_str();
    cmd->add_option("--hop", p.analysis.hop, "analysis hop (samples)")->capture_default_str();
    cmd->add_option("--fft-size", p.analysis.fft_size, "zero-padded FFT size")->capture_default_str();
    cmd->add_option("--window", window, "hann|hamming|blackman|rectangular")->capture_default_str();
    cmd->add_option("--K", p.envelope.num_coeffs, "cepstral coefficients per frame")->capture_default_str();
    cmd->add_option("--grid", p.envelope.grid_size, "envelope grid points over [0, Nyquist]")->capture_default_str();
    cmd->add_option("--sustain-start", p.sustain.start_s, "sustain window start (s)")->capture_default_str();
    cmd->add_option("--sustain-end", p.sustain.end_s, "sustain window end (s)")->capture_default_str();
    cmd->add_option("--max-harmonics", p.harmonic.max_harmonics)->capture_default_str();
    cmd->add_option("--threshold-db", p.harmonic.threshold_db, "peak threshold (dB)")->capture_default_str();
    cmd->add_option("--f0", f0_mode, "label|refine")->check(CLI::IsMember({"label", "refine"}))->capture_default_str();
    cmd->add_option("--pitch-filter", pitch_filter, "odd|even|all")->capture_default_str();
    cmd->add_option("--family", families, "instrument families to keep (repeatable)");
  }

  PipelineConfig resolve() {
    pipeline.analysis.window = parse_window(window);
    pipeline.harmonic.refine_f0 = f0_mode == "refine";
    pipeline.analysis.validate();
    pipeline.envelope.validate();
    return pipeline;
  }

  FilterSpec filter() const {
    FilterSpec f;
    f.parity = parse_parity(pitch_filter);
    f.families.insert(families.begin(), families.end());
    return f;
  }
};

Eigen::VectorXd to_latent(const std::vector<double> &v, const CvaeModel &m, const char *flag) {
  if (static_cast<int>(v.size()) != m.latent_dim()) {
    throw Error(std::string(flag) + " needs " + std::to_string(m.latent_dim()) + " values, got " +
                std::to_string(v.size()));
  }
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string join(const Eigen::VectorXd &z) {
  std::ostringstream out;
  out.precision(17);
  for (Eigen::Index i = 0; i < z.size(); ++i) out << (i ? "," : "") << z[i];
  return out.str();
}

void write_output(Waveform w, const std::string &path) {
  write_wav(path, w);
  std::printf("wrote %s samples=%zu duration_s=%.4f\n", path.c_str(), w.size(), w.duration_s());
}

std::vector<int> parse_range(const std::string &text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-', 1);
    int lo = std::stoi(item.substr(0, dash));
    int hi = dash == std::string::npos ? lo : std::stoi(item.substr(dash + 1));
    if (hi < lo) throw Error("bad range '" + item + "'");
    for (int p = lo; p <= hi; ++p) out.push_back(p);
  }
  return out;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"cepvae: cepstral CVAE analysis, training and synthesis"};
  app.require_subcommand(1);

  // analyze
  auto *analyze = app.add_subcommand("analyze", "dataset -> cepstral frame records");
  std::string a_root, a_out;
  AnalysisFlags a_flags;
  analyze->add_option("dataset_root", a_root)->required();
  analyze->add_option("--out", a_out, "output .ccs file")->required();
  a_flags.add_to(analyze);

  // train
  auto *train_cmd = app.add_subcommand("train", "frame records -> model");
  std::string t_in, t_out, t_filter = "all", t_activation = "tanh";
  CvaeConfig t_cfg;
  train_cmd->add_option("frames", t_in)->required();
  train_cmd->add_option("--out", t_out, "output model file")->required();
  train_cmd->add_option("--latent", t_cfg.latent_dim)->capture_default_str();
  train_cmd->add_option("--hidden", t_cfg.hidden_dims, "hidden widths, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  train_cmd->add_option("--beta", t_cfg.beta)->capture_default_str();
  train_cmd->add_option("--epochs", t_cfg.epochs)->capture_default_str();
  train_cmd->add_option("--seed", t_cfg.seed)->capture_default_str();
  train_cmd->add_option("--lr", t_cfg.learning_rate)->capture_default_str();
  train_cmd->add_option("--batch", t_cfg.batch_size)->capture_default_str();
  train_cmd->add_option("--activation", t_activation, "tanh|identity")
      ->check(CLI::IsMember({"tanh", "identity"}))
      ->capture_default_str();
  train_cmd->add_option("--pitch-filter", t_filter, "odd|even|all")->capture_default_str();

  // synth
  auto *synth = app.add_subcommand("synth", "render one note");
  std::string s_model, s_out;
  double s_pitch = 60.0, s_dur = 2.0;
  int s_vel = 100;
  std::uint64_t s_seed = 0;
  std::vector<double> s_z;
  synth->add_option("model", s_model)->required();
  synth->add_option("--pitch", s_pitch, "MIDI pitch (real)")->capture_default_str();
  synth->add_option("--velocity", s_vel)->capture_default_str();
  auto *s_zopt = synth->add_option("--z", s_z, "latent vector, comma separated")->delimiter(',');
  synth->add_option("--seed", s_seed, "prior draw seed when --z is absent")->excludes(s_zopt);
  synth->add_option("--dur", s_dur, "duration (s)")->capture_default_str();
  synth->add_option("--out", s_out)->required();

  // sweep
  auto *sweep = app.add_subcommand("sweep", "semi-continuous pitch sweep");
  std::string w_model, w_out;
  SweepSpec w_spec;
  int w_vel = 100;
  std::vector<double> w_z;
  sweep->add_option("model", w_model)->required();
  sweep->add_option("--from", w_spec.start_midi)->capture_default_str();
  sweep->add_option("--to", w_spec.end_midi)->capture_default_str();
  sweep->add_option("--steps", w_spec.steps)->capture_default_str();
  sweep->add_option("--step-dur", w_spec.step_duration_s, "seconds per step")->capture_default_str();
  sweep->add_option("--velocity", w_vel)->capture_default_str();
  sweep->add_option("--z", w_z, "latent vector (default: zero)")->delimiter(',');
  sweep->add_option("--out", w_out)->required();

  // hybrid
  auto *hybrid = app.add_subcommand("hybrid", "render a blend of two latents");
  std::string h_model, h_out;
  std::vector<double> h_za, h_zb;
  double h_alpha = 0.5, h_pitch = 60.0, h_dur = 1.0;
  int h_vel = 100;
  hybrid->add_option("model", h_model)->required();
  hybrid->add_option("--za", h_za)->delimiter(',')->required();
  hybrid->add_option("--zb", h_zb)->delimiter(',')->required();
  hybrid->add_option("--alpha", h_alpha)->capture_default_str();
  hybrid->add_option("--pitch", h_pitch)->capture_default_str();
  hybrid->add_option("--velocity", h_vel)->capture_default_str();
  hybrid->add_option("--dur", h_dur)->capture_default_str();
  hybrid->add_option("--out", h_out)->required();

  // encode
  auto *encode_cmd = app.add_subcommand("encode", "posterior-mean latent of a set of frames");
  std::string e_model, e_frames, e_prefix;
  encode_cmd->add_option("model", e_model)->required();
  encode_cmd->add_option("frames", e_frames)->required();
  encode_cmd->add_option("--note-prefix", e_prefix, "only frames whose note_id starts with this");

  // eval-holdout
  auto *holdout = app.add_subcommand("eval-holdout", "score generation at pitches absent from training");
  std::string o_model, o_root, o_report;
  AnalysisFlags o_flags;
  holdout->add_option("model", o_model)->required();
  holdout->add_option("dataset_root", o_root)->required();
  holdout->add_option("--report", o_report, "JSON report path")->required();
  o_flags.add_to(holdout);

  // serve
  auto *serve = app.add_subcommand("serve", "HTTP synthesis service");
  ServiceConfig v_cfg;
  std::string v_model;
  serve->add_option("model", v_model)->required();
  serve->add_option("--host", v_cfg.host)->capture_default_str();
  serve->add_option("--port", v_cfg.port)->capture_default_str();
  serve->add_option("--max-duration", v_cfg.max_duration_s, "longest request (s)")->capture_default_str();
  serve->add_option("--timeout", v_cfg.timeout_s, "socket timeout (s)")->capture_default_str();
  bool v_no_cors = false;
  serve->add_flag("--no-cors", v_no_cors, "omit the permissive CORS headers");

  // demo-dataset
  auto *demo = app.add_subcommand("demo-dataset", "write a two-instrument synthetic dataset");
  std::string d_root, d_pitches = "48-72", d_vels = "64,100";
  double d_dur = 3.0;
  demo->add_option("root", d_root)->required();
  demo->add_option("--pitches", d_pitches, "e.g. 48-72 or 60,62,64")->capture_default_str();
  demo->add_option("--velocities", d_vels)->capture_default_str();
  demo->add_option("--dur", d_dur)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::fprintf(stderr, "cepvae: error: %s\n", e.what());
    return e.get_exit_code();
  }

  try {
    if (*analyze) {
      const auto cfg = a_flags.resolve();
      const auto index = load_dataset(a_root, a_flags.filter());
      const auto frames = analyze_dataset(index, cfg);
      write_cc_records(a_out, frames);
      std::printf("analyzed notes=%zu frames=%zu K=%d out=%s\n", index.entries.size(), frames.size(),
                  cfg.envelope.num_coeffs, a_out.c_str());
    } else if (*train_cmd) {
      const auto parity = parse_parity(t_filter);
      auto frames = read_cc_records(std::filesystem::path(t_in));
      std::erase_if(frames, [&](const CepstralFrame &f) { return !parity_accepts(parity, f.midi_pitch); });
      if (frames.empty()) throw Error("no frames left after --pitch-filter " + t_filter);
      t_cfg.input_dim = static_cast<int>(frames.front().ccs.size());
      t_cfg.activation = t_activation == "tanh" ? Activation::kTanh : Activation::kIdentity;
      const auto result = train(frames, t_cfg);
      save_model(result.model, t_out);
      const auto &r = result.report;
      const auto &last = r.final;
      std::printf("trained frames=%zu steps=%zu initial_loss=%.6g final_loss=%.6g recon=%.6g kl=%.6g "
                  "seconds=%.2f checksum=%016llx out=%s\n",
                  frames.size(), r.steps, r.initial.total, last.total, last.recon, last.kl, r.wall_seconds,
                  static_cast<unsigned long long>(r.checksum), t_out.c_str());
    } else if (*synth) {
      const auto model = load_model(s_model);
      SynthesisRequest req;
      req.midi_pitch = s_pitch;
      req.velocity = s_vel;
      req.duration_s = s_dur;
      req.seed = s_seed;
      if (!s_z.empty()) req.z = to_latent(s_z, model, "--z");
      write_output(generate_note(model, req), s_out);
    } else if (*sweep) {
      const auto model = load_model(w_model);
      const Eigen::VectorXd z =
          w_z.empty() ? Eigen::VectorXd::Zero(model.latent_dim()) : to_latent(w_z, model, "--z");
      write_output(pitch_sweep(model, w_spec, z, w_vel), w_out);
    } else if (*hybrid) {
      const auto model = load_model(h_model);
      write_output(interpolate_timbre(model, to_latent(h_za, model, "--za"), to_latent(h_zb, model, "--zb"), h_alpha,
                                      h_pitch, h_vel, h_dur),
                   h_out);
    } else if (*encode_cmd) {
      const auto model = load_model(e_model);
      auto frames = read_cc_records(std::filesystem::path(e_frames));
      std::erase_if(frames, [&](const CepstralFrame &f) { return !f.note_id.starts_with(e_prefix); });
      if (frames.empty()) throw Error("no frames match --note-prefix '" + e_prefix + "'");
      std::printf("%s\n", join(posterior_mean(model, frames)).c_str());
    } else if (*holdout) {
      const auto model = load_model(o_model);
      const auto cfg = o_flags.resolve();
      const auto frames = analyze_dataset(load_dataset(o_root, o_flags.filter()), cfg);
      const auto report = eval_holdout(model, frames, cfg.envelope.grid_size);
      std::ofstream out(o_report);
      if (!out) throw Error("cannot write " + o_report);
      out << report.to_json() << '\n';
      std::printf("holdout pitches=%zu passed_fraction=%.4f report=%s\n", report.rows.size(),
                  report.fraction_passed(), o_report.c_str());
    } else if (*serve) {
      v_cfg.model_path = v_model;
      v_cfg.cors = !v_no_cors;
      const auto service = SynthesisService::from_config(v_cfg);
      std::printf("serving %s on http://%s:%d\n", v_model.c_str(), v_cfg.host.c_str(), v_cfg.port);
      std::fflush(stdout);
      if (!service.listen()) throw Error("cannot bind " + v_cfg.host + ":" + std::to_string(v_cfg.port));
    } else if (*demo) {
      const std::vector<SyntheticInstrument> instruments{
          formant_instrument("reed", FormantParams{}),
          formant_instrument("brass", FormantParams{.center_hz = 2200.0, .hz_per_semitone = 40.0,
                                                    .width_hz = 700.0, .peak_db = 18.0})};
      const auto notes =
          write_synthetic_dataset(d_root, instruments, parse_range(d_pitches), parse_range(d_vels), d_dur);
      std::printf("wrote notes=%zu root=%s\n", notes.size(), d_root.c_str());
    }
  } catch (const std::exception &e) {
    std::fprintf(stderr, "cepvae: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
