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

#include "cepvae/experiments.h"

#include <algorithm>
#include <set>

#include "cepvae/synthesis.h"
#include "json.hpp"

namespace cepvae {

Eigen::VectorXd posterior_mean(const CvaeModel &m, std::span<const CepstralFrame> frames) {
  if (frames.empty()) throw Error("posterior_mean needs at least one frame");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(m.latent_dim());
  for (const auto &f : frames) acc += encode(m, m.normalize(f.ccs), build_condition(f.midi_pitch, f.velocity)).mu;
  return acc / static_cast<double>(frames.size());
}

std::map<EnvelopeKey, std::vector<double>> mean_ccs_by_condition(std::span<const CepstralFrame> frames) {
  std::map<EnvelopeKey, std::vector<double>> sums;
  std::map<EnvelopeKey, int> counts;
  for (const auto &f : frames) {
    auto &s = sums[{f.midi_pitch, f.velocity}];
    if (s.empty()) s.assign(f.ccs.size(), 0.0);
    if (s.size() != f.ccs.size()) throw Error("frames disagree on the number of coefficients");
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += f.ccs[i];
    ++counts[{f.midi_pitch, f.velocity}];
  }
  for (auto &[key, s] : sums)
    for (double &v : s) v /= counts[key];
  return sums;
}

double HoldoutReport::fraction_passed() const {
  if (rows.empty()) return 0.0;
  const auto passed = std::count_if(rows.begin(), rows.end(), [](const HoldoutRow &r) { return r.passed; });
  return static_cast<double>(passed) / static_cast<double>(rows.size());
}

std::string HoldoutReport::to_json() const {
  nlohmann::json doc;
  doc["trained_pitches"] = trained_pitches;
  doc["grid_size"] = grid_size;
  doc["default_z_mode"] = "prior_mean";
  doc["held_out"] = nlohmann::json::array();
  for (const auto &r : rows) {
    nlohmann::json row = {{"midi_pitch", r.midi_pitch},
                          {"velocities", r.velocities},
                          {"lsd_db_prior_z", r.lsd_prior},
                          {"lsd_db_neighbor_posterior_z", r.lsd_neighbor_latent},
                          {"passed", r.passed}};
    row["lsd_db_truth_below"] = r.lsd_truth_below ? nlohmann::json(*r.lsd_truth_below) : nlohmann::json();
    row["lsd_db_truth_above"] = r.lsd_truth_above ? nlohmann::json(*r.lsd_truth_above) : nlohmann::json();
    doc["held_out"].push_back(row);
  }
  doc["num_held_out"] = rows.size();
  doc["fraction_passed"] = fraction_passed();
  return doc.dump(2);
}

HoldoutReport eval_holdout(const CvaeModel &m, std::span<const CepstralFrame> truth, int grid_size) {
  if (truth.empty()) throw Error("no ground-truth frames");
  const auto means = mean_ccs_by_condition(truth);
  std::set<int> pitches;
  for (const auto &[key, ccs] : means) pitches.insert(key.first);
  if (pitches.size() < 2) throw Error("ground truth covers a single pitch: no adjacent pitches to compare against");

  const std::set<int> trained(m.trained_pitches().begin(), m.trained_pitches().end());
  HoldoutReport report;
  report.trained_pitches = m.trained_pitches();
  report.grid_size = grid_size;

  auto truth_grid = [&](int pitch, int velocity) -> std::optional<std::vector<double>> {
    auto it = means.find({pitch, velocity});
    if (it == means.end()) return std::nullopt;
    return envelope_shape_on_grid(it->second, grid_size);
  };

  for (int p : pitches) {
    if (trained.contains(p)) continue;
    HoldoutRow row;
    row.midi_pitch = p;
    double sum_prior = 0.0, sum_neighbor = 0.0, sum_below = 0.0, sum_above = 0.0;
    int n = 0, n_below = 0, n_above = 0;
    for (const auto &[key, ccs] : means) {
      if (key.first != p) continue;
      const int v = key.second;
      const auto below = trained.contains(p - 1) ? truth_grid(p - 1, v) : std::nullopt;
      const auto above = trained.contains(p + 1) ? truth_grid(p + 1, v) : std::nullopt;
      if (!below && !above) continue;
      const auto target = envelope_shape_on_grid(ccs, grid_size);
      const ConditionVector c = build_condition(p, v);

      const auto prior = decoded_envelope_grid(m, Eigen::VectorXd::Zero(m.latent_dim()), c, grid_size);
      std::vector<CepstralFrame> neighbours;
      for (const auto &f : truth) {
        if (f.velocity == v && ((below && f.midi_pitch == p - 1) || (above && f.midi_pitch == p + 1))) {
          neighbours.push_back(f);
        }
      }
      const auto from_neighbours = decoded_envelope_grid(m, posterior_mean(m, neighbours), c, grid_size);

      sum_prior += log_spectral_distance(prior, target);
      sum_neighbor += log_spectral_distance(from_neighbours, target);
      ++n;
      if (below) {
        sum_below += log_spectral_distance(*below, target);
        ++n_below;
      }
      if (above) {
        sum_above += log_spectral_distance(*above, target);
        ++n_above;
      }
      row.velocities.push_back(v);
    }
    if (n == 0) {
      throw Error("held-out pitch " + std::to_string(p) + " has no adjacent trained pitch in the ground truth");
    }
    row.lsd_prior = sum_prior / n;
    row.lsd_neighbor_latent = sum_neighbor / n;
    if (n_below) row.lsd_truth_below = sum_below / n_below;
    if (n_above) row.lsd_truth_above = sum_above / n_above;
    row.passed = (!row.lsd_truth_below || row.lsd_prior < *row.lsd_truth_below) &&
                 (!row.lsd_truth_above || row.lsd_prior < *row.lsd_truth_above);
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace cepvae
