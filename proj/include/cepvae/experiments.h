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

#ifndef CEPVAE_EXPERIMENTS_H_
#define CEPVAE_EXPERIMENTS_H_

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cepvae/cvae.h"
#include "cepvae/source_filter.h"

namespace cepvae {

// Mean encoder mu over the frames (each encoded with its own condition).
Eigen::VectorXd posterior_mean(const CvaeModel &m, std::span<const CepstralFrame> frames);

// Mean CCs per (midi_pitch, velocity); the reference envelopes for evaluation.
using EnvelopeKey = std::pair<int, int>;
std::map<EnvelopeKey, std::vector<double>> mean_ccs_by_condition(std::span<const CepstralFrame> frames);

struct HoldoutRow {
  int midi_pitch = 0;
  std::vector<int> velocities;
  double lsd_prior = 0.0;                  // generated with z = 0 vs truth
  double lsd_neighbor_latent = 0.0;        // z = posterior mean of adjacent trained pitches
  std::optional<double> lsd_truth_below;   // truth(p-1) vs truth(p)
  std::optional<double> lsd_truth_above;   // truth(p+1) vs truth(p)
  bool passed = false;                     // lsd_prior below every available neighbour distance
};

struct HoldoutReport {
  std::vector<int> trained_pitches;
  std::vector<HoldoutRow> rows;
  int grid_size = 256;

  double fraction_passed() const;
  std::string to_json() const;
};

// Pitches present in `truth` but absent from the model's training set are
// generated and compared against their ground truth and adjacent trained
// pitches. Distances are averaged over the velocities each row covers.
HoldoutReport eval_holdout(const CvaeModel &m, std::span<const CepstralFrame> truth, int grid_size = 256);

}  // namespace cepvae

#endif  // CEPVAE_EXPERIMENTS_H_
