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

// Parallel kernels against their serial references. Run with
// OMP_NUM_THREADS set to compare thread counts.

#include <random>

#include <benchmark/benchmark.h>

#include "cepvae/cvae.h"
#include "cepvae/harmonic.h"
#include "cepvae/spectral.h"
#include "cepvae/synthetic.h"

namespace {

using namespace cepvae;

const Waveform &tone() {
  static const Waveform w = harmonic_tone(220.0, std::vector<double>{0.4, 0.2, 0.1, 0.05, 0.03, 0.02}, 4.0);
  return w;
}

const std::vector<SpectralFrame> &frames() {
  static const auto f = spectrogram_serial(tone(), AnalysisConfig{});
  return f;
}

template <auto Fn>
void BM_Spectrogram(benchmark::State &state) {
  const AnalysisConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(Fn(tone(), cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(frames().size()));
}
BENCHMARK(BM_Spectrogram<spectrogram>)->Name("spectrogram/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Spectrogram<spectrogram_serial>)->Name("spectrogram/serial")->Unit(benchmark::kMillisecond);

template <auto Fn>
void BM_Harmonics(benchmark::State &state) {
  const HarmonicConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(Fn(frames(), 57, cfg, kDefaultFloorDb));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(frames().size()));
}
BENCHMARK(BM_Harmonics<analyze_harmonics>)->Name("harmonics/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Harmonics<analyze_harmonics_serial>)->Name("harmonics/serial")->Unit(benchmark::kMillisecond);

template <auto Fn>
void BM_BatchGradient(benchmark::State &state) {
  const auto m = CvaeModel::initialize(CvaeConfig{});
  const auto batch_size = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  std::vector<TrainingSample> batch;
  std::vector<Eigen::VectorXd> eps;
  for (int i = 0; i < batch_size; ++i) {
    Eigen::VectorXd x(m.input_dim()), e(m.latent_dim());
    for (auto &v : x) v = n01(rng);
    for (auto &v : e) v = n01(rng);
    batch.push_back({x, build_condition(40 + i % 40, 100)});
    eps.push_back(e);
  }
  std::vector<double> grad(m.num_parameters());
  for (auto _ : state) benchmark::DoNotOptimize(Fn(m, batch, eps, grad));
  state.SetItemsProcessed(state.iterations() * batch_size);
}
BENCHMARK(BM_BatchGradient<batch_gradient>)->Name("batch_gradient/parallel")->Arg(64)->Arg(256);
BENCHMARK(BM_BatchGradient<batch_gradient_serial>)->Name("batch_gradient/serial")->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
