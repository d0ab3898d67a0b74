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

#include "cepvae/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>

#include "cepvae/common.h"

namespace cepvae {

struct RealFft::Plan {
  fftw_plan handle = nullptr;
  ~Plan() {
    if (handle) fftw_destroy_plan(handle);
  }
};

namespace {

// The FFTW planner is not thread-safe; plan creation is serialized here.
std::mutex &planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t bytes) : ptr(fftw_malloc(bytes)) {
    if (!ptr) throw Error("fftw_malloc failed");
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer &) = delete;
  FftwBuffer &operator=(const FftwBuffer &) = delete;
  void *ptr;
};

}  // namespace

RealFft::RealFft(int size) : size_(size) {
  if (size <= 0) throw Error("fft size must be positive");
  static std::map<int, std::shared_ptr<const Plan>> cache;
  std::lock_guard lock(planner_mutex());
  auto it = cache.find(size);
  if (it != cache.end()) {
    plan_ = it->second;
    return;
  }
  FftwBuffer in(sizeof(double) * size);
  FftwBuffer out(sizeof(fftw_complex) * (size / 2 + 1));
  auto plan = std::make_shared<Plan>();
  plan->handle = fftw_plan_dft_r2c_1d(size, static_cast<double *>(in.ptr),
                                      static_cast<fftw_complex *>(out.ptr), FFTW_ESTIMATE);
  if (!plan->handle) throw Error("fftw plan creation failed for size " + std::to_string(size));
  cache.emplace(size, plan);
  plan_ = std::move(plan);
}

std::vector<std::complex<double>> RealFft::execute(std::span<const double> input) const {
  if (input.size() > static_cast<std::size_t>(size_)) throw Error("fft input longer than transform size");
  const int bins = size_ / 2 + 1;
  // fftw_malloc alignment matches the planning buffers, as new-array execution requires.
  FftwBuffer in(sizeof(double) * size_);
  FftwBuffer out(sizeof(fftw_complex) * bins);
  auto *real = static_cast<double *>(in.ptr);
  std::copy(input.begin(), input.end(), real);
  std::fill(real + input.size(), real + size_, 0.0);
  auto *spec = static_cast<fftw_complex *>(out.ptr);
  fftw_execute_dft_r2c(plan_->handle, real, spec);
  std::vector<std::complex<double>> result(bins);
  for (int k = 0; k < bins; ++k) result[k] = {spec[k][0], spec[k][1]};
  return result;
}

}  // namespace cepvae
