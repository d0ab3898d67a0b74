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

#ifndef CEPVAE_FFT_H_
#define CEPVAE_FFT_H_

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace cepvae {

// Real-to-complex forward transform of a fixed size, backed by FFTW.
// Construction goes through a process-wide plan cache; execute() is safe to
// call concurrently from several threads on the same object.
class RealFft {
 public:
  explicit RealFft(int size);

  int size() const { return size_; }

  // `input` is zero-padded (or must not exceed) size(); returns size()/2 + 1 bins.
  std::vector<std::complex<double>> execute(std::span<const double> input) const;

 private:
  struct Plan;
  int size_;
  std::shared_ptr<const Plan> plan_;
};

}  // namespace cepvae

#endif  // CEPVAE_FFT_H_
