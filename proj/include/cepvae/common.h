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

#ifndef CEPVAE_COMMON_H_
#define CEPVAE_COMMON_H_

#include <stdexcept>
#include <string>

namespace cepvae {

inline constexpr int kCanonicalSampleRate = 16000;
inline constexpr double kDefaultFloorDb = -100.0;

// Base class for every error the library reports.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &what) : std::runtime_error(what) {}
};

}  // namespace cepvae

#endif  // CEPVAE_COMMON_H_
