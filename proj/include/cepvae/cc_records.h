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

#ifndef CEPVAE_CC_RECORDS_H_
#define CEPVAE_CC_RECORDS_H_

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "cepvae/source_filter.h"

namespace cepvae {

// Line-delimited training set: one CepstralFrame per line, tab separated,
//   note_id frame_index midi_pitch velocity f0_hz gain_db c_0 ... c_{K-1}
// Reals use the shortest round-trip decimal form. Lines starting with '#'
// are comments. See docs/ccs_format.md.
void write_cc_records(std::ostream &out, const std::vector<CepstralFrame> &frames);
void write_cc_records(const std::filesystem::path &path, const std::vector<CepstralFrame> &frames);

// Every record must carry the same number of coefficients.
std::vector<CepstralFrame> read_cc_records(std::istream &in, const std::string &origin = "<stream>");
std::vector<CepstralFrame> read_cc_records(const std::filesystem::path &path);

}  // namespace cepvae

#endif  // CEPVAE_CC_RECORDS_H_
