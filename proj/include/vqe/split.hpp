// Copyright 2026 The VQE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VQE_SPLIT_HPP
#define VQE_SPLIT_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "vqe/manifest.hpp"

namespace vqe {

struct SplitSpec {
  double train_fraction = 0.7;
  uint64_t seed = 0;
};

// Speaker-disjoint split: every session of a speaker lands on one side.
// Train speaker count is round(train_fraction * speakers), ties toward train.
// Record order within each side follows the input manifest.
std::pair<std::vector<ManifestRecord>, std::vector<ManifestRecord>>
split_speaker_disjoint(const std::vector<ManifestRecord>& records, const SplitSpec& spec);

}  // namespace vqe

#endif  // VQE_SPLIT_HPP
