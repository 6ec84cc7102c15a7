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

#include "vqe/split.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "vqe/rng.hpp"

namespace vqe {

std::pair<std::vector<ManifestRecord>, std::vector<ManifestRecord>>
split_speaker_disjoint(const std::vector<ManifestRecord>& records, const SplitSpec& spec) {
  if (records.empty()) throw std::invalid_argument("split_speaker_disjoint: empty manifest");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw std::invalid_argument("split_speaker_disjoint: train_fraction must be in (0, 1)");

  // Unique speakers in first-appearance order, so the shuffle below is the
  // only source of randomness.
  std::vector<std::string> speakers;
  {
    std::unordered_set<std::string> seen;
    for (const auto& r : records)
      if (seen.insert(r.speaker_id).second) speakers.push_back(r.speaker_id);
  }
  if (speakers.size() < 2)
    throw std::invalid_argument("split_speaker_disjoint: need at least 2 speakers, got " +
                                std::to_string(speakers.size()));

  Rng rng(spec.seed);
  for (size_t i = speakers.size() - 1; i > 0; --i) {
    const size_t j = size_t(rng.next_below(i + 1));
    std::swap(speakers[i], speakers[j]);
  }

  // Nearest integer, ties toward train.
  const size_t n_train =
      size_t(std::floor(spec.train_fraction * double(speakers.size()) + 0.5));

  std::unordered_set<std::string> train_set(speakers.begin(),
                                            speakers.begin() + std::ptrdiff_t(n_train));
  std::vector<ManifestRecord> train, validation;
  for (const auto& r : records) {
    if (train_set.count(r.speaker_id))
      train.push_back(r);
    else
      validation.push_back(r);
  }
  return {std::move(train), std::move(validation)};
}

}  // namespace vqe
