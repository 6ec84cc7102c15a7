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

#ifndef VQE_CHECKPOINT_HPP
#define VQE_CHECKPOINT_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "vqe/train_config.hpp"

namespace vqe {

// Versioned little-endian binary container: config, weights (omega and the
// similarity bias live inside the parameter vector), optimizer state (plain
// SGD carries none), step counter, rng state, and running loss statistics.
struct Checkpoint {
  TrainConfig config;
  uint64_t step = 0;
  std::vector<float> params;
  std::string rng_state;
  double loss_sum = 0.0;
  uint64_t loss_count = 0;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace vqe

#endif  // VQE_CHECKPOINT_HPP
