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

#ifndef VQE_TRAIN_CONFIG_HPP
#define VQE_TRAIN_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "vqe/model.hpp"
#include "vqe/warp.hpp"

namespace vqe {

struct AblationFlags {
  bool data_warping = true;       // DW
  bool classification_loss = true;  // CLL
  bool contrastive_loss = true;     // CNL

  bool operator==(const AblationFlags&) const = default;
};

struct TrainConfig {
  EncoderConfig model;
  WarpPolicy warp;
  int samples_per_class = 16;  // M
  uint64_t steps = 50000;
  double learning_rate = 0.001;
  double lambda = 0.5;
  uint64_t seed = 250;
  AblationFlags ablation;
  uint64_t checkpoint_interval = 1000;
  int threads = 0;  // 0 = hardware concurrency
  bool ge2e_exclude_self = false;

  // Throws on contract violations; returns human-readable warnings (block
  // counts below 3 capture dysphonic features poorly).
  std::vector<std::string> validate() const;
};

}  // namespace vqe

#endif  // VQE_TRAIN_CONFIG_HPP
