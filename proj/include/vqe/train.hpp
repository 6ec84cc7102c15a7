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

#ifndef VQE_TRAIN_HPP
#define VQE_TRAIN_HPP

#include <array>
#include <functional>
#include <optional>
#include <ostream>

#include "vqe/checkpoint.hpp"
#include "vqe/features.hpp"
#include "vqe/loss.hpp"
#include "vqe/manifest.hpp"
#include "vqe/model.hpp"
#include "vqe/train_config.hpp"
#include "vqe/warp.hpp"

namespace vqe {

// Records plus their audio preloaded at the working rate, indexed by
// (gender, label) for the batch sampler.
struct TrainDataset {
  std::vector<ManifestRecord> records;
  std::vector<AudioClip> clips;
  std::array<std::vector<size_t>, 4> groups;  // [gender * 2 + label]

  static TrainDataset from_manifest(const std::filesystem::path& manifest_path,
                                    const std::vector<ManifestRecord>& records);
  static TrainDataset from_clips(std::vector<ManifestRecord> records,
                                 std::vector<AudioClip> clips);
  const std::vector<size_t>& group(Gender g, Label l) const {
    return groups[size_t(g) * 2 + size_t(l)];
  }
};

// One batch: indices into the dataset, M dysphonic then M healthy, all of
// one uniformly chosen gender, sampled without replacement within the batch.
struct BatchIndices {
  Gender gender = Gender::female;
  std::vector<size_t> dysphonic;
  std::vector<size_t> healthy;
};

BatchIndices sample_batch(const TrainDataset& data, int samples_per_class, Rng& rng);

struct StepStats {
  double ge2e = 0.0, nll = 0.0, combined = 0.0;
  double omega = 0.0, sim_bias = 0.0;
};

// Scratch reused across steps: forward caches, per-patch gradient buffers
// (summed in patch order so the result is independent of thread count), and
// the reduced gradient.
template <typename T>
struct BatchWorkspace {
  std::vector<typename Model<T>::Cache> caches;
  std::vector<std::vector<T>> grad_bufs;
  std::vector<T> grads;
};

// Loss of a prepared batch under the ablation flags; no gradients.
template <typename T>
StepStats compute_batch_loss(const Model<T>& model, const std::vector<std::vector<T>>& patches,
                             int bins, const AblationFlags& flags, double lambda,
                             bool ge2e_exclude_self, BatchWorkspace<T>& ws, int threads = 1);

// Same, but also fills ws.grads (layout matches model.params()).
template <typename T>
StepStats compute_loss_and_gradients(const Model<T>& model,
                                     const std::vector<std::vector<T>>& patches, int bins,
                                     const AblationFlags& flags, double lambda,
                                     bool ge2e_exclude_self, BatchWorkspace<T>& ws,
                                     int threads = 1);

struct TrainState {
  Model<float> model;
  uint64_t step = 0;
  Rng rng;
  double loss_sum = 0.0;
  uint64_t loss_count = 0;

  TrainState(const EncoderConfig& cfg, uint64_t seed)
      : model(cfg, derive_seed(seed, 0xE0C0DE)), rng(seed) {}
  explicit TrainState(const Checkpoint& ckpt);

  Checkpoint to_checkpoint(const TrainConfig& cfg) const;
};

// One SGD step on an already prepared batch of patches.
StepStats train_step(TrainState& state, const std::vector<std::vector<float>>& patches, int bins,
                     const TrainConfig& cfg, BatchWorkspace<float>& ws);

struct TrainHooks {
  std::ostream* log = nullptr;  // CSV: step,ge2e,nll,combined,omega,bias
  std::optional<std::filesystem::path> checkpoint_dir;
  std::function<void(const TrainState&, const StepStats&)> on_step;
};

// Runs sample -> (warp when enabled) -> spectrogram -> crop -> forward ->
// loss -> update until cfg.steps, checkpointing every checkpoint_interval.
Checkpoint train(const TrainDataset& data, const WarpBank& bank, const TrainConfig& cfg,
                 const TrainHooks& hooks = {});

// Continues a checkpoint for extra_steps further steps (same config, new
// corpus). expected_model, when given, must match the checkpoint's.
Checkpoint fine_tune(const Checkpoint& ckpt, const TrainDataset& data, const WarpBank& bank,
                     uint64_t extra_steps = 2500, const TrainHooks& hooks = {},
                     const std::optional<EncoderConfig>& expected_model = std::nullopt);

// Resume an interrupted run to its original step budget.
Checkpoint resume_training(const Checkpoint& ckpt, const TrainDataset& data, const WarpBank& bank,
                           const TrainHooks& hooks = {});

}  // namespace vqe

#endif  // VQE_TRAIN_HPP
