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

#ifndef VQE_WARP_HPP
#define VQE_WARP_HPP

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vqe/audio.hpp"
#include "vqe/rng.hpp"

namespace vqe {

struct BankClip {
  std::string name;
  AudioClip clip;
};

// Train/eval halves of the impulse-response and noise material. The halves
// are disjoint by source file so evaluation provably uses held-out material.
struct WarpBank {
  std::vector<BankClip> ir_train, ir_eval;
  std::vector<BankClip> noise_train, noise_eval;

  void validate() const;  // throws on overlapping names or rate mismatches
};

struct WarpPolicy {
  double skip_prob = 0.5;
  double snr_range_db[2] = {0.0, 15.0};
  double pitch_range_cents[2] = {-200.0, 200.0};

  void validate() const;
};

// What one apply_random_warps call actually did; feeds the degradation log.
struct WarpLogEntry {
  std::optional<std::string> ir_file;
  std::optional<double> gaussian_snr_db;
  std::optional<std::string> noise_file;
  std::optional<double> noise_snr_db;
  size_t noise_offset = 0;
  std::optional<double> pitch_cents;
};

// Process-wide instrumentation: how often each warp method actually ran.
struct WarpCounters {
  std::atomic<uint64_t> ir_convolution{0};
  std::atomic<uint64_t> gaussian_noise{0};
  std::atomic<uint64_t> environmental_noise{0};
  std::atomic<uint64_t> pitch_shift{0};

  void reset();
  uint64_t total() const;
};
WarpCounters& warp_counters();

// Shuffles the file list with the given seed and splits it in half; an odd
// count puts the extra file in train.
std::pair<std::vector<std::string>, std::vector<std::string>>
partition_bank_files(const std::vector<std::string>& files, uint64_t seed);

// Loads a directory of WAV files (sorted by name) resampled to target_rate.
std::vector<BankClip> load_bank_dir(const std::filesystem::path& dir, int target_rate);

// Builds both banks from directories, partitioning each with the seed.
WarpBank make_warp_bank(const std::filesystem::path& ir_dir,
                        const std::filesystem::path& noise_dir, uint64_t seed, int target_rate);

void save_bank_partition(const std::filesystem::path& out_dir, const WarpBank& bank);

// Linear convolution truncated to the input length and peak-normalized to
// the dry input's peak.
AudioClip convolve_ir(const AudioClip& clip, const AudioClip& ir);

// Adds noise (cropped at `offset`) scaled so the realized SNR equals snr_db.
AudioClip add_noise(const AudioClip& clip, const AudioClip& noise, double snr_db,
                    size_t offset = 0);

// Resample-then-phase-vocoder pitch shift; duration preserved within one
// internal hop. |cents| <= 1200.
AudioClip pitch_shift(const AudioClip& clip, double cents);

// The four methods (IR convolution, Gaussian noise, environmental noise,
// pitch shift) each fire independently with probability 1 - skip_prob, in
// that fixed order. Deterministic given the rng state.
AudioClip apply_random_warps(const AudioClip& clip, const WarpBank& bank,
                             const WarpPolicy& policy, Rng& rng, WarpLogEntry* log = nullptr);

}  // namespace vqe

#endif  // VQE_WARP_HPP
