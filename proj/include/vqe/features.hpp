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

#ifndef VQE_FEATURES_HPP
#define VQE_FEATURES_HPP

#include <vector>

#include "vqe/audio.hpp"
#include "vqe/rng.hpp"

namespace vqe {

inline constexpr int kPatchFrames = 24;

struct SpectrogramConfig {
  int window_length = 2048;
  int hop = 512;
  int fft_length = 2048;
  // Values are log(magnitude + exp(log_floor)), so digital silence maps to
  // exactly log_floor.
  double log_floor = -23.025850929940457;  // log(1e-10)

  int bins() const { return fft_length / 2 + 1; }
  void validate() const;
};

// Log-magnitude STFT, Hann window, no center padding:
// frame_count = 1 + floor((len - window_length) / hop).
struct Spectrogram {
  int frames = 0;
  int bins = 0;
  std::vector<float> values;  // frames x bins, row-major

  const float* row(int t) const { return values.data() + size_t(t) * size_t(bins); }
};

// Fixed 24-frame model input.
struct SpectrogramPatch {
  int bins = 0;
  std::vector<float> values;  // kPatchFrames x bins

  const float* row(int t) const { return values.data() + size_t(t) * size_t(bins); }
};

Spectrogram spectrogram(const AudioClip& clip, const SpectrogramConfig& cfg = {});

// Contiguous 24-frame crop with a uniform start; spectrograms shorter than
// 24 frames are cyclically tiled first.
SpectrogramPatch random_crop(const Spectrogram& spec, Rng& rng);

// Window starts 0, hop_frames, 2*hop_frames, ...; a short spectrogram yields
// one tiled window.
std::vector<SpectrogramPatch> sliding_windows(const Spectrogram& spec, int hop_frames = 6);

}  // namespace vqe

#endif  // VQE_FEATURES_HPP
