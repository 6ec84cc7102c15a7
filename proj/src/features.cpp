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

#include "vqe/features.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "vqe/fft.hpp"

namespace vqe {

void SpectrogramConfig::validate() const {
  if (window_length <= 0 || hop <= 0 || fft_length <= 0)
    throw std::invalid_argument("SpectrogramConfig: sizes must be positive");
  if (fft_length < window_length)
    throw std::invalid_argument("SpectrogramConfig: fft_length < window_length");
  if (hop > window_length)
    throw std::invalid_argument("SpectrogramConfig: hop > window_length");
  if ((fft_length & (fft_length - 1)) != 0)
    throw std::invalid_argument("SpectrogramConfig: fft_length must be a power of two");
}

Spectrogram spectrogram(const AudioClip& clip, const SpectrogramConfig& cfg) {
  clip.validate();
  cfg.validate();
  const int win = cfg.window_length;
  if (int(clip.samples.size()) < win)
    throw std::invalid_argument("spectrogram: clip shorter than one window (" +
                                std::to_string(clip.samples.size()) + " < " + std::to_string(win) +
                                " samples)");

  const int frames = 1 + int((clip.samples.size() - size_t(win)) / size_t(cfg.hop));
  const int bins = cfg.bins();
  const double eps = std::exp(cfg.log_floor);

  std::vector<double> hann(static_cast<size_t>(win));
  for (int i = 0; i < win; ++i)
    hann[size_t(i)] = 0.5 * (1.0 - std::cos(2.0 * M_PI * double(i) / double(win)));

  Spectrogram spec;
  spec.frames = frames;
  spec.bins = bins;
  spec.values.resize(size_t(frames) * size_t(bins));

  std::vector<std::complex<double>> buf(size_t(cfg.fft_length));
  for (int t = 0; t < frames; ++t) {
    const size_t start = size_t(t) * size_t(cfg.hop);
    for (int i = 0; i < win; ++i)
      buf[size_t(i)] = {double(clip.samples[start + size_t(i)]) * hann[size_t(i)], 0.0};
    for (int i = win; i < cfg.fft_length; ++i) buf[size_t(i)] = {0.0, 0.0};
    fft::forward(buf.data(), size_t(cfg.fft_length));
    float* out = spec.values.data() + size_t(t) * size_t(bins);
    for (int b = 0; b < bins; ++b) {
      const double v = std::log(std::abs(buf[size_t(b)]) + eps);
      out[b] = float(std::max(v, cfg.log_floor));
    }
  }
  return spec;
}

namespace {

SpectrogramPatch copy_patch(const Spectrogram& spec, int start) {
  SpectrogramPatch patch;
  patch.bins = spec.bins;
  patch.values.resize(size_t(kPatchFrames) * size_t(spec.bins));
  for (int t = 0; t < kPatchFrames; ++t) {
    const int src = spec.frames >= kPatchFrames ? start + t : (start + t) % spec.frames;
    std::copy(spec.row(src), spec.row(src) + spec.bins,
              patch.values.begin() + size_t(t) * size_t(spec.bins));
  }
  return patch;
}

}  // namespace

SpectrogramPatch random_crop(const Spectrogram& spec, Rng& rng) {
  if (spec.frames <= 0 || spec.bins <= 0) throw std::invalid_argument("random_crop: empty spectrogram");
  if (spec.frames <= kPatchFrames) return copy_patch(spec, 0);
  const int start = int(rng.next_below(uint64_t(spec.frames - kPatchFrames + 1)));
  return copy_patch(spec, start);
}

std::vector<SpectrogramPatch> sliding_windows(const Spectrogram& spec, int hop_frames) {
  if (spec.frames <= 0 || spec.bins <= 0)
    throw std::invalid_argument("sliding_windows: empty spectrogram");
  if (hop_frames <= 0) throw std::invalid_argument("sliding_windows: hop must be positive");
  std::vector<SpectrogramPatch> windows;
  if (spec.frames < kPatchFrames) {
    windows.push_back(copy_patch(spec, 0));
    return windows;
  }
  const int count = (spec.frames - kPatchFrames) / hop_frames + 1;
  windows.reserve(size_t(count));
  for (int k = 0; k < count; ++k) windows.push_back(copy_patch(spec, k * hop_frames));
  return windows;
}

}  // namespace vqe
