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

#ifndef VQE_AUDIO_HPP
#define VQE_AUDIO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace vqe {

// Mono audio, nominal range [-1, 1]. The unit of all DSP in this library.
struct AudioClip {
  std::vector<float> samples;
  int sample_rate = 0;

  double duration() const { return double(samples.size()) / double(sample_rate); }
  float peak() const;
  double rms() const;

  // Throws if empty, non-positive rate, or non-finite samples.
  void validate() const;
};

enum class WavFormat { pcm16, float32 };

AudioClip read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const AudioClip& clip,
               WavFormat format = WavFormat::float32);

}  // namespace vqe

#endif  // VQE_AUDIO_HPP
