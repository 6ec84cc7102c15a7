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

#ifndef VQE_RESAMPLE_HPP
#define VQE_RESAMPLE_HPP

#include "vqe/audio.hpp"

namespace vqe {

inline constexpr int kWorkingRate = 25000;

// Kaiser-windowed-sinc polyphase resampling. A clip already at target_rate is
// returned unchanged sample-for-sample. Output length is
// round(len * target / source) exactly.
AudioClip resample(const AudioClip& clip, int target_rate = kWorkingRate);

// Resampling by an arbitrary positive ratio of output rate to input rate,
// expressed as the rational up/down. Sample rate of the result is left equal
// to the input's (used by pitch shifting, where the ratio is not a rate
// change but a time-axis rescale).
AudioClip resample_ratio(const AudioClip& clip, int up, int down);

}  // namespace vqe

#endif  // VQE_RESAMPLE_HPP
