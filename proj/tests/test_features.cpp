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

#include <doctest.h>

#include <cmath>
#include <set>

#include "vqe/features.hpp"

using namespace vqe;

namespace {

AudioClip sine(double freq, int rate, size_t n, double amp = 0.5) {
  AudioClip clip;
  clip.sample_rate = rate;
  clip.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    clip.samples[i] = float(amp * std::sin(2.0 * M_PI * freq * double(i) / rate));
  return clip;
}

Spectrogram spec_with_frames(int frames) {
  // Synthesizes a spectrogram directly; frame t has constant value t.
  Spectrogram s;
  s.frames = frames;
  s.bins = 1025;
  s.values.resize(size_t(frames) * 1025);
  for (int t = 0; t < frames; ++t)
    for (int b = 0; b < 1025; ++b) s.values[size_t(t) * 1025 + size_t(b)] = float(t);
  return s;
}

}  // namespace

TEST_CASE("spectrogram: 1025 bins per frame and the exact frame count") {
  const auto clip = sine(500.0, 25000, 2048 + 5 * 512 + 13);
  const auto spec = spectrogram(clip);
  CHECK(spec.bins == 1025);
  CHECK(spec.frames == 6);  // 1 + floor((len - 2048)/512)
}

TEST_CASE("spectrogram: digital silence sits exactly at the log floor") {
  AudioClip clip;
  clip.sample_rate = 25000;
  clip.samples.assign(4096, 0.0f);
  SpectrogramConfig cfg;
  const auto spec = spectrogram(clip, cfg);
  for (float v : spec.values) CHECK(v == doctest::Approx(cfg.log_floor).epsilon(1e-6));
}

TEST_CASE("spectrogram: 1 kHz tone at 25 kHz peaks in bin 82") {
  const auto clip = sine(1000.0, 25000, 8192);
  const auto spec = spectrogram(clip);
  for (int t = 0; t < spec.frames; ++t) {
    const float* row = spec.row(t);
    int arg = 0;
    for (int b = 1; b < spec.bins; ++b)
      if (row[b] > row[arg]) arg = b;
    CHECK(arg == 82);  // round(1000/25000 * 2048)
  }
}

TEST_CASE("spectrogram: clip shorter than a window is an error") {
  const auto clip = sine(500.0, 25000, 2047);
  CHECK_THROWS(spectrogram(clip));
}

TEST_CASE("spectrogram: doubling amplitude raises values by log 2") {
  auto clip = sine(800.0, 25000, 6144, 0.25);
  const auto spec1 = spectrogram(clip);
  for (auto& s : clip.samples) s *= 2.0f;
  const auto spec2 = spectrogram(clip);
  SpectrogramConfig cfg;
  int checked = 0;
  for (size_t i = 0; i < spec1.values.size(); ++i) {
    if (spec1.values[i] > cfg.log_floor + 3.0) {
      CHECK(double(spec2.values[i]) - double(spec1.values[i]) ==
            doctest::Approx(std::log(2.0)).epsilon(0.01));
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("spectrogram: identical clips produce bit-identical output") {
  const auto clip = sine(123.0, 25000, 5000);
  const auto a = spectrogram(clip);
  const auto b = spectrogram(clip);
  REQUIRE(a.values.size() == b.values.size());
  for (size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("random_crop: T=24 returns the whole spectrogram for any rng") {
  const auto spec = spec_with_frames(24);
  Rng rng(1);
  const auto patch = random_crop(spec, rng);
  REQUIRE(patch.values.size() == size_t(24) * 1025);
  for (int t = 0; t < 24; ++t) CHECK(patch.row(t)[0] == float(t));
}

TEST_CASE("random_crop: T=100 start covers [0, 76] over many draws") {
  const auto spec = spec_with_frames(100);
  Rng rng(2);
  std::set<int> starts;
  for (int i = 0; i < 10000; ++i) {
    const auto patch = random_crop(spec, rng);
    starts.insert(int(patch.row(0)[0]));
  }
  CHECK(*starts.begin() == 0);
  CHECK(*starts.rbegin() == 76);
  CHECK(starts.size() == 77);
}

TEST_CASE("random_crop: T=10 tiles cyclically with period 10") {
  const auto spec = spec_with_frames(10);
  Rng rng(3);
  const auto patch = random_crop(spec, rng);
  REQUIRE(patch.values.size() == size_t(24) * 1025);
  for (int t = 0; t < 24; ++t) CHECK(patch.row(t)[0] == float(t % 10));
}

TEST_CASE("sliding_windows: T=24 yields exactly one window") {
  const auto spec = spec_with_frames(24);
  CHECK(sliding_windows(spec).size() == 1);
}

TEST_CASE("sliding_windows: T=36 yields starts 0, 6, 12") {
  const auto spec = spec_with_frames(36);
  const auto wins = sliding_windows(spec);
  REQUIRE(wins.size() == 3);  // floor((36-24)/6) + 1
  CHECK(wins[0].row(0)[0] == 0.0f);
  CHECK(wins[1].row(0)[0] == 6.0f);
  CHECK(wins[2].row(0)[0] == 12.0f);
}

TEST_CASE("sliding_windows: T=23 yields one tiled window") {
  const auto spec = spec_with_frames(23);
  const auto wins = sliding_windows(spec);
  REQUIRE(wins.size() == 1);
  CHECK(wins[0].row(23)[0] == 0.0f);  // frame 23 wraps to 0
}

TEST_CASE("patches are always 24 x bins") {
  for (int frames : {5, 24, 31, 64, 200}) {
    const auto spec = spec_with_frames(frames);
    Rng rng(uint64_t(frames));
    CHECK(random_crop(spec, rng).values.size() == size_t(24) * 1025);
    for (const auto& w : sliding_windows(spec))
      CHECK(w.values.size() == size_t(24) * 1025);
  }
}
