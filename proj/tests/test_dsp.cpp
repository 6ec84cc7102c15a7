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
#include <filesystem>
#include <fstream>

#include "support/oracles.hpp"
#include "vqe/audio.hpp"
#include "vqe/fft.hpp"
#include "vqe/resample.hpp"
#include "vqe/rng.hpp"

using namespace vqe;

namespace {

AudioClip sine(double freq, int rate, double seconds, double amp = 0.5) {
  AudioClip clip;
  clip.sample_rate = rate;
  const size_t n = size_t(seconds * rate);
  clip.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    clip.samples[i] = float(amp * std::sin(2.0 * M_PI * freq * double(i) / rate));
  return clip;
}

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "vqe_dsp_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("fft roundtrip recovers the signal") {
  Rng rng(7);
  std::vector<std::complex<double>> x(1024);
  for (auto& v : x) v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  auto y = x;
  fft::forward(y.data(), y.size());
  fft::inverse(y.data(), y.size());
  for (size_t i = 0; i < x.size(); ++i) {
    CHECK(std::abs(y[i] - x[i]) < 1e-12);
  }
}

TEST_CASE("fft convolve matches direct convolution") {
  Rng rng(11);
  std::vector<double> a(131), b(17);
  for (auto& v : a) v = rng.uniform(-1, 1);
  for (auto& v : b) v = rng.uniform(-1, 1);
  const auto fast = fft::convolve(a, b);
  std::vector<double> direct(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) direct[i + j] += a[i] * b[j];
  REQUIRE(fast.size() == direct.size());
  for (size_t i = 0; i < fast.size(); ++i)
    CHECK(fast[i] == doctest::Approx(direct[i]).epsilon(1e-9));
}

TEST_CASE("wav float32 roundtrip is exact") {
  const auto clip = sine(440.0, 16000, 0.1);
  const auto path = temp_dir() / "f32.wav";
  write_wav(path, clip, WavFormat::float32);
  const auto back = read_wav(path);
  REQUIRE(back.sample_rate == clip.sample_rate);
  REQUIRE(back.samples.size() == clip.samples.size());
  for (size_t i = 0; i < clip.samples.size(); ++i) CHECK(back.samples[i] == clip.samples[i]);
}

TEST_CASE("wav pcm16 roundtrip within quantization") {
  const auto clip = sine(440.0, 16000, 0.05);
  const auto path = temp_dir() / "p16.wav";
  write_wav(path, clip, WavFormat::pcm16);
  const auto back = read_wav(path);
  REQUIRE(back.samples.size() == clip.samples.size());
  for (size_t i = 0; i < clip.samples.size(); ++i)
    CHECK(std::fabs(back.samples[i] - clip.samples[i]) < 1.0 / 32000.0);
}

TEST_CASE("wav reader rejects junk and missing files") {
  const auto path = temp_dir() / "junk.wav";
  {
    std::ofstream os(path, std::ios::binary);
    os << "this is not a wav file at all, definitely not";
  }
  CHECK_THROWS(read_wav(path));
  CHECK_THROWS(read_wav(temp_dir() / "missing.wav"));
}

TEST_CASE("resample identity returns the clip unchanged") {
  const auto clip = sine(1000.0, 25000, 0.2);
  const auto out = resample(clip, 25000);
  REQUIRE(out.samples.size() == clip.samples.size());
  for (size_t i = 0; i < clip.samples.size(); ++i) CHECK(out.samples[i] == clip.samples[i]);
}

TEST_CASE("resample 50k->25k keeps a 1 kHz tone at 1 kHz") {
  const auto clip = sine(1000.0, 50000, 1.0);
  const auto out = resample(clip, 25000);
  CHECK(out.sample_rate == 25000);
  // length == round(len * target / source) +- 1
  CHECK(std::llabs(int64_t(out.samples.size()) - 25000) <= 1);
  const double peak_hz = oracles::dominant_frequency_hz(out);
  CHECK(peak_hz == doctest::Approx(1000.0).epsilon(0.002));
}

TEST_CASE("resample rational 16k->25k preserves tone frequency") {
  const auto clip = sine(700.0, 16000, 0.8);
  const auto out = resample(clip, 25000);
  CHECK(std::llabs(int64_t(out.samples.size()) - std::llround(0.8 * 25000)) <= 1);
  CHECK(oracles::dominant_frequency_hz(out) == doctest::Approx(700.0).epsilon(0.003));
}

TEST_CASE("resampled pure tone keeps > 60 dB spurious-free range") {
  const auto clip = sine(1000.0, 50000, 1.0);
  const auto out = resample(clip, 25000);
  // Window the steady middle and compare the peak bin to the largest bin
  // more than 5 bins away from it.
  const size_t n = 16384;
  std::vector<double> x(n);
  for (size_t i = 0; i < n; ++i)
    x[i] = double(out.samples[i + 2000]) *
           (0.5 - 0.5 * std::cos(2.0 * M_PI * double(i) / double(n)));
  const auto bins = fft::real_forward(x, n);
  size_t peak = 0;
  double peak_mag = 0.0;
  for (size_t k = 1; k < bins.size(); ++k)
    if (std::abs(bins[k]) > peak_mag) {
      peak_mag = std::abs(bins[k]);
      peak = k;
    }
  double spur = 0.0;
  for (size_t k = 1; k < bins.size(); ++k) {
    if (k + 5 >= peak && k <= peak + 5) continue;
    spur = std::max(spur, std::abs(bins[k]));
  }
  const double sfdr_db = 20.0 * std::log10(peak_mag / spur);
  CHECK(sfdr_db > 60.0);
}

TEST_CASE("resample round trip correlates > 0.99 for band-limited input") {
  AudioClip clip;
  clip.sample_rate = 25000;
  clip.samples.assign(25000, 0.0f);
  Rng rng(3);
  for (int tone = 0; tone < 12; ++tone) {
    const double f = rng.uniform(100.0, 8000.0);
    const double ph = rng.uniform(0.0, 2.0 * M_PI);
    for (size_t i = 0; i < clip.samples.size(); ++i)
      clip.samples[i] += float(0.08 * std::sin(2.0 * M_PI * f * double(i) / 25000.0 + ph));
  }
  const auto up = resample(clip, 50000);
  const auto back = resample(up, 25000);
  const size_t n = std::min(clip.samples.size(), back.samples.size());
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    dot += double(clip.samples[i]) * double(back.samples[i]);
    na += double(clip.samples[i]) * double(clip.samples[i]);
    nb += double(back.samples[i]) * double(back.samples[i]);
  }
  CHECK(dot / std::sqrt(na * nb) > 0.99);
}

TEST_CASE("resample rejects bad rates") {
  const auto clip = sine(440.0, 16000, 0.05);
  CHECK_THROWS(resample(clip, 0));
  CHECK_THROWS(resample(clip, -100));
}
