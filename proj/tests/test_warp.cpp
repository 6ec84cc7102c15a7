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

#include "support/oracles.hpp"
#include "vqe/synth.hpp"
#include "vqe/warp.hpp"

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

AudioClip random_clip(size_t n, int rate, uint64_t seed) {
  Rng rng(seed);
  AudioClip clip;
  clip.sample_rate = rate;
  clip.samples.resize(n);
  for (auto& s : clip.samples) s = float(rng.uniform(-0.5, 0.5));
  return clip;
}

WarpBank tiny_bank(uint64_t seed, int rate, size_t min_noise_len) {
  WarpBank bank;
  for (int i = 0; i < 2; ++i) {
    bank.ir_train.push_back({"ir_t" + std::to_string(i), make_impulse_response(seed + i, rate)});
    bank.ir_eval.push_back({"ir_e" + std::to_string(i), make_impulse_response(seed + 10 + i, rate)});
    AudioClip noise =
        make_environment_noise(seed + 20 + i, rate, double(min_noise_len) / rate + 0.5);
    bank.noise_train.push_back({"no_t" + std::to_string(i), noise});
    bank.noise_eval.push_back(
        {"no_e" + std::to_string(i), make_environment_noise(seed + 30 + i, rate, 1.0)});
  }
  return bank;
}

}  // namespace

TEST_CASE("partition: 10 files split 5/5 and disjoint") {
  std::vector<std::string> files;
  for (int i = 0; i < 10; ++i) files.push_back("f" + std::to_string(i) + ".wav");
  auto [train, eval] = partition_bank_files(files, 5);
  CHECK(train.size() == 5);
  CHECK(eval.size() == 5);
  std::set<std::string> all(train.begin(), train.end());
  for (const auto& f : eval) CHECK(all.insert(f).second);
  CHECK(all.size() == 10);
}

TEST_CASE("partition: 7 files gives 4 train / 3 eval") {
  std::vector<std::string> files;
  for (int i = 0; i < 7; ++i) files.push_back("f" + std::to_string(i));
  auto [train, eval] = partition_bank_files(files, 0);
  CHECK(train.size() == 4);
  CHECK(eval.size() == 3);
}

TEST_CASE("partition: deterministic per seed, error below 2 files") {
  std::vector<std::string> files = {"a", "b", "c", "d", "e"};
  auto p1 = partition_bank_files(files, 99);
  auto p2 = partition_bank_files(files, 99);
  CHECK(p1.first == p2.first);
  CHECK(p1.second == p2.second);
  CHECK_THROWS(partition_bank_files({"only"}, 0));
}

TEST_CASE("convolve_ir: unit impulse is identity") {
  const auto clip = random_clip(2000, 25000, 1);
  AudioClip ir;
  ir.sample_rate = 25000;
  ir.samples = {1.0f};
  const auto out = convolve_ir(clip, ir);
  REQUIRE(out.samples.size() == clip.samples.size());
  for (size_t i = 0; i < clip.samples.size(); ++i)
    CHECK(std::fabs(out.samples[i] - clip.samples[i]) < 1e-6);
}

TEST_CASE("convolve_ir: delayed impulse shifts the input") {
  const auto clip = random_clip(512, 25000, 2);
  AudioClip ir;
  ir.sample_rate = 25000;
  ir.samples.assign(8, 0.0f);
  ir.samples[5] = 1.0f;
  const auto out = convolve_ir(clip, ir);
  // peak-normalized to the dry peak; shift by 5 with the same content
  for (size_t i = 5; i < 300; ++i)
    CHECK(out.samples[i] == doctest::Approx(clip.samples[i - 5]).epsilon(1e-4));
  for (size_t i = 0; i < 5; ++i) CHECK(std::fabs(out.samples[i]) < 1e-5);
}

TEST_CASE("convolve_ir: matches the direct-sum oracle") {
  const auto clip = random_clip(256, 25000, 3);
  auto ir = random_clip(32, 25000, 4);
  const auto out = convolve_ir(clip, ir);
  auto direct = oracles::direct_convolution(clip.samples, ir.samples);
  direct.resize(clip.samples.size());
  double direct_peak = 0.0;
  for (double v : direct) direct_peak = std::max(direct_peak, std::fabs(v));
  const double gain = double(clip.peak()) / direct_peak;
  for (size_t i = 0; i < direct.size(); ++i)
    CHECK(std::fabs(double(out.samples[i]) - direct[i] * gain) < 1e-6);
}

TEST_CASE("convolve_ir: sample-rate mismatch is an error") {
  const auto clip = random_clip(256, 25000, 5);
  auto ir = random_clip(16, 16000, 6);
  CHECK_THROWS(convolve_ir(clip, ir));
}

TEST_CASE("add_noise: 0 dB makes signal and scaled noise RMS equal") {
  const auto clip = sine(440.0, 25000, 0.3);
  const auto noise = random_clip(10000, 25000, 7);
  const auto out = add_noise(clip, noise, 0.0, 100);
  std::vector<float> added(clip.samples.size());
  for (size_t i = 0; i < added.size(); ++i) added[i] = out.samples[i] - clip.samples[i];
  const double snr =
      20.0 * std::log10(oracles::rms_of(clip.samples) / oracles::rms_of(added));
  CHECK(std::fabs(snr) < 0.1);
}

TEST_CASE("add_noise: 15 dB realized within 0.1 dB") {
  const auto clip = sine(200.0, 25000, 0.4);
  const auto noise = random_clip(20000, 25000, 8);
  const auto out = add_noise(clip, noise, 15.0, 3000);
  std::vector<float> added(clip.samples.size());
  for (size_t i = 0; i < added.size(); ++i) added[i] = out.samples[i] - clip.samples[i];
  const double snr =
      20.0 * std::log10(oracles::rms_of(clip.samples) / oracles::rms_of(added));
  CHECK(snr == doctest::Approx(15.0).epsilon(0.007));
}

TEST_CASE("add_noise: silent inputs are errors") {
  AudioClip silent;
  silent.sample_rate = 25000;
  silent.samples.assign(1000, 0.0f);
  const auto noise = random_clip(2000, 25000, 9);
  CHECK_THROWS(add_noise(silent, noise, 10.0));
  const auto clip = sine(300.0, 25000, 0.05);
  AudioClip silent_noise;
  silent_noise.sample_rate = 25000;
  silent_noise.samples.assign(5000, 0.0f);
  CHECK_THROWS(add_noise(clip, silent_noise, 10.0));
  CHECK_THROWS(add_noise(clip, random_clip(100, 25000, 10), 10.0));  // noise too short
}

TEST_CASE("pitch_shift: zero cents is the identity") {
  const auto clip = sine(440.0, 25000, 0.5);
  const auto out = pitch_shift(clip, 0.0);
  REQUIRE(out.samples.size() == clip.samples.size());
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < clip.samples.size(); ++i) {
    dot += double(clip.samples[i]) * double(out.samples[i]);
    na += double(clip.samples[i]) * double(clip.samples[i]);
    nb += double(out.samples[i]) * double(out.samples[i]);
  }
  CHECK(dot / std::sqrt(na * nb) > 0.99);
}

TEST_CASE("pitch_shift: +200 cents moves 440 Hz to ~493.9 Hz") {
  const auto clip = sine(440.0, 25000, 1.0);
  const auto out = pitch_shift(clip, 200.0);
  CHECK(std::llabs(int64_t(out.samples.size()) - int64_t(clip.samples.size())) <= 256);
  const double peak = oracles::dominant_frequency_hz(out);
  CHECK(std::fabs(peak - 440.0 * std::pow(2.0, 200.0 / 1200.0)) < 2.0);
}

TEST_CASE("pitch_shift: -200 cents moves 440 Hz to ~391.9 Hz") {
  const auto clip = sine(440.0, 25000, 1.0);
  const auto out = pitch_shift(clip, -200.0);
  const double peak = oracles::dominant_frequency_hz(out);
  CHECK(std::fabs(peak - 440.0 * std::pow(2.0, -200.0 / 1200.0)) < 2.0);
}

TEST_CASE("pitch_shift: out-of-range cents rejected") {
  const auto clip = sine(440.0, 25000, 0.2);
  CHECK_THROWS(pitch_shift(clip, 1500.0));
  CHECK_THROWS(pitch_shift(clip, -1500.0));
}

TEST_CASE("apply_random_warps: all-skip path returns bit-identical audio") {
  const auto clip = random_clip(4000, 25000, 11);
  const auto bank = tiny_bank(1, 25000, clip.samples.size());
  WarpPolicy policy;
  policy.skip_prob = 1.0;
  Rng rng(5);
  const auto out = apply_random_warps(clip, bank, policy, rng);
  REQUIRE(out.samples.size() == clip.samples.size());
  for (size_t i = 0; i < clip.samples.size(); ++i) CHECK(out.samples[i] == clip.samples[i]);
}

TEST_CASE("apply_random_warps: same rng seed gives identical output") {
  const auto clip = sine(200.0, 25000, 0.3);
  const auto bank = tiny_bank(2, 25000, clip.samples.size());
  WarpPolicy policy;
  Rng rng_a(77), rng_b(77);
  const auto a = apply_random_warps(clip, bank, policy, rng_a);
  const auto b = apply_random_warps(clip, bank, policy, rng_b);
  REQUIRE(a.samples.size() == b.samples.size());
  for (size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);
}

TEST_CASE("apply_random_warps: each method fires 50% +- 2% over 10k draws") {
  // Short clip keeps the 10k iterations cheap; firing statistics are what
  // matters here.
  const auto clip = random_clip(300, 8000, 12);
  const auto bank = tiny_bank(3, 8000, clip.samples.size());
  WarpPolicy policy;
  warp_counters().reset();
  Rng rng(123);
  const int trials = 10000;
  int none = 0;
  for (int i = 0; i < trials; ++i) {
    WarpLogEntry log;
    apply_random_warps(clip, bank, policy, rng, &log);
    if (!log.ir_file && !log.gaussian_snr_db && !log.noise_file && !log.pitch_cents) ++none;
  }
  const double n = trials;
  CHECK(double(warp_counters().ir_convolution) / n == doctest::Approx(0.5).epsilon(0.04));
  CHECK(double(warp_counters().gaussian_noise) / n == doctest::Approx(0.5).epsilon(0.04));
  CHECK(double(warp_counters().environmental_noise) / n == doctest::Approx(0.5).epsilon(0.04));
  CHECK(double(warp_counters().pitch_shift) / n == doctest::Approx(0.5).epsilon(0.04));
  // probability of no warping = 0.5^4 = 0.0625
  CHECK(double(none) / n == doctest::Approx(0.0625).epsilon(0.15));
  warp_counters().reset();
}

TEST_CASE("apply_random_warps: empty bank with a firing method is an error") {
  const auto clip = random_clip(500, 25000, 13);
  WarpBank empty;
  WarpPolicy policy;
  policy.skip_prob = 0.0;  // every method fires
  Rng rng(1);
  CHECK_THROWS(apply_random_warps(clip, empty, policy, rng));
}

TEST_CASE("warp bank: overlapping train/eval names rejected") {
  WarpBank bank = tiny_bank(4, 25000, 1000);
  bank.ir_eval[0].name = bank.ir_train[0].name;
  CHECK_THROWS(bank.validate());
}
