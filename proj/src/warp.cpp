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

#include "vqe/warp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <set>
#include <stdexcept>

#include "vqe/fft.hpp"
#include "vqe/resample.hpp"

namespace vqe {

namespace {

double crop_rms(const std::vector<float>& x, size_t offset, size_t len) {
  double acc = 0.0;
  for (size_t i = 0; i < len; ++i) acc += double(x[offset + i]) * double(x[offset + i]);
  return std::sqrt(acc / double(len));
}

// Best rational approximation with bounded denominator (continued fractions).
std::pair<int, int> rational_approx(double x, int max_den) {
  int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double r = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double af = std::floor(r);
    const int64_t a = int64_t(af);
    const int64_t p2 = a * p1 + p0;
    const int64_t q2 = a * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double frac = r - af;
    if (frac < 1e-12) break;
    r = 1.0 / frac;
  }
  return {int(p1), int(q1)};
}

double principal_angle(double x) { return x - 2.0 * M_PI * std::round(x / (2.0 * M_PI)); }

// Phase-vocoder time stretch to exactly target_len samples.
std::vector<float> pv_stretch(const std::vector<float>& x, size_t target_len) {
  constexpr size_t kWin = 1024;
  constexpr size_t kHop = 256;
  constexpr size_t kBins = kWin / 2 + 1;

  if (x.size() < kWin || target_len < kWin) {
    // Too short for analysis frames; repeat/trim to length.
    std::vector<float> y(target_len);
    for (size_t i = 0; i < target_len; ++i) y[i] = x[i % x.size()];
    return y;
  }

  static const std::vector<double> win = [] {
    std::vector<double> w(kWin);
    for (size_t i = 0; i < kWin; ++i) w[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * double(i) / kWin));
    return w;
  }();

  const size_t frames = (target_len - kWin) / kHop + 2;
  const double stretch = double(target_len) / double(x.size());
  const size_t a_max = x.size() - kWin;

  std::vector<double> out(target_len + kWin + kHop, 0.0);
  std::vector<double> norm(out.size(), 0.0);
  std::vector<double> prev_phase(kBins, 0.0), syn_phase(kBins, 0.0);
  std::vector<std::complex<double>> spec(kWin);
  size_t prev_a = 0;

  for (size_t k = 0; k < frames; ++k) {
    size_t a = size_t(std::llround(double(k) * kHop / stretch));
    a = std::min(a, a_max);
    for (size_t i = 0; i < kWin; ++i) spec[i] = {double(x[a + i]) * win[i], 0.0};
    fft::forward(spec.data(), kWin);

    if (k == 0) {
      for (size_t b = 0; b < kBins; ++b) syn_phase[b] = std::arg(spec[b]);
    } else {
      const double da = double(a - prev_a);
      for (size_t b = 0; b < kBins; ++b) {
        const double w_b = 2.0 * M_PI * double(b) / double(kWin);
        const double ph = std::arg(spec[b]);
        double inst = w_b;
        if (da > 0.0) inst += principal_angle(ph - prev_phase[b] - w_b * da) / da;
        syn_phase[b] += inst * double(kHop);
        prev_phase[b] = ph;
      }
    }
    if (k == 0)
      for (size_t b = 0; b < kBins; ++b) prev_phase[b] = std::arg(spec[b]);
    prev_a = a;

    std::vector<std::complex<double>> syn(kWin);
    for (size_t b = 0; b < kBins; ++b) syn[b] = std::polar(std::abs(spec[b]), syn_phase[b]);
    for (size_t b = kBins; b < kWin; ++b) syn[b] = std::conj(syn[kWin - b]);
    fft::inverse(syn.data(), kWin);

    const size_t pos = k * kHop;
    for (size_t i = 0; i < kWin; ++i) {
      out[pos + i] += syn[i].real() * win[i];
      norm[pos + i] += win[i] * win[i];
    }
  }

  std::vector<float> y(target_len);
  for (size_t i = 0; i < target_len; ++i)
    y[i] = float(out[i] / std::max(norm[i], 1e-9));
  return y;
}

}  // namespace

void WarpBank::validate() const {
  auto check_disjoint = [](const std::vector<BankClip>& a, const std::vector<BankClip>& b,
                           const char* what) {
    std::set<std::string> names;
    for (const auto& c : a) names.insert(c.name);
    for (const auto& c : b)
      if (names.count(c.name))
        throw std::invalid_argument(std::string("WarpBank: train/eval overlap in ") + what + ": " +
                                    c.name);
  };
  check_disjoint(ir_train, ir_eval, "impulse responses");
  check_disjoint(noise_train, noise_eval, "noise");
}

void WarpPolicy::validate() const {
  if (skip_prob < 0.0 || skip_prob > 1.0)
    throw std::invalid_argument("WarpPolicy: skip_prob must be in [0, 1]");
  if (snr_range_db[0] > snr_range_db[1])
    throw std::invalid_argument("WarpPolicy: SNR range low > high");
  if (pitch_range_cents[0] > pitch_range_cents[1])
    throw std::invalid_argument("WarpPolicy: pitch range low > high");
}

void WarpCounters::reset() {
  ir_convolution = 0;
  gaussian_noise = 0;
  environmental_noise = 0;
  pitch_shift = 0;
}

uint64_t WarpCounters::total() const {
  return ir_convolution + gaussian_noise + environmental_noise + pitch_shift;
}

WarpCounters& warp_counters() {
  static WarpCounters counters;
  return counters;
}

std::pair<std::vector<std::string>, std::vector<std::string>>
partition_bank_files(const std::vector<std::string>& files, uint64_t seed) {
  if (files.size() < 2)
    throw std::invalid_argument("partition_bank_files: need at least 2 files, got " +
                                std::to_string(files.size()));
  std::vector<std::string> shuffled = files;
  Rng rng(seed);
  for (size_t i = shuffled.size() - 1; i > 0; --i) {
    const size_t j = size_t(rng.next_below(i + 1));
    std::swap(shuffled[i], shuffled[j]);
  }
  const size_t n_train = (shuffled.size() + 1) / 2;  // odd count: extra goes to train
  std::vector<std::string> train(shuffled.begin(), shuffled.begin() + std::ptrdiff_t(n_train));
  std::vector<std::string> eval(shuffled.begin() + std::ptrdiff_t(n_train), shuffled.end());
  return {std::move(train), std::move(eval)};
}

std::vector<BankClip> load_bank_dir(const std::filesystem::path& dir, int target_rate) {
  if (!std::filesystem::is_directory(dir))
    throw std::runtime_error("load_bank_dir: not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<BankClip> bank;
  bank.reserve(files.size());
  for (const auto& f : files)
    bank.push_back({f.filename().string(), resample(read_wav(f), target_rate)});
  return bank;
}

WarpBank make_warp_bank(const std::filesystem::path& ir_dir,
                        const std::filesystem::path& noise_dir, uint64_t seed, int target_rate) {
  auto split_loaded = [&](std::vector<BankClip> clips, uint64_t s)
      -> std::pair<std::vector<BankClip>, std::vector<BankClip>> {
    std::vector<std::string> names;
    names.reserve(clips.size());
    for (const auto& c : clips) names.push_back(c.name);
    auto [train_names, eval_names] = partition_bank_files(names, s);
    std::set<std::string> train_set(train_names.begin(), train_names.end());
    std::pair<std::vector<BankClip>, std::vector<BankClip>> out;
    for (auto& c : clips) {
      if (train_set.count(c.name))
        out.first.push_back(std::move(c));
      else
        out.second.push_back(std::move(c));
    }
    return out;
  };

  WarpBank bank;
  auto ir = split_loaded(load_bank_dir(ir_dir, target_rate), derive_seed(seed, 1));
  bank.ir_train = std::move(ir.first);
  bank.ir_eval = std::move(ir.second);
  auto noise = split_loaded(load_bank_dir(noise_dir, target_rate), derive_seed(seed, 2));
  bank.noise_train = std::move(noise.first);
  bank.noise_eval = std::move(noise.second);
  bank.validate();
  return bank;
}

void save_bank_partition(const std::filesystem::path& out_dir, const WarpBank& bank) {
  auto dump = [&](const std::filesystem::path& p, const std::vector<BankClip>& clips) {
    std::ofstream out(p, std::ios::trunc);
    if (!out) throw std::runtime_error("save_bank_partition: cannot write " + p.string());
    for (const auto& c : clips) out << c.name << "\n";
  };
  dump(out_dir / "ir_train.txt", bank.ir_train);
  dump(out_dir / "ir_eval.txt", bank.ir_eval);
  dump(out_dir / "noise_train.txt", bank.noise_train);
  dump(out_dir / "noise_eval.txt", bank.noise_eval);
}

AudioClip convolve_ir(const AudioClip& clip, const AudioClip& ir) {
  clip.validate();
  ir.validate();
  if (clip.sample_rate != ir.sample_rate)
    throw std::invalid_argument("convolve_ir: sample-rate mismatch (" +
                                std::to_string(clip.sample_rate) + " vs " +
                                std::to_string(ir.sample_rate) + ")");
  const float dry_peak = clip.peak();
  if (dry_peak <= 0.0f) throw std::invalid_argument("convolve_ir: silent input clip");

  std::vector<double> a(clip.samples.begin(), clip.samples.end());
  std::vector<double> b(ir.samples.begin(), ir.samples.end());
  std::vector<double> full = fft::convolve(a, b);
  full.resize(clip.samples.size());

  double wet_peak = 0.0;
  for (double v : full) wet_peak = std::max(wet_peak, std::fabs(v));
  if (wet_peak <= 0.0) throw std::invalid_argument("convolve_ir: silent impulse response");
  const double gain = double(dry_peak) / wet_peak;

  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.resize(full.size());
  for (size_t i = 0; i < full.size(); ++i) out.samples[i] = float(full[i] * gain);
  return out;
}

AudioClip add_noise(const AudioClip& clip, const AudioClip& noise, double snr_db, size_t offset) {
  clip.validate();
  noise.validate();
  const size_t n = clip.samples.size();
  if (noise.samples.size() < n)
    throw std::invalid_argument("add_noise: noise shorter than clip");
  if (offset > noise.samples.size() - n)
    throw std::invalid_argument("add_noise: offset leaves less than clip length");
  const double clip_rms = clip.rms();
  if (clip_rms <= 0.0) throw std::invalid_argument("add_noise: silent input clip (SNR undefined)");
  const double noise_rms = crop_rms(noise.samples, offset, n);
  if (noise_rms <= 0.0) throw std::invalid_argument("add_noise: silent noise segment");

  const double gain = clip_rms / noise_rms * std::pow(10.0, -snr_db / 20.0);
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    out.samples[i] = clip.samples[i] + float(gain * double(noise.samples[offset + i]));
  return out;
}

AudioClip pitch_shift(const AudioClip& clip, double cents) {
  clip.validate();
  if (std::fabs(cents) > 1200.0)
    throw std::invalid_argument("pitch_shift: |cents| must be <= 1200");
  if (std::fabs(cents) < 1e-9) return clip;

  const double ratio = std::pow(2.0, cents / 1200.0);
  const auto [p, q] = rational_approx(ratio, 2048);

  // Read the signal faster (or slower) by ratio = p/q, which scales the
  // fundamental by the same factor and the length by its inverse...
  const AudioClip shifted = resample_ratio(clip, q, p);
  // ...then stretch time back to the original duration at constant pitch.
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples = pv_stretch(shifted.samples, clip.samples.size());
  return out;
}

AudioClip apply_random_warps(const AudioClip& clip, const WarpBank& bank,
                             const WarpPolicy& policy, Rng& rng, WarpLogEntry* log) {
  clip.validate();
  policy.validate();

  const bool fire_ir = rng.next_double() >= policy.skip_prob;
  const bool fire_gauss = rng.next_double() >= policy.skip_prob;
  const bool fire_env = rng.next_double() >= policy.skip_prob;
  const bool fire_pitch = rng.next_double() >= policy.skip_prob;

  if (fire_ir && bank.ir_train.empty())
    throw std::runtime_error("apply_random_warps: IR bank empty but IR convolution fired");
  if (fire_env && bank.noise_train.empty())
    throw std::runtime_error("apply_random_warps: noise bank empty but environmental noise fired");

  AudioClip out = clip;
  if (fire_ir) {
    const size_t idx = size_t(rng.next_below(bank.ir_train.size()));
    out = convolve_ir(out, bank.ir_train[idx].clip);
    warp_counters().ir_convolution++;
    if (log) log->ir_file = bank.ir_train[idx].name;
  }
  if (fire_gauss) {
    const double snr = rng.uniform(policy.snr_range_db[0], policy.snr_range_db[1]);
    AudioClip gauss;
    gauss.sample_rate = out.sample_rate;
    gauss.samples.resize(out.samples.size());
    for (auto& s : gauss.samples) s = float(rng.normal());
    out = add_noise(out, gauss, snr, 0);
    warp_counters().gaussian_noise++;
    if (log) log->gaussian_snr_db = snr;
  }
  if (fire_env) {
    const size_t idx = size_t(rng.next_below(bank.noise_train.size()));
    const AudioClip& noise = bank.noise_train[idx].clip;
    if (noise.samples.size() < out.samples.size())
      throw std::runtime_error("apply_random_warps: noise file '" + bank.noise_train[idx].name +
                               "' shorter than clip");
    const double snr = rng.uniform(policy.snr_range_db[0], policy.snr_range_db[1]);
    const size_t max_off = noise.samples.size() - out.samples.size();
    const size_t offset = max_off == 0 ? 0 : size_t(rng.next_below(max_off + 1));
    out = add_noise(out, noise, snr, offset);
    warp_counters().environmental_noise++;
    if (log) {
      log->noise_file = bank.noise_train[idx].name;
      log->noise_snr_db = snr;
      log->noise_offset = offset;
    }
  }
  if (fire_pitch) {
    const double cents = rng.uniform(policy.pitch_range_cents[0], policy.pitch_range_cents[1]);
    out = pitch_shift(out, cents);
    warp_counters().pitch_shift++;
    if (log) log->pitch_cents = cents;
  }
  return out;
}

}  // namespace vqe
