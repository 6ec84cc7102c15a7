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

#include "vqe/resample.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace vqe {

namespace {

// Half-width of the prototype lowpass in zero crossings per polyphase branch.
constexpr int kHalfTaps = 32;
// Kaiser beta for ~95 dB stopband attenuation.
constexpr double kKaiserBeta = 9.54;

double bessel_i0(double x) {
  const double h = 0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 64; ++k) {
    term *= h / double(k * k);
    sum += term;
    if (term < 1e-14 * sum) break;
  }
  return sum;
}

// Kaiser window tabulated over |x| in [0, 1]; linear interpolation keeps the
// error far below the stopband floor.
double kaiser(double x) {
  constexpr int kTableSize = 4096;
  static const std::array<double, kTableSize + 2> table = [] {
    std::array<double, kTableSize + 2> t{};
    const double norm = 1.0 / bessel_i0(kKaiserBeta);
    for (int i = 0; i <= kTableSize; ++i) {
      const double u = double(i) / double(kTableSize);
      t[size_t(i)] = bessel_i0(kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - u * u))) * norm;
    }
    t[kTableSize + 1] = 0.0;
    return t;
  }();
  const double a = std::fabs(x);
  if (a >= 1.0) return 0.0;
  const double pos = a * kTableSize;
  const int i = int(pos);
  const double frac = pos - i;
  return table[size_t(i)] * (1.0 - frac) + table[size_t(i) + 1] * frac;
}

double sinc(double x) {
  if (std::fabs(x) < 1e-12) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

std::vector<float> resample_core(const std::vector<float>& x, int up, int down) {
  const int big = std::max(up, down);
  // Prototype lowpass at the upsampled rate: cutoff slightly inside the
  // tighter of the two Nyquist limits.
  const double cutoff = 0.92 / double(big);
  const int64_t half_len = int64_t(kHalfTaps) * big;
  const double inv_half = 1.0 / double(half_len);

  const int64_t out_len = int64_t(std::llround(double(x.size()) * double(up) / double(down)));
  std::vector<float> y(size_t(std::max<int64_t>(out_len, 1)));

  const int64_t n = int64_t(x.size());
  for (int64_t j = 0; j < int64_t(y.size()); ++j) {
    // Output sample j sits at position t = j*down on the up-rate grid.
    const int64_t t = j * down;
    // Contributing inputs m satisfy |t - m*up| <= half_len.
    int64_t m_lo = (t - half_len + up - 1) / up;
    int64_t m_hi = (t + half_len) / up;
    if (m_lo < 0) m_lo = 0;
    if (m_hi > n - 1) m_hi = n - 1;
    double acc = 0.0;
    for (int64_t m = m_lo; m <= m_hi; ++m) {
      const double d = double(t - m * up);
      acc += double(x[size_t(m)]) * sinc(cutoff * d) * kaiser(d * inv_half);
    }
    y[size_t(j)] = float(acc * cutoff * up);
  }
  return y;
}

}  // namespace

AudioClip resample(const AudioClip& clip, int target_rate) {
  clip.validate();
  if (target_rate <= 0) throw std::invalid_argument("resample: target rate must be positive");
  if (target_rate == clip.sample_rate) return clip;

  const int g = std::gcd(clip.sample_rate, target_rate);
  const int up = target_rate / g;
  const int down = clip.sample_rate / g;
  AudioClip out;
  out.sample_rate = target_rate;
  out.samples = resample_core(clip.samples, up, down);
  return out;
}

AudioClip resample_ratio(const AudioClip& clip, int up, int down) {
  clip.validate();
  if (up <= 0 || down <= 0) throw std::invalid_argument("resample_ratio: ratio must be positive");
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  if (up == down) {
    out.samples = clip.samples;
    return out;
  }
  const int g = std::gcd(up, down);
  out.samples = resample_core(clip.samples, up / g, down / g);
  return out;
}

}  // namespace vqe
