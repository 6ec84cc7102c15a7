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
//
// Test-side oracles, independent of the library implementation paths they
// check: brute-force DSP, scalar loss evaluation, direct metric formulas and
// pitch-synchronous voice measurements.

#ifndef VQE_TESTS_SUPPORT_ORACLES_HPP
#define VQE_TESTS_SUPPORT_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "vqe/audio.hpp"
#include "vqe/fft.hpp"

namespace vqe::oracles {

// Dominant frequency via an FFT magnitude peak with parabolic interpolation.
inline double dominant_frequency_hz(const AudioClip& clip) {
  const size_t n = clip.samples.size();
  const size_t nfft = fft::next_pow2(n);
  std::vector<double> x(n);
  for (size_t i = 0; i < n; ++i)
    x[i] = double(clip.samples[i]) * (0.5 - 0.5 * std::cos(2.0 * M_PI * double(i) / double(n)));
  const auto bins = fft::real_forward(x, nfft);
  size_t arg = 1;
  double best = 0.0;
  for (size_t k = 1; k + 1 < bins.size(); ++k) {
    const double m = std::abs(bins[k]);
    if (m > best) {
      best = m;
      arg = k;
    }
  }
  const double m0 = std::log(std::abs(bins[arg - 1]) + 1e-300);
  const double m1 = std::log(std::abs(bins[arg]) + 1e-300);
  const double m2 = std::log(std::abs(bins[arg + 1]) + 1e-300);
  const double denom = m0 - 2.0 * m1 + m2;
  const double delta = std::fabs(denom) > 1e-12 ? 0.5 * (m0 - m2) / denom : 0.0;
  return (double(arg) + delta) * double(clip.sample_rate) / double(nfft);
}

// O(n*m) direct linear convolution.
inline std::vector<double> direct_convolution(std::span<const float> a, std::span<const float> b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += double(a[i]) * double(b[j]);
  return out;
}

inline double rms_of(std::span<const float> x) {
  double acc = 0.0;
  for (float v : x) acc += double(v) * double(v);
  return std::sqrt(acc / double(x.size()));
}

// Cycle marks from positive-going zero crossings of the fundamental band.
// The band is isolated with a zero-phase brick-wall filter around the
// autocorrelation pitch estimate.
struct CycleMarks {
  double f0 = 0.0;
  std::vector<double> marks;  // sample positions, sub-sample
};

inline CycleMarks cycle_marks(const AudioClip& clip, double f_lo = 60.0, double f_hi = 400.0) {
  const size_t n = clip.samples.size();
  const double fs = double(clip.sample_rate);
  std::vector<double> x(clip.samples.begin(), clip.samples.end());

  // Autocorrelation pitch estimate over the middle of the clip.
  const size_t seg_lo = n / 5, seg_hi = n - n / 5;
  const size_t lag_lo = size_t(fs / f_hi), lag_hi = size_t(fs / f_lo);
  double best = -1.0;
  size_t best_lag = lag_lo;
  for (size_t lag = lag_lo; lag <= lag_hi && seg_lo + lag < seg_hi; ++lag) {
    double acc = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = seg_lo; i + lag < seg_hi; ++i) {
      acc += x[i] * x[i + lag];
      na += x[i] * x[i];
      nb += x[i + lag] * x[i + lag];
    }
    const double r = acc / std::sqrt(na * nb + 1e-300);
    if (r > best) {
      best = r;
      best_lag = lag;
    }
  }
  CycleMarks out;
  out.f0 = fs / double(best_lag);

  // Zero-phase fundamental isolation.
  const size_t nfft = fft::next_pow2(n);
  auto bins = fft::real_forward(x, nfft);
  const double bin_hz = fs / double(nfft);
  for (size_t k = 0; k < bins.size(); ++k) {
    const double f = double(k) * bin_hz;
    if (f < 0.6 * out.f0 || f > 1.45 * out.f0) bins[k] = 0.0;
  }
  const auto fund = fft::real_inverse(bins, nfft);

  for (size_t i = 1; i < n; ++i) {
    if (fund[i - 1] < 0.0 && fund[i] >= 0.0) {
      const double frac = -fund[i - 1] / (fund[i] - fund[i - 1]);
      out.marks.push_back(double(i - 1) + frac);
    }
  }
  return out;
}

inline double measured_jitter(const AudioClip& clip) {
  const CycleMarks cm = cycle_marks(clip);
  if (cm.marks.size() < 8) throw std::runtime_error("measured_jitter: too few cycles");
  std::vector<double> len;
  for (size_t i = 3; i + 3 < cm.marks.size(); ++i) len.push_back(cm.marks[i + 1] - cm.marks[i]);
  double mean = 0.0;
  for (double v : len) mean += v;
  mean /= double(len.size());
  double var = 0.0;
  for (double v : len) var += (v - mean) * (v - mean);
  var /= double(len.size() - 1);
  return std::sqrt(var) / mean;
}

inline double measured_period_seconds(const AudioClip& clip) {
  const CycleMarks cm = cycle_marks(clip);
  if (cm.marks.size() < 4) throw std::runtime_error("measured_period: too few cycles");
  const double span = cm.marks.back() - cm.marks.front();
  return span / double(cm.marks.size() - 1) / double(clip.sample_rate);
}

// Harmonics-to-noise ratio by pitch-synchronous template separation: cycles
// are length-normalized, averaged into a template, refitted per cycle with a
// scalar gain, and the residual is the noise estimate.
inline double measured_hnr_db(const AudioClip& clip) {
  const CycleMarks cm = cycle_marks(clip);
  if (cm.marks.size() < 10) throw std::runtime_error("measured_hnr: too few cycles");
  const std::vector<double> x(clip.samples.begin(), clip.samples.end());
  constexpr size_t kNorm = 512;

  const size_t first = 3, last = cm.marks.size() - 4;
  std::vector<std::vector<double>> cycles;
  for (size_t c = first; c < last; ++c) {
    const double a = cm.marks[c], b = cm.marks[c + 1];
    std::vector<double> warped(kNorm);
    for (size_t k = 0; k < kNorm; ++k) {
      const double pos = a + (b - a) * double(k) / double(kNorm);
      const size_t i = size_t(pos);
      const double frac = pos - double(i);
      warped[k] = x[i] * (1.0 - frac) + x[std::min(i + 1, x.size() - 1)] * frac;
    }
    cycles.push_back(std::move(warped));
  }

  std::vector<double> tmpl(kNorm, 0.0);
  for (const auto& c : cycles)
    for (size_t k = 0; k < kNorm; ++k) tmpl[k] += c[k];
  for (auto& v : tmpl) v /= double(cycles.size());

  double tt = 0.0;
  for (double v : tmpl) tt += v * v;
  double harm = 0.0, noise = 0.0;
  for (const auto& c : cycles) {
    double ct = 0.0;
    for (size_t k = 0; k < kNorm; ++k) ct += c[k] * tmpl[k];
    const double gain = tt > 0.0 ? ct / tt : 0.0;
    for (size_t k = 0; k < kNorm; ++k) {
      const double h = gain * tmpl[k];
      const double r = c[k] - h;
      harm += h * h;
      noise += r * r;
    }
  }
  if (noise <= 0.0) return 1e9;
  return 10.0 * std::log10(harm / noise);
}

// Scalar transcription of the GE2E equations: scaled cosine, per-sample
// contrastive terms against self/other centroids, summed over the batch.
inline double scalar_ge2e(const std::vector<std::vector<double>>& dys,
                          const std::vector<std::vector<double>>& hea, double omega,
                          double bias) {
  const size_t m = dys.size(), dim = dys[0].size();
  auto sigma = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  auto cosine = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0, na = 0.0, nb = 0.0;
    for (size_t k = 0; k < a.size(); ++k) {
      d += a[k] * b[k];
      na += a[k] * a[k];
      nb += b[k] * b[k];
    }
    return d / std::sqrt(na * nb);
  };
  std::vector<double> cp(dim, 0.0), cn(dim, 0.0);
  for (size_t i = 0; i < m; ++i)
    for (size_t k = 0; k < dim; ++k) {
      cp[k] += dys[i][k] / double(m);
      cn[k] += hea[i][k] / double(m);
    }
  double loss = 0.0;
  for (size_t i = 0; i < m; ++i) {
    loss += 1.0 - sigma(omega * cosine(dys[i], cp) + bias) +
            sigma(omega * cosine(dys[i], cn) + bias);
    loss += 1.0 - sigma(omega * cosine(hea[i], cn) + bias) +
            sigma(omega * cosine(hea[i], cp) + bias);
  }
  return loss;
}

// Direct contingency-table AMI (Vinh et al. expected-MI formula evaluated
// term by term with lgamma).
inline double direct_ami(std::span<const int> a, std::span<const int> b) {
  const size_t n = a.size();
  std::map<int, size_t> ra, cb;
  for (int v : a) ra.emplace(v, 0);
  for (int v : b) cb.emplace(v, 0);
  size_t idx = 0;
  for (auto& [_, i] : ra) i = idx++;
  idx = 0;
  for (auto& [_, i] : cb) i = idx++;
  const size_t rows = ra.size(), cols = cb.size();
  std::vector<double> nij(rows * cols, 0.0), ai(rows, 0.0), bj(cols, 0.0);
  for (size_t t = 0; t < n; ++t) {
    nij[ra[a[t]] * cols + cb[b[t]]] += 1.0;
    ai[ra[a[t]]] += 1.0;
    bj[cb[b[t]]] += 1.0;
  }
  const double dn = double(n);
  double mi = 0.0, ha = 0.0, hb = 0.0;
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < cols; ++c)
      if (nij[r * cols + c] > 0.0)
        mi += nij[r * cols + c] / dn *
              std::log(dn * nij[r * cols + c] / (ai[r] * bj[c]));
  for (size_t r = 0; r < rows; ++r)
    if (ai[r] > 0.0) ha -= ai[r] / dn * std::log(ai[r] / dn);
  for (size_t c = 0; c < cols; ++c)
    if (bj[c] > 0.0) hb -= bj[c] / dn * std::log(bj[c] / dn);

  double emi = 0.0;
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < cols; ++c) {
      const double lo = std::max(1.0, ai[r] + bj[c] - dn);
      const double hi = std::min(ai[r], bj[c]);
      for (double v = lo; v <= hi + 0.5; v += 1.0) {
        const double log_weight =
            std::lgamma(ai[r] + 1) + std::lgamma(bj[c] + 1) + std::lgamma(dn - ai[r] + 1) +
            std::lgamma(dn - bj[c] + 1) - std::lgamma(dn + 1) - std::lgamma(v + 1) -
            std::lgamma(ai[r] - v + 1) - std::lgamma(bj[c] - v + 1) -
            std::lgamma(dn - ai[r] - bj[c] + v + 1);
        emi += std::exp(log_weight) * (v / dn) * std::log(dn * v / (ai[r] * bj[c]));
      }
    }
  const double denom = 0.5 * (ha + hb) - emi;
  if (std::fabs(denom) < 1e-15) return 1.0;
  return (mi - emi) / denom;
}

}  // namespace vqe::oracles

#endif  // VQE_TESTS_SUPPORT_ORACLES_HPP
