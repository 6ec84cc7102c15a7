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

#include "vqe/fft.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace vqe::fft {

namespace {

const std::vector<std::complex<double>>& twiddles(size_t n) {
  static std::mutex mu;
  static std::unordered_map<size_t, std::vector<std::complex<double>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<std::complex<double>> w(n / 2);
  for (size_t k = 0; k < n / 2; ++k) {
    const double a = -2.0 * M_PI * double(k) / double(n);
    w[k] = {std::cos(a), std::sin(a)};
  }
  return cache.emplace(n, std::move(w)).first->second;
}

void transform(std::complex<double>* x, size_t n, bool inv) {
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft: size must be a power of two");
  if (n == 1) return;
  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  const auto& w = twiddles(n);
  for (size_t len = 2; len <= n; len <<= 1) {
    const size_t step = n / len;
    for (size_t i = 0; i < n; i += len) {
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> tw = w[k * step];
        if (inv) tw = std::conj(tw);
        const std::complex<double> u = x[i + k];
        const std::complex<double> v = x[i + k + len / 2] * tw;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
      }
    }
  }
  if (inv) {
    const double s = 1.0 / double(n);
    for (size_t i = 0; i < n; ++i) x[i] *= s;
  }
}

}  // namespace

void forward(std::complex<double>* x, size_t n) { transform(x, n, false); }
void inverse(std::complex<double>* x, size_t n) { transform(x, n, true); }

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<std::complex<double>> real_forward(std::span<const double> x, size_t nfft) {
  if (x.size() > nfft) throw std::invalid_argument("real_forward: input longer than nfft");
  std::vector<std::complex<double>> buf(nfft, {0.0, 0.0});
  for (size_t i = 0; i < x.size(); ++i) buf[i] = {x[i], 0.0};
  forward(buf.data(), nfft);
  buf.resize(nfft / 2 + 1);
  return buf;
}

std::vector<double> real_inverse(std::span<const std::complex<double>> bins, size_t nfft) {
  if (bins.size() != nfft / 2 + 1) throw std::invalid_argument("real_inverse: bad bin count");
  std::vector<std::complex<double>> buf(nfft);
  for (size_t k = 0; k <= nfft / 2; ++k) buf[k] = bins[k];
  for (size_t k = nfft / 2 + 1; k < nfft; ++k) buf[k] = std::conj(bins[nfft - k]);
  inverse(buf.data(), nfft);
  std::vector<double> out(nfft);
  for (size_t i = 0; i < nfft; ++i) out[i] = buf[i].real();
  return out;
}

std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("convolve: empty input");
  const size_t out_len = a.size() + b.size() - 1;
  const size_t nfft = next_pow2(out_len);
  auto fa = real_forward(a, nfft);
  auto fb = real_forward(b, nfft);
  for (size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  auto full = real_inverse(fa, nfft);
  full.resize(out_len);
  return full;
}

}  // namespace vqe::fft
