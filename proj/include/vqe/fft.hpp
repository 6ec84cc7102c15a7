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

#ifndef VQE_FFT_HPP
#define VQE_FFT_HPP

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace vqe::fft {

// In-place radix-2 transforms; n must be a power of two.
void forward(std::complex<double>* x, size_t n);
void inverse(std::complex<double>* x, size_t n);

size_t next_pow2(size_t n);

// Real input zero-padded to nfft; returns nfft/2 + 1 bins.
std::vector<std::complex<double>> real_forward(std::span<const double> x, size_t nfft);

// Inverse of real_forward; returns nfft real samples.
std::vector<double> real_inverse(std::span<const std::complex<double>> bins, size_t nfft);

// Linear convolution, length a.size() + b.size() - 1.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b);

}  // namespace vqe::fft

#endif  // VQE_FFT_HPP
