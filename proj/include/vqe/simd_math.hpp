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

#ifndef VQE_SIMD_MATH_HPP
#define VQE_SIMD_MATH_HPP

#include <cmath>

namespace vqe::simd {

// In-place rows of tanh/sigmoid. The float versions use a vectorized exp
// polynomial when AVX-512 is compiled in (~1e-7 relative error); training
// stores the activated values, so its backward pass stays consistent with
// whichever forward was used.
void tanh_row_f32(float* x, int n);
void sigmoid_row_f32(float* x, int n);

inline double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <typename T>
void tanh_row(T* x, int n) {
  if constexpr (std::is_same_v<T, float>) {
    tanh_row_f32(x, n);
  } else {
    for (int i = 0; i < n; ++i) x[i] = std::tanh(x[i]);
  }
}

template <typename T>
void sigmoid_row(T* x, int n) {
  if constexpr (std::is_same_v<T, float>) {
    sigmoid_row_f32(x, n);
  } else {
    for (int i = 0; i < n; ++i) x[i] = T(stable_sigmoid(double(x[i])));
  }
}

}  // namespace vqe::simd

#endif  // VQE_SIMD_MATH_HPP
