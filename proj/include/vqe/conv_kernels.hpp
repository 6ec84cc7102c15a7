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

#ifndef VQE_CONV_KERNELS_HPP
#define VQE_CONV_KERNELS_HPP

#include <cstddef>
#include <vector>

namespace vqe {

// Channel-major activation buffer [channels][frames][padded row]. Rows carry
// kPadLeft zero columns on the left and enough zero slack on the right that
// 3x3 taps with dilation <= kPadLeft and 32-wide vector loads never leave the
// allocation. Writers touch only the interior [0, bins), so the padding
// stays zero; zero padding is what gives the convolutions their boundary
// semantics.
template <typename T>
struct Plane {
  static constexpr int kPadLeft = 16;

  int channels = 0, frames = 0, bins = 0, stride = 0;
  std::vector<T> data;

  void resize(int c, int t, int f) {
    channels = c;
    frames = t;
    bins = f;
    stride = kPadLeft + ((f + 31) / 32) * 32 + kPadLeft + 32;
    data.assign(size_t(c) * size_t(t) * size_t(stride), T(0));
  }

  T* row(int c, int t) {
    return data.data() + (size_t(c) * size_t(frames) + size_t(t)) * size_t(stride) + kPadLeft;
  }
  const T* row(int c, int t) const {
    return data.data() + (size_t(c) * size_t(frames) + size_t(t)) * size_t(stride) + kPadLeft;
  }

  void zero() { std::fill(data.begin(), data.end(), T(0)); }
};

namespace kernels {

// Y[co][t][f] = bias[co] + sum_{ci,kt,kf} W[co][ci][kt][kf] *
//               X[ci][t + (kt-1)*dil][f + (kf-1)*dil]
// Weights are in natural [c_out][c_in][k][k] order; bias may be null.
template <typename T>
void conv3x3_fwd_portable(const Plane<T>& x, const T* w, const T* bias, int c_out, int dil,
                          Plane<T>& y) {
  const int k = 3;
  const int ci_n = x.channels, tn = x.frames, fn = x.bins;
  for (int co = 0; co < c_out; ++co) {
    for (int t = 0; t < tn; ++t) {
      T* out = y.row(co, t);
      const T b = bias ? bias[co] : T(0);
      for (int f = 0; f < fn; ++f) out[f] = b;
      for (int ci = 0; ci < ci_n; ++ci) {
        const T* wk = w + ((size_t(co) * ci_n + ci) * k * k);
        for (int kt = 0; kt < k; ++kt) {
          const int ts = t + (kt - 1) * dil;
          if (ts < 0 || ts >= tn) continue;
          const T* in = x.row(ci, ts);
          for (int kf = 0; kf < k; ++kf) {
            const int df = (kf - 1) * dil;
            const T wv = wk[kt * k + kf];
            const int lo = std::max(0, -df), hi = std::min(fn, fn - df);
            for (int f = lo; f < hi; ++f) out[f] += wv * in[f + df];
          }
        }
      }
    }
  }
}

// dX[ci][t][f] = sum_{co,kt,kf} W[co][ci][kt][kf] *
//               dY[co][t - (kt-1)*dil][f - (kf-1)*dil]       (overwrites dX)
template <typename T>
void conv3x3_bwd_input_portable(const Plane<T>& dy, const T* w, int c_in, int dil, Plane<T>& dx) {
  const int k = 3;
  const int co_n = dy.channels, tn = dy.frames, fn = dy.bins;
  for (int ci = 0; ci < c_in; ++ci) {
    for (int t = 0; t < tn; ++t) {
      T* out = dx.row(ci, t);
      for (int f = 0; f < fn; ++f) out[f] = T(0);
      for (int co = 0; co < co_n; ++co) {
        const T* wk = w + ((size_t(co) * c_in + ci) * k * k);
        for (int kt = 0; kt < k; ++kt) {
          const int ts = t - (kt - 1) * dil;
          if (ts < 0 || ts >= tn) continue;
          const T* in = dy.row(co, ts);
          for (int kf = 0; kf < k; ++kf) {
            const int df = (kf - 1) * dil;
            const T wv = wk[kt * k + kf];
            const int lo = std::max(0, df), hi = std::min(fn, fn + df);
            for (int f = lo; f < hi; ++f) out[f] += wv * in[f - df];
          }
        }
      }
    }
  }
}

// dW[co][ci][kt][kf] += sum_{t,f} X[ci][t+(kt-1)dil][f+(kf-1)dil] * dY[co][t][f]
// db[co] += sum_{t,f} dY[co][t][f]      (both accumulate)
template <typename T>
void conv3x3_bwd_weights_portable(const Plane<T>& x, const Plane<T>& dy, int dil, T* dw, T* db) {
  const int k = 3;
  const int ci_n = x.channels, co_n = dy.channels, tn = x.frames, fn = x.bins;
  for (int co = 0; co < co_n; ++co) {
    double bsum = 0.0;
    for (int t = 0; t < tn; ++t) {
      const T* g = dy.row(co, t);
      for (int f = 0; f < fn; ++f) bsum += double(g[f]);
    }
    if (db) db[co] += T(bsum);
    for (int ci = 0; ci < ci_n; ++ci) {
      T* wk = dw + ((size_t(co) * ci_n + ci) * k * k);
      for (int kt = 0; kt < k; ++kt) {
        for (int kf = 0; kf < k; ++kf) {
          const int dt = (kt - 1) * dil, df = (kf - 1) * dil;
          double acc = 0.0;
          for (int t = 0; t < tn; ++t) {
            const int ts = t + dt;
            if (ts < 0 || ts >= tn) continue;
            const T* in = x.row(ci, ts);
            const T* g = dy.row(co, t);
            const int lo = std::max(0, -df), hi = std::min(fn, fn - df);
            for (int f = lo; f < hi; ++f) acc += double(in[f + df]) * double(g[f]);
          }
          wk[kt * k + kf] += T(acc);
        }
      }
    }
  }
}

// float fast paths (AVX-512). Shapes they accept: c_out % 8 == 0 and
// dil <= Plane::kPadLeft. Defined in conv_kernels.cpp; no-ops returning
// false when the build has no AVX-512.
bool fast_conv_available();
bool conv3x3_fwd_f32_fast(const Plane<float>& x, const float* w, const float* bias, int c_out,
                          int dil, Plane<float>& y);
bool conv3x3_bwd_input_f32_fast(const Plane<float>& dy, const float* w, int c_in, int dil,
                                Plane<float>& dx);
bool conv3x3_bwd_weights_f32_fast(const Plane<float>& x, const Plane<float>& dy, int dil,
                                  float* dw, float* db);

// Dispatching entry points used by the model.
template <typename T>
void conv3x3_fwd(const Plane<T>& x, const T* w, const T* bias, int c_out, int dil, Plane<T>& y) {
  if constexpr (std::is_same_v<T, float>) {
    if (conv3x3_fwd_f32_fast(x, w, bias, c_out, dil, y)) return;
  }
  conv3x3_fwd_portable(x, w, bias, c_out, dil, y);
}

template <typename T>
void conv3x3_bwd_input(const Plane<T>& dy, const T* w, int c_in, int dil, Plane<T>& dx) {
  if constexpr (std::is_same_v<T, float>) {
    if (conv3x3_bwd_input_f32_fast(dy, w, c_in, dil, dx)) return;
  }
  conv3x3_bwd_input_portable(dy, w, c_in, dil, dx);
}

template <typename T>
void conv3x3_bwd_weights(const Plane<T>& x, const Plane<T>& dy, int dil, T* dw, T* db) {
  if constexpr (std::is_same_v<T, float>) {
    if (conv3x3_bwd_weights_f32_fast(x, dy, dil, dw, db)) return;
  }
  conv3x3_bwd_weights_portable(x, dy, dil, dw, db);
}

}  // namespace kernels
}  // namespace vqe

#endif  // VQE_CONV_KERNELS_HPP
