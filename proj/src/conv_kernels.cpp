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

#include "vqe/conv_kernels.hpp"

#ifdef __AVX512F__
#include <immintrin.h>
#endif

namespace vqe::kernels {

#ifndef __AVX512F__

bool fast_conv_available() { return false; }
bool conv3x3_fwd_f32_fast(const Plane<float>&, const float*, const float*, int, int,
                          Plane<float>&) {
  return false;
}
bool conv3x3_bwd_input_f32_fast(const Plane<float>&, const float*, int, int, Plane<float>&) {
  return false;
}
bool conv3x3_bwd_weights_f32_fast(const Plane<float>&, const Plane<float>&, int, float*, float*) {
  return false;
}

#else

namespace {

// Shared tap-fused inner kernel. wp is packed [tap][ci][co]; taps with an
// out-of-range time row are skipped per output row; the frequency axis relies
// on the planes' zero padding, so only stores need masking.
void conv_tap_kernel(const Plane<float>& x, const float* wp, const float* bias, int c_out,
                     int dil, Plane<float>& y) {
  const int ci_n = x.channels, tn = x.frames, fn = x.bins;
  const int nblk = (fn + 31) / 32;

  for (int t = 0; t < tn; ++t) {
    int kt_lo = 0, kt_hi = 2;
    while (kt_lo <= 2 && (t + (kt_lo - 1) * dil < 0 || t + (kt_lo - 1) * dil >= tn)) ++kt_lo;
    while (kt_hi >= 0 && (t + (kt_hi - 1) * dil < 0 || t + (kt_hi - 1) * dil >= tn)) --kt_hi;

    for (int cb = 0; cb < c_out; cb += 8) {
      for (int fb = 0; fb < nblk; ++fb) {
        const int f0 = fb * 32;
        __m512 acc0[8], acc1[8];
        for (int j = 0; j < 8; ++j) {
          const __m512 b = bias ? _mm512_set1_ps(bias[cb + j]) : _mm512_setzero_ps();
          acc0[j] = b;
          acc1[j] = b;
        }
        for (int ci = 0; ci < ci_n; ++ci) {
          for (int kt = kt_lo; kt <= kt_hi; ++kt) {
            const float* xr = x.row(ci, t + (kt - 1) * dil) + f0;
            for (int kf = 0; kf < 3; ++kf) {
              const int df = (kf - 1) * dil;
              const __m512 x0 = _mm512_loadu_ps(xr + df);
              const __m512 x1 = _mm512_loadu_ps(xr + df + 16);
              const float* wrow = wp + (size_t(kt * 3 + kf) * ci_n + ci) * c_out + cb;
              for (int j = 0; j < 8; ++j) {
                const __m512 wv = _mm512_set1_ps(wrow[j]);
                acc0[j] = _mm512_fmadd_ps(x0, wv, acc0[j]);
                acc1[j] = _mm512_fmadd_ps(x1, wv, acc1[j]);
              }
            }
          }
        }
        const int rem = fn - f0;
        const __mmask16 m0 = rem >= 16 ? 0xffff : __mmask16((1u << rem) - 1);
        const __mmask16 m1 =
            rem >= 32 ? 0xffff : (rem > 16 ? __mmask16((1u << (rem - 16)) - 1) : 0);
        for (int j = 0; j < 8; ++j) {
          float* yr = y.row(cb + j, t) + f0;
          _mm512_mask_storeu_ps(yr, m0, acc0[j]);
          if (m1) _mm512_mask_storeu_ps(yr + 16, m1, acc1[j]);
        }
      }
    }
  }
}

thread_local std::vector<float> g_pack;

}  // namespace

bool fast_conv_available() { return true; }

bool conv3x3_fwd_f32_fast(const Plane<float>& x, const float* w, const float* bias, int c_out,
                          int dil, Plane<float>& y) {
  if (c_out % 8 != 0 || dil > Plane<float>::kPadLeft) return false;
  const int ci_n = x.channels;
  g_pack.resize(size_t(9) * ci_n * c_out);
  for (int co = 0; co < c_out; ++co)
    for (int ci = 0; ci < ci_n; ++ci)
      for (int tap = 0; tap < 9; ++tap)
        g_pack[(size_t(tap) * ci_n + ci) * c_out + co] = w[(size_t(co) * ci_n + ci) * 9 + tap];
  conv_tap_kernel(x, g_pack.data(), bias, c_out, dil, y);
  return true;
}

bool conv3x3_bwd_input_f32_fast(const Plane<float>& dy, const float* w, int c_in, int dil,
                                Plane<float>& dx) {
  if (c_in % 8 != 0 || dil > Plane<float>::kPadLeft) return false;
  const int co_n = dy.channels;
  // Transposed convolution = convolution with the kernel flipped and the
  // channel roles swapped.
  g_pack.resize(size_t(9) * co_n * c_in);
  for (int co = 0; co < co_n; ++co)
    for (int ci = 0; ci < c_in; ++ci)
      for (int kt = 0; kt < 3; ++kt)
        for (int kf = 0; kf < 3; ++kf) {
          const int flipped = (2 - kt) * 3 + (2 - kf);
          g_pack[(size_t(flipped) * co_n + co) * c_in + ci] =
              w[(size_t(co) * c_in + ci) * 9 + kt * 3 + kf];
        }
  conv_tap_kernel(dy, g_pack.data(), nullptr, c_in, dil, dx);
  return true;
}

bool conv3x3_bwd_weights_f32_fast(const Plane<float>& x, const Plane<float>& dy, int dil,
                                  float* dw, float* db) {
  if (dy.channels % 8 != 0 || dil > Plane<float>::kPadLeft) return false;
  const int ci_n = x.channels, co_n = dy.channels, tn = x.frames, fn = x.bins;
  const int nblk = (fn + 31) / 32;

  if (db) {
    for (int co = 0; co < co_n; ++co) {
      double bsum = 0.0;
      for (int t = 0; t < tn; ++t) {
        const float* g = dy.row(co, t);
        __m512 acc = _mm512_setzero_ps();
        for (int fb = 0; fb < nblk; ++fb)
          acc = _mm512_add_ps(acc, _mm512_add_ps(_mm512_loadu_ps(g + fb * 32),
                                                 _mm512_loadu_ps(g + fb * 32 + 16)));
        bsum += double(_mm512_reduce_add_ps(acc));
      }
      db[co] += float(bsum);
    }
  }

  for (int cb = 0; cb < co_n; cb += 8) {
    const float* grow[8];
    for (int ci = 0; ci < ci_n; ++ci) {
      for (int kt = 0; kt < 3; ++kt) {
        for (int kf = 0; kf < 3; ++kf) {
          const int dt = (kt - 1) * dil, df = (kf - 1) * dil;
          __m512 acc[8];
          for (auto& a : acc) a = _mm512_setzero_ps();
          for (int t = 0; t < tn; ++t) {
            const int ts = t + dt;
            if (ts < 0 || ts >= tn) continue;
            const float* xr = x.row(ci, ts) + df;
            for (int j = 0; j < 8; ++j) grow[j] = dy.row(cb + j, t);
            // Full-width blocks: the zero padding contributes nothing.
            for (int fb = 0; fb < nblk; ++fb) {
              const int f0 = fb * 32;
              const __m512 x0 = _mm512_loadu_ps(xr + f0);
              const __m512 x1 = _mm512_loadu_ps(xr + f0 + 16);
              for (int j = 0; j < 8; ++j) {
                acc[j] = _mm512_fmadd_ps(x0, _mm512_loadu_ps(grow[j] + f0), acc[j]);
                acc[j] = _mm512_fmadd_ps(x1, _mm512_loadu_ps(grow[j] + f0 + 16), acc[j]);
              }
            }
          }
          for (int j = 0; j < 8; ++j)
            dw[(size_t(cb + j) * ci_n + ci) * 9 + kt * 3 + kf] += _mm512_reduce_add_ps(acc[j]);
        }
      }
    }
  }
  return true;
}

#endif  // __AVX512F__

}  // namespace vqe::kernels
