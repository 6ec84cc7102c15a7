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

#ifndef VQE_MODEL_HPP
#define VQE_MODEL_HPP

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqe/conv_kernels.hpp"
#include "vqe/features.hpp"
#include "vqe/rng.hpp"
#include "vqe/simd_math.hpp"

namespace vqe {

// Dilated residual encoder plus 2-layer MLP classifier. Layers are grouped
// into block_count blocks of total_layers/block_count layers; the dilation of
// layer j within its block is 2^j on both spatial axes.
struct EncoderConfig {
  int total_layers = 15;
  int block_count = 5;
  int residual_channels = 32;
  int kernel_size = 3;
  double leaky_slope = 0.4;
  int embedding_dim = 256;
  int classifier_hidden = 128;

  int layers_per_block() const { return total_layers / block_count; }
  int dilation(int layer) const { return 1 << (layer % layers_per_block()); }

  void validate() const {
    if (block_count < 1) throw std::invalid_argument("EncoderConfig: block_count must be >= 1");
    if (total_layers < 1) throw std::invalid_argument("EncoderConfig: total_layers must be >= 1");
    if (total_layers % block_count != 0)
      throw std::invalid_argument("EncoderConfig: total_layers (" + std::to_string(total_layers) +
                                  ") not divisible by block_count (" +
                                  std::to_string(block_count) + ")");
    if (residual_channels < 1)
      throw std::invalid_argument("EncoderConfig: residual_channels must be >= 1");
    if (kernel_size != 3) throw std::invalid_argument("EncoderConfig: kernel_size must be 3");
    if (embedding_dim < 1) throw std::invalid_argument("EncoderConfig: embedding_dim must be >= 1");
    if (classifier_hidden < 1)
      throw std::invalid_argument("EncoderConfig: classifier_hidden must be >= 1");
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0))
      throw std::invalid_argument("EncoderConfig: leaky_slope must be in (0, 1)");
  }

  bool operator==(const EncoderConfig&) const = default;
};

// Flat parameter layout; a checkpoint is this vector plus the config.
struct ParamLayout {
  size_t conv_in_w = 0, conv_in_b = 0;
  std::vector<size_t> layer_w, layer_b;
  size_t head_w = 0, head_b = 0;
  size_t emb_w = 0, emb_b = 0;
  size_t cls1_w = 0, cls1_b = 0;
  size_t cls2_w = 0, cls2_b = 0;
  size_t omega = 0, sim_bias = 0;
  size_t total = 0;

  static ParamLayout build(const EncoderConfig& cfg) {
    ParamLayout lay;
    const size_t c = size_t(cfg.residual_channels);
    size_t at = 0;
    auto take = [&at](size_t n) {
      const size_t o = at;
      at += n;
      return o;
    };
    lay.conv_in_w = take(c * 1 * 9);
    lay.conv_in_b = take(c);
    for (int l = 0; l < cfg.total_layers; ++l) {
      lay.layer_w.push_back(take(2 * c * c * 9));
      lay.layer_b.push_back(take(2 * c));
    }
    lay.head_w = take(c * c);
    lay.head_b = take(c);
    lay.emb_w = take(size_t(cfg.embedding_dim) * c);
    lay.emb_b = take(size_t(cfg.embedding_dim));
    lay.cls1_w = take(size_t(cfg.classifier_hidden) * size_t(cfg.embedding_dim));
    lay.cls1_b = take(size_t(cfg.classifier_hidden));
    lay.cls2_w = take(2 * size_t(cfg.classifier_hidden));
    lay.cls2_b = take(2);
    lay.omega = take(1);
    lay.sim_bias = take(1);
    lay.total = at;
    return lay;
  }
};

template <typename T>
class Model {
 public:
  struct Cache {
    int frames = 0, bins = 0;
    Plane<T> input;                // 1 channel
    Plane<T> stem;                 // post initial conv + leaky ReLU
    std::vector<Plane<T>> gates;   // per layer: 2C channels, tanh/sigmoid halves (activated)
    std::vector<Plane<T>> xs;      // per layer: residual output
    Plane<T> head;                 // post 1x1 conv + leaky ReLU
    std::vector<T> pooled, embedding;
    std::vector<T> cls_in, cls_hidden, logp;
  };

  Model(const EncoderConfig& cfg, uint64_t seed) : cfg_(cfg), lay_(check_and_build(cfg)) {
    params_.assign(lay_.total, T(0));
    init_params(seed);
  }

  Model(const EncoderConfig& cfg, std::vector<T> params)
      : cfg_(cfg), lay_(check_and_build(cfg)), params_(std::move(params)) {
    if (params_.size() != lay_.total)
      throw std::invalid_argument("Model: parameter vector size " + std::to_string(params_.size()) +
                                  " does not match layout size " + std::to_string(lay_.total));
  }

  const EncoderConfig& config() const { return cfg_; }
  const ParamLayout& layout() const { return lay_; }
  std::vector<T>& params() { return params_; }
  const std::vector<T>& params() const { return params_; }
  size_t param_count() const { return lay_.total; }

  double omega() const { return double(params_[lay_.omega]); }
  double sim_bias() const { return double(params_[lay_.sim_bias]); }
  void set_omega(double v) { params_[lay_.omega] = T(v); }
  void set_sim_bias(double v) { params_[lay_.sim_bias] = T(v); }

  // Clamp keeps the scaled cosine orientation-preserving.
  void clamp_omega() {
    if (!(params_[lay_.omega] >= T(1e-6))) params_[lay_.omega] = T(1e-6);
  }

  void encode(const T* patch, int frames, int bins, Cache& cache) const {
    if (frames != kPatchFrames)
      throw std::invalid_argument("encode: patch must have " + std::to_string(kPatchFrames) +
                                  " frames, got " + std::to_string(frames));
    if (bins < 1) throw std::invalid_argument("encode: patch needs at least one bin");
    prepare_cache(cache, frames, bins);
    const int c = cfg_.residual_channels;
    const T* P = params_.data();

    for (int t = 0; t < frames; ++t) {
      T* row = cache.input.row(0, t);
      for (int f = 0; f < bins; ++f) row[f] = patch[size_t(t) * size_t(bins) + f];
    }

    kernels::conv3x3_fwd(cache.input, P + lay_.conv_in_w, P + lay_.conv_in_b, c, 1, cache.stem);
    leaky_relu_plane(cache.stem);

    const Plane<T>* x = &cache.stem;
    for (int l = 0; l < cfg_.total_layers; ++l) {
      Plane<T>& z = cache.gates[size_t(l)];
      kernels::conv3x3_fwd(*x, P + lay_.layer_w[size_t(l)], P + lay_.layer_b[size_t(l)], 2 * c,
                           cfg_.dilation(l), z);
      for (int ch = 0; ch < c; ++ch)
        for (int t = 0; t < frames; ++t) {
          simd::tanh_row(z.row(ch, t), bins);
          simd::sigmoid_row(z.row(c + ch, t), bins);
        }
      Plane<T>& out = cache.xs[size_t(l)];
      for (int ch = 0; ch < c; ++ch)
        for (int t = 0; t < frames; ++t) {
          const T* xin = x->row(ch, t);
          const T* gt = z.row(ch, t);
          const T* gs = z.row(c + ch, t);
          T* o = out.row(ch, t);
          for (int f = 0; f < bins; ++f) o[f] = xin[f] + gt[f] * gs[f];
        }
      x = &out;
    }

    // Head: 1x1 conv, leaky ReLU, global mean pool, affine to the embedding.
    for (int co = 0; co < c; ++co)
      for (int t = 0; t < frames; ++t) {
        T* o = cache.head.row(co, t);
        const T b = P[lay_.head_b + size_t(co)];
        for (int f = 0; f < bins; ++f) o[f] = b;
        for (int ci = 0; ci < c; ++ci) {
          const T w = P[lay_.head_w + size_t(co) * size_t(c) + size_t(ci)];
          const T* in = x->row(ci, t);
          for (int f = 0; f < bins; ++f) o[f] += w * in[f];
        }
      }
    leaky_relu_plane(cache.head);

    const T inv_area = T(1.0 / (double(frames) * double(bins)));
    for (int ch = 0; ch < c; ++ch) {
      double acc = 0.0;
      for (int t = 0; t < frames; ++t) {
        const T* row = cache.head.row(ch, t);
        for (int f = 0; f < bins; ++f) acc += double(row[f]);
      }
      cache.pooled[size_t(ch)] = T(acc) * inv_area;
    }

    const int e = cfg_.embedding_dim;
    for (int i = 0; i < e; ++i) {
      T acc = P[lay_.emb_b + size_t(i)];
      const T* w = P + lay_.emb_w + size_t(i) * size_t(c);
      for (int ch = 0; ch < c; ++ch) acc += w[ch] * cache.pooled[size_t(ch)];
      cache.embedding[size_t(i)] = acc;
    }
  }

  void encode(const SpectrogramPatch& patch, Cache& cache) const
    requires std::is_same_v<T, float>
  {
    if (patch.values.size() != size_t(kPatchFrames) * size_t(patch.bins))
      throw std::invalid_argument("encode: patch value count does not match its shape");
    encode(patch.values.data(), kPatchFrames, patch.bins, cache);
  }

  // Log-probability pair; index 0 is healthy, index 1 is dysphonic.
  void classify(std::span<const T> emb, Cache& cache) const {
    if (int(emb.size()) != cfg_.embedding_dim)
      throw std::invalid_argument("classify: embedding length " + std::to_string(emb.size()) +
                                  " != " + std::to_string(cfg_.embedding_dim));
    const int e = cfg_.embedding_dim, h = cfg_.classifier_hidden;
    const T* P = params_.data();
    cache.cls_in.assign(emb.begin(), emb.end());
    cache.cls_hidden.assign(size_t(h), T(0));
    cache.logp.assign(2, T(0));

    for (int i = 0; i < h; ++i) {
      T acc = P[lay_.cls1_b + size_t(i)];
      const T* w = P + lay_.cls1_w + size_t(i) * size_t(e);
      for (int j = 0; j < e; ++j) acc += w[j] * emb[size_t(j)];
      cache.cls_hidden[size_t(i)] = leaky(acc);
    }
    T logits[2];
    for (int i = 0; i < 2; ++i) {
      T acc = P[lay_.cls2_b + size_t(i)];
      const T* w = P + lay_.cls2_w + size_t(i) * size_t(h);
      for (int j = 0; j < h; ++j) acc += w[j] * cache.cls_hidden[size_t(j)];
      logits[i] = acc;
    }
    const T m = std::max(logits[0], logits[1]);
    const T lse = m + T(std::log(std::exp(double(logits[0] - m)) + std::exp(double(logits[1] - m))));
    cache.logp[0] = logits[0] - lse;
    cache.logp[1] = logits[1] - lse;
  }

  // Backward through classify; accumulates parameter grads and the embedding
  // gradient. Must be called with the cache classify() filled.
  void classify_backward(const Cache& cache, std::span<const T> d_logp, std::span<T> grads,
                         std::span<T> d_emb) const {
    const int e = cfg_.embedding_dim, h = cfg_.classifier_hidden;
    const T* P = params_.data();
    const T dsum = d_logp[0] + d_logp[1];
    T dlogits[2];
    for (int i = 0; i < 2; ++i)
      dlogits[i] = d_logp[size_t(i)] - T(std::exp(double(cache.logp[size_t(i)]))) * dsum;

    std::vector<T> dh(size_t(h), T(0));
    for (int i = 0; i < 2; ++i) {
      grads[lay_.cls2_b + size_t(i)] += dlogits[i];
      T* gw = grads.data() + lay_.cls2_w + size_t(i) * size_t(h);
      const T* w = P + lay_.cls2_w + size_t(i) * size_t(h);
      for (int j = 0; j < h; ++j) {
        gw[j] += dlogits[i] * cache.cls_hidden[size_t(j)];
        dh[size_t(j)] += w[j] * dlogits[i];
      }
    }
    const T slope = T(cfg_.leaky_slope);
    for (int i = 0; i < h; ++i)
      dh[size_t(i)] *= cache.cls_hidden[size_t(i)] > T(0) ? T(1) : slope;
    for (int i = 0; i < h; ++i) {
      grads[lay_.cls1_b + size_t(i)] += dh[size_t(i)];
      T* gw = grads.data() + lay_.cls1_w + size_t(i) * size_t(e);
      const T* w = P + lay_.cls1_w + size_t(i) * size_t(e);
      for (int j = 0; j < e; ++j) {
        gw[j] += dh[size_t(i)] * cache.cls_in[size_t(j)];
        d_emb[size_t(j)] += w[j] * dh[size_t(i)];
      }
    }
  }

  // Backward through encode; accumulates parameter grads.
  void encode_backward(const Cache& cache, std::span<const T> d_embedding,
                       std::span<T> grads) const {
    const int c = cfg_.residual_channels, e = cfg_.embedding_dim;
    const int frames = cache.frames, bins = cache.bins;
    const T* P = params_.data();

    std::vector<T> dpool(size_t(c), T(0));
    for (int i = 0; i < e; ++i) {
      const T d = d_embedding[size_t(i)];
      grads[lay_.emb_b + size_t(i)] += d;
      T* gw = grads.data() + lay_.emb_w + size_t(i) * size_t(c);
      const T* w = P + lay_.emb_w + size_t(i) * size_t(c);
      for (int ch = 0; ch < c; ++ch) {
        gw[ch] += d * cache.pooled[size_t(ch)];
        dpool[size_t(ch)] += w[ch] * d;
      }
    }

    const T inv_area = T(1.0 / (double(frames) * double(bins)));
    const T slope = T(cfg_.leaky_slope);

    // Mean pool spreads the gradient uniformly; the head's stored
    // post-activation sign recovers the leaky-ReLU mask.
    Plane<T> dhead;
    dhead.resize(c, frames, bins);
    for (int ch = 0; ch < c; ++ch) {
      const T base = dpool[size_t(ch)] * inv_area;
      for (int t = 0; t < frames; ++t) {
        const T* hrow = cache.head.row(ch, t);
        T* drow = dhead.row(ch, t);
        for (int f = 0; f < bins; ++f) drow[f] = hrow[f] > T(0) ? base : base * slope;
      }
    }

    const Plane<T>& xlast =
        cfg_.total_layers > 0 ? cache.xs[size_t(cfg_.total_layers - 1)] : cache.stem;
    Plane<T> dcur;
    dcur.resize(c, frames, bins);
    for (int ci = 0; ci < c; ++ci)
      for (int t = 0; t < frames; ++t) {
        T* o = dcur.row(ci, t);
        for (int f = 0; f < bins; ++f) o[f] = T(0);
      }
    for (int co = 0; co < c; ++co) {
      double gb = 0.0;
      for (int t = 0; t < frames; ++t) {
        const T* d = dhead.row(co, t);
        for (int f = 0; f < bins; ++f) gb += double(d[f]);
      }
      grads[lay_.head_b + size_t(co)] += T(gb);
      for (int ci = 0; ci < c; ++ci) {
        const T w = P[lay_.head_w + size_t(co) * size_t(c) + size_t(ci)];
        double gw = 0.0;
        for (int t = 0; t < frames; ++t) {
          const T* d = dhead.row(co, t);
          const T* xin = xlast.row(ci, t);
          T* o = dcur.row(ci, t);
          for (int f = 0; f < bins; ++f) {
            gw += double(d[f]) * double(xin[f]);
            o[f] += w * d[f];
          }
        }
        grads[lay_.head_w + size_t(co) * size_t(c) + size_t(ci)] += T(gw);
      }
    }

    Plane<T> dz, dprev;
    dz.resize(2 * c, frames, bins);
    dprev.resize(c, frames, bins);
    for (int l = cfg_.total_layers - 1; l >= 0; --l) {
      const Plane<T>& z = cache.gates[size_t(l)];
      const Plane<T>& xin = l > 0 ? cache.xs[size_t(l - 1)] : cache.stem;
      for (int ch = 0; ch < c; ++ch)
        for (int t = 0; t < frames; ++t) {
          const T* d = dcur.row(ch, t);
          const T* gt = z.row(ch, t);
          const T* gs = z.row(c + ch, t);
          T* da = dz.row(ch, t);
          T* db = dz.row(c + ch, t);
          for (int f = 0; f < bins; ++f) {
            da[f] = d[f] * gs[f] * (T(1) - gt[f] * gt[f]);
            db[f] = d[f] * gt[f] * gs[f] * (T(1) - gs[f]);
          }
        }
      kernels::conv3x3_bwd_weights(xin, dz, cfg_.dilation(l),
                                   grads.data() + lay_.layer_w[size_t(l)],
                                   grads.data() + lay_.layer_b[size_t(l)]);
      kernels::conv3x3_bwd_input(dz, P + lay_.layer_w[size_t(l)], c, cfg_.dilation(l), dprev);
      for (int ch = 0; ch < c; ++ch)
        for (int t = 0; t < frames; ++t) {
          T* o = dprev.row(ch, t);
          const T* d = dcur.row(ch, t);
          for (int f = 0; f < bins; ++f) o[f] += d[f];  // residual path
        }
      std::swap(dcur, dprev);
    }

    // Initial conv: mask from the stored post-activation sign.
    for (int ch = 0; ch < c; ++ch)
      for (int t = 0; t < frames; ++t) {
        T* d = dcur.row(ch, t);
        const T* a = cache.stem.row(ch, t);
        for (int f = 0; f < bins; ++f) d[f] = a[f] > T(0) ? d[f] : d[f] * slope;
      }
    kernels::conv3x3_bwd_weights(cache.input, dcur, 1, grads.data() + lay_.conv_in_w,
                                 grads.data() + lay_.conv_in_b);
  }

 private:
  static ParamLayout check_and_build(const EncoderConfig& cfg) {
    cfg.validate();
    return ParamLayout::build(cfg);
  }

  T leaky(T v) const { return v > T(0) ? v : T(cfg_.leaky_slope) * v; }

  void leaky_relu_plane(Plane<T>& p) const {
    const T slope = T(cfg_.leaky_slope);
    for (int ch = 0; ch < p.channels; ++ch)
      for (int t = 0; t < p.frames; ++t) {
        T* row = p.row(ch, t);
        for (int f = 0; f < p.bins; ++f) row[f] = row[f] > T(0) ? row[f] : slope * row[f];
      }
  }

  void prepare_cache(Cache& cache, int frames, int bins) const {
    const int c = cfg_.residual_channels;
    if (cache.frames == frames && cache.bins == bins &&
        cache.gates.size() == size_t(cfg_.total_layers))
      return;  // buffers are reused; interiors are fully overwritten each pass
    cache.frames = frames;
    cache.bins = bins;
    cache.input.resize(1, frames, bins);
    cache.stem.resize(c, frames, bins);
    cache.gates.resize(size_t(cfg_.total_layers));
    cache.xs.resize(size_t(cfg_.total_layers));
    for (int l = 0; l < cfg_.total_layers; ++l) {
      cache.gates[size_t(l)].resize(2 * c, frames, bins);
      cache.xs[size_t(l)].resize(c, frames, bins);
    }
    cache.head.resize(c, frames, bins);
    cache.pooled.assign(size_t(c), T(0));
    cache.embedding.assign(size_t(cfg_.embedding_dim), T(0));
  }

  void init_params(uint64_t seed) {
    Rng rng(seed);
    const int c = cfg_.residual_channels;
    const double leaky_gain = std::sqrt(2.0 / (1.0 + cfg_.leaky_slope * cfg_.leaky_slope));
    auto fill = [&](size_t off, size_t count, int fan_in, double gain) {
      const double s = gain * std::sqrt(3.0 / double(fan_in));
      for (size_t i = 0; i < count; ++i) params_[off + i] = T(rng.uniform(-s, s));
    };
    fill(lay_.conv_in_w, size_t(c) * 9, 9, leaky_gain);
    for (int l = 0; l < cfg_.total_layers; ++l)
      fill(lay_.layer_w[size_t(l)], size_t(2 * c) * size_t(c) * 9, 9 * c, 1.0);
    fill(lay_.head_w, size_t(c) * size_t(c), c, leaky_gain);
    fill(lay_.emb_w, size_t(cfg_.embedding_dim) * size_t(c), c, 1.0);
    fill(lay_.cls1_w, size_t(cfg_.classifier_hidden) * size_t(cfg_.embedding_dim),
         cfg_.embedding_dim, leaky_gain);
    fill(lay_.cls2_w, 2 * size_t(cfg_.classifier_hidden), cfg_.classifier_hidden, 1.0);
    set_omega(10.0);
    set_sim_bias(-5.0);
  }

  EncoderConfig cfg_;
  ParamLayout lay_;
  std::vector<T> params_;
};

}  // namespace vqe

#endif  // VQE_MODEL_HPP
