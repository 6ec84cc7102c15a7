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

#include "vqe/model.hpp"

using namespace vqe;

namespace {

EncoderConfig tiny_config() {
  EncoderConfig cfg;
  cfg.total_layers = 3;
  cfg.block_count = 1;
  cfg.residual_channels = 4;
  cfg.embedding_dim = 16;
  cfg.classifier_hidden = 8;
  return cfg;
}

template <typename T>
std::vector<T> random_patch(int frames, int bins, uint64_t seed) {
  Rng rng(seed);
  std::vector<T> patch(size_t(frames) * size_t(bins));
  for (auto& v : patch) v = T(rng.uniform(-2.0, 2.0));
  return patch;
}

}  // namespace

TEST_CASE("init: same seed gives identical parameter bytes") {
  const EncoderConfig cfg = tiny_config();
  Model<float> a(cfg, 42), b(cfg, 42);
  REQUIRE(a.params().size() == b.params().size());
  for (size_t i = 0; i < a.params().size(); ++i) CHECK(a.params()[i] == b.params()[i]);
  Model<float> c(cfg, 43);
  bool any_different = false;
  for (size_t i = 0; i < a.params().size(); ++i) any_different |= a.params()[i] != c.params()[i];
  CHECK(any_different);
}

TEST_CASE("init: omega starts at 10 and the similarity bias at -5") {
  Model<float> m(tiny_config(), 1);
  CHECK(m.omega() == doctest::Approx(10.0));
  CHECK(m.sim_bias() == doctest::Approx(-5.0));
}

TEST_CASE("config: dilations double within each block") {
  EncoderConfig cfg;
  cfg.total_layers = 15;
  cfg.block_count = 3;  // n = 5
  std::vector<int> dils;
  for (int l = 0; l < 10; ++l) dils.push_back(cfg.dilation(l));
  CHECK(dils == std::vector<int>{1, 2, 4, 8, 16, 1, 2, 4, 8, 16});

  cfg.block_count = 5;  // default n = 3
  dils.clear();
  for (int l = 0; l < 6; ++l) dils.push_back(cfg.dilation(l));
  CHECK(dils == std::vector<int>{1, 2, 4, 1, 2, 4});
}

TEST_CASE("config: indivisible layers/blocks is an error") {
  EncoderConfig cfg;
  cfg.total_layers = 15;
  cfg.block_count = 4;
  CHECK_THROWS(cfg.validate());
  cfg.block_count = 0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("parameter count is a pure function of the config") {
  const EncoderConfig cfg = tiny_config();
  Model<float> a(cfg, 7), b(cfg, 8888);
  CHECK(a.param_count() == b.param_count());
  // conv_in + layers + head + emb + cls + omega/bias
  const size_t c = 4;
  const size_t expected = (c * 9 + c) + 3 * (2 * c * c * 9 + 2 * c) + (c * c + c) +
                          (16 * c + 16) + (8 * 16 + 8) + (2 * 8 + 2) + 2;
  CHECK(a.param_count() == expected);
}

TEST_CASE("encode: deterministic and finite") {
  Model<float> m(tiny_config(), 3);
  const auto patch = random_patch<float>(kPatchFrames, 33, 5);
  Model<float>::Cache c1, c2;
  m.encode(patch.data(), kPatchFrames, 33, c1);
  m.encode(patch.data(), kPatchFrames, 33, c2);
  REQUIRE(c1.embedding.size() == 16);
  for (size_t i = 0; i < c1.embedding.size(); ++i) {
    CHECK(std::isfinite(c1.embedding[i]));
    CHECK(c1.embedding[i] == c2.embedding[i]);
  }
}

TEST_CASE("encode: default config gives a 256-dim embedding") {
  EncoderConfig cfg;
  cfg.total_layers = 3;
  cfg.block_count = 3;
  cfg.residual_channels = 8;
  Model<float> m(cfg, 9);
  const auto patch = random_patch<float>(kPatchFrames, 129, 11);
  Model<float>::Cache cache;
  m.encode(patch.data(), kPatchFrames, 129, cache);
  CHECK(cache.embedding.size() == 256);
}

TEST_CASE("encode: perturbing one input cell changes the embedding") {
  Model<float> m(tiny_config(), 13);
  auto patch = random_patch<float>(kPatchFrames, 33, 17);
  Model<float>::Cache base, poked;
  m.encode(patch.data(), kPatchFrames, 33, base);
  const auto before = base.embedding;
  patch[size_t(12) * 33 + 16] += 1.0f;
  m.encode(patch.data(), kPatchFrames, 33, poked);
  double diff = 0.0;
  for (size_t i = 0; i < before.size(); ++i)
    diff += std::fabs(double(poked.embedding[i]) - double(before[i]));
  CHECK(diff > 1e-6);
}

TEST_CASE("encode: gated unit outputs stay inside (-1, 1)") {
  Model<float> m(tiny_config(), 19);
  const auto patch = random_patch<float>(kPatchFrames, 33, 23);
  Model<float>::Cache cache;
  m.encode(patch.data(), kPatchFrames, 33, cache);
  const int c = m.config().residual_channels;
  for (int l = 0; l < m.config().total_layers; ++l) {
    const auto& z = cache.gates[size_t(l)];
    for (int ch = 0; ch < c; ++ch)
      for (int t = 0; t < cache.frames; ++t) {
        const float* gt = z.row(ch, t);
        const float* gs = z.row(c + ch, t);
        for (int f = 0; f < cache.bins; ++f) {
          const double g = double(gt[f]) * double(gs[f]);
          CHECK(g > -1.0);
          CHECK(g < 1.0);
        }
      }
  }
}

TEST_CASE("encode: wrong frame count is a shape error") {
  Model<float> m(tiny_config(), 29);
  const auto patch = random_patch<float>(23, 33, 31);
  Model<float>::Cache cache;
  CHECK_THROWS(m.encode(patch.data(), 23, 33, cache));
}

TEST_CASE("classify: log-probabilities normalize and are 2-dimensional") {
  Model<double> m(tiny_config(), 37);
  Rng rng(41);
  Model<double>::Cache cache;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> emb(16);
    for (auto& v : emb) v = rng.uniform(-3.0, 3.0);
    m.classify(emb, cache);
    REQUIRE(cache.logp.size() == 2);
    CHECK(std::exp(cache.logp[0]) + std::exp(cache.logp[1]) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("classify: shifting both logits leaves the output unchanged") {
  // Shift invariance through the bias of the last layer.
  Model<double> m(tiny_config(), 43);
  std::vector<double> emb(16, 0.3);
  Model<double>::Cache before;
  m.classify(emb, before);
  auto& params = m.params();
  params[m.layout().cls2_b] += 7.5;
  params[m.layout().cls2_b + 1] += 7.5;
  Model<double>::Cache after;
  m.classify(emb, after);
  CHECK(after.logp[0] == doctest::Approx(before.logp[0]).epsilon(1e-6));
  CHECK(after.logp[1] == doctest::Approx(before.logp[1]).epsilon(1e-6));
}

TEST_CASE("encode gradients agree with finite differences on a tiny model") {
  // Scalar probe loss: sum of the embedding; double precision throughout.
  EncoderConfig cfg = tiny_config();
  cfg.total_layers = 2;
  cfg.block_count = 1;
  cfg.residual_channels = 2;
  cfg.embedding_dim = 3;
  Model<double> m(cfg, 47);
  const auto patch = random_patch<double>(kPatchFrames, 9, 53);

  Model<double>::Cache cache;
  m.encode(patch.data(), kPatchFrames, 9, cache);
  std::vector<double> grads(m.param_count(), 0.0);
  std::vector<double> d_emb(3, 1.0);
  m.encode_backward(cache, d_emb, grads);

  auto loss = [&]() {
    Model<double>::Cache c;
    m.encode(patch.data(), kPatchFrames, 9, c);
    return c.embedding[0] + c.embedding[1] + c.embedding[2];
  };
  Rng pick(59);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const size_t i = size_t(pick.next_below(m.param_count()));
    const double h = 1e-6;
    const double saved = m.params()[i];
    m.params()[i] = saved + h;
    const double up = loss();
    m.params()[i] = saved - h;
    const double down = loss();
    m.params()[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    const double scale = std::max({1e-6, std::fabs(fd), std::fabs(grads[i])});
    CHECK(std::fabs(fd - grads[i]) / scale < 1e-4);
    ++checked;
  }
  CHECK(checked == 60);
}
