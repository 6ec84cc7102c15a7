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

#include "vqe/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace vqe {

namespace {

constexpr char kMagic[8] = {'V', 'Q', 'E', 'C', 'K', 'P', 'T', '1'};
constexpr uint32_t kVersion = 1;

// Explicit little-endian writers keep the file readable across platforms.
void put_u32(std::ostream& os, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = char((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}
void put_u64(std::ostream& os, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = char((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}
void put_i32(std::ostream& os, int32_t v) { put_u32(os, uint32_t(v)); }
void put_f64(std::ostream& os, double v) {
  uint64_t u;
  std::memcpy(&u, &v, 8);
  put_u64(os, u);
}
void put_f32(std::ostream& os, float v) {
  uint32_t u;
  std::memcpy(&u, &v, 4);
  put_u32(os, u);
}
void put_str(std::ostream& os, const std::string& s) {
  put_u64(os, s.size());
  os.write(s.data(), std::streamsize(s.size()));
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}
uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}
int32_t get_i32(std::istream& is) { return int32_t(get_u32(is)); }
double get_f64(std::istream& is) {
  const uint64_t u = get_u64(is);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}
float get_f32(std::istream& is) {
  const uint32_t u = get_u32(is);
  float v;
  std::memcpy(&v, &u, 4);
  return v;
}
std::string get_str(std::istream& is) {
  const uint64_t n = get_u64(is);
  std::string s(n, '\0');
  is.read(s.data(), std::streamsize(n));
  if (!is) throw std::runtime_error("checkpoint: truncated string");
  return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
  os.write(kMagic, 8);
  put_u32(os, kVersion);

  const TrainConfig& c = ckpt.config;
  put_i32(os, c.model.total_layers);
  put_i32(os, c.model.block_count);
  put_i32(os, c.model.residual_channels);
  put_i32(os, c.model.kernel_size);
  put_i32(os, c.model.embedding_dim);
  put_i32(os, c.model.classifier_hidden);
  put_f64(os, c.model.leaky_slope);

  put_f64(os, c.warp.skip_prob);
  put_f64(os, c.warp.snr_range_db[0]);
  put_f64(os, c.warp.snr_range_db[1]);
  put_f64(os, c.warp.pitch_range_cents[0]);
  put_f64(os, c.warp.pitch_range_cents[1]);

  put_i32(os, c.samples_per_class);
  put_u64(os, c.steps);
  put_f64(os, c.learning_rate);
  put_f64(os, c.lambda);
  put_u64(os, c.seed);
  put_u32(os, uint32_t(c.ablation.data_warping) | uint32_t(c.ablation.classification_loss) << 1 |
                  uint32_t(c.ablation.contrastive_loss) << 2 | uint32_t(c.ge2e_exclude_self) << 3);
  put_u64(os, c.checkpoint_interval);
  put_i32(os, c.threads);

  put_u64(os, ckpt.step);
  put_str(os, "sgd");  // optimizer tag; plain SGD has no state
  put_u64(os, 0);      // optimizer state length

  put_u64(os, ckpt.params.size());
  for (float v : ckpt.params) put_f32(os, v);
  put_str(os, ckpt.rng_state);
  put_f64(os, ckpt.loss_sum);
  put_u64(os, ckpt.loss_count);
  if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("load_checkpoint: bad magic in " + path.string());
  const uint32_t version = get_u32(is);
  if (version != kVersion)
    throw std::runtime_error("load_checkpoint: unsupported version " + std::to_string(version));

  Checkpoint ckpt;
  TrainConfig& c = ckpt.config;
  c.model.total_layers = get_i32(is);
  c.model.block_count = get_i32(is);
  c.model.residual_channels = get_i32(is);
  c.model.kernel_size = get_i32(is);
  c.model.embedding_dim = get_i32(is);
  c.model.classifier_hidden = get_i32(is);
  c.model.leaky_slope = get_f64(is);

  c.warp.skip_prob = get_f64(is);
  c.warp.snr_range_db[0] = get_f64(is);
  c.warp.snr_range_db[1] = get_f64(is);
  c.warp.pitch_range_cents[0] = get_f64(is);
  c.warp.pitch_range_cents[1] = get_f64(is);

  c.samples_per_class = get_i32(is);
  c.steps = get_u64(is);
  c.learning_rate = get_f64(is);
  c.lambda = get_f64(is);
  c.seed = get_u64(is);
  const uint32_t flags = get_u32(is);
  c.ablation.data_warping = flags & 1;
  c.ablation.classification_loss = flags & 2;
  c.ablation.contrastive_loss = flags & 4;
  c.ge2e_exclude_self = flags & 8;
  c.checkpoint_interval = get_u64(is);
  c.threads = get_i32(is);

  ckpt.step = get_u64(is);
  const std::string opt_tag = get_str(is);
  if (opt_tag != "sgd")
    throw std::runtime_error("load_checkpoint: unknown optimizer tag '" + opt_tag + "'");
  const uint64_t opt_len = get_u64(is);
  is.seekg(std::streamoff(opt_len), std::ios::cur);

  const uint64_t n = get_u64(is);
  ckpt.params.resize(n);
  for (uint64_t i = 0; i < n; ++i) ckpt.params[i] = get_f32(is);
  ckpt.rng_state = get_str(is);
  ckpt.loss_sum = get_f64(is);
  ckpt.loss_count = get_u64(is);
  return ckpt;
}

}  // namespace vqe
