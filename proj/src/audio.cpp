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

#include "vqe/audio.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace vqe {

namespace {

void put_u32(std::string& s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(char((v >> (8 * i)) & 0xff));
}
void put_u16(std::string& s, uint16_t v) {
  for (int i = 0; i < 2; ++i) s.push_back(char((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(const uint8_t* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}
uint16_t get_u16(const uint8_t* p) { return uint16_t(p[0]) | uint16_t(p[1]) << 8; }

}  // namespace

float AudioClip::peak() const {
  float p = 0.0f;
  for (float s : samples) p = std::max(p, std::fabs(s));
  return p;
}

double AudioClip::rms() const {
  double acc = 0.0;
  for (float s : samples) acc += double(s) * double(s);
  return samples.empty() ? 0.0 : std::sqrt(acc / double(samples.size()));
}

void AudioClip::validate() const {
  if (sample_rate <= 0) throw std::invalid_argument("AudioClip: sample_rate must be positive");
  if (samples.empty()) throw std::invalid_argument("AudioClip: empty sample array");
  for (float s : samples)
    if (!std::isfinite(s)) throw std::invalid_argument("AudioClip: non-finite sample");
}

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_wav: cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const uint8_t* p = reinterpret_cast<const uint8_t*>(data.data());
  const size_t n = data.size();
  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    throw std::runtime_error("read_wav: not a RIFF/WAVE file: " + path.string());

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const uint8_t* payload = nullptr;
  uint32_t payload_len = 0;

  size_t off = 12;
  while (off + 8 <= n) {
    const uint32_t chunk_len = get_u32(p + off + 4);
    const uint8_t* body = p + off + 8;
    if (off + 8 + chunk_len > n) throw std::runtime_error("read_wav: truncated chunk in " + path.string());
    if (std::memcmp(p + off, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw std::runtime_error("read_wav: short fmt chunk");
      format = get_u16(body);
      channels = get_u16(body + 2);
      rate = get_u32(body + 4);
      bits = get_u16(body + 14);
    } else if (std::memcmp(p + off, "data", 4) == 0) {
      payload = body;
      payload_len = chunk_len;
    }
    off += 8 + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }
  if (!payload) throw std::runtime_error("read_wav: no data chunk in " + path.string());
  if (channels != 1)
    throw std::runtime_error("read_wav: mono required, got " + std::to_string(channels) +
                             " channels in " + path.string());

  AudioClip clip;
  clip.sample_rate = int(rate);
  if (format == 1 && bits == 16) {
    const size_t count = payload_len / 2;
    clip.samples.resize(count);
    for (size_t i = 0; i < count; ++i) {
      const int16_t v = int16_t(get_u16(payload + 2 * i));
      clip.samples[i] = float(v) / 32768.0f;
    }
  } else if (format == 3 && bits == 32) {
    const size_t count = payload_len / 4;
    clip.samples.resize(count);
    for (size_t i = 0; i < count; ++i) {
      const uint32_t u = get_u32(payload + 4 * i);
      float f;
      std::memcpy(&f, &u, 4);
      clip.samples[i] = f;
    }
  } else {
    throw std::runtime_error("read_wav: unsupported encoding (PCM16 and float32 only) in " +
                             path.string());
  }
  clip.validate();
  return clip;
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip, WavFormat format) {
  clip.validate();
  const uint32_t count = uint32_t(clip.samples.size());
  const bool f32 = format == WavFormat::float32;
  const uint16_t bytes_per = f32 ? 4 : 2;
  const uint32_t data_len = count * bytes_per;

  std::string out;
  out.reserve(64 + data_len);
  out += "RIFF";
  put_u32(out, 4 + (8 + 16) + (f32 ? 8 + 4 : 0) + 8 + data_len);
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, f32 ? 3 : 1);
  put_u16(out, 1);
  put_u32(out, uint32_t(clip.sample_rate));
  put_u32(out, uint32_t(clip.sample_rate) * bytes_per);
  put_u16(out, bytes_per);
  put_u16(out, uint16_t(8 * bytes_per));
  if (f32) {
    out += "fact";
    put_u32(out, 4);
    put_u32(out, count);
  }
  out += "data";
  put_u32(out, data_len);
  if (f32) {
    for (float s : clip.samples) {
      uint32_t u;
      std::memcpy(&u, &s, 4);
      put_u32(out, u);
    }
  } else {
    for (float s : clip.samples) {
      const float clamped = std::fmin(1.0f, std::fmax(-1.0f, s));
      const int v = int(std::lrintf(clamped * 32767.0f));
      put_u16(out, uint16_t(int16_t(v)));
    }
  }

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("write_wav: cannot open " + path.string() + " for writing");
  os.write(out.data(), std::streamsize(out.size()));
  if (!os) throw std::runtime_error("write_wav: write failed for " + path.string());
}

}  // namespace vqe
