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

#ifndef VQE_SYNTH_HPP
#define VQE_SYNTH_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vqe/audio.hpp"
#include "vqe/manifest.hpp"

namespace vqe {

// Source-filter sustained-/a/ synthesis: glottal flow derivative pulse train
// with per-cycle jitter/shimmer perturbation, a formant resonator cascade,
// and aspiration noise calibrated to an exact harmonics-to-noise power ratio.
struct PhonationParams {
  double f0 = 120.0;        // Hz
  double jitter = 0.0;      // fractional cycle-length std
  double shimmer = 0.0;     // fractional amplitude std
  double hnr_db = 25.0;     // harmonics-to-noise ratio; >= 1e9 means noiseless
  double duration = 1.5;    // seconds
  uint64_t seed = 0;

  void validate() const;
};

AudioClip synthesize_phonation(const PhonationParams& p, int sample_rate);

// Per-class parameter ranges for the synthetic corpus. Defaults keep the two
// classes disjoint in every dimension.
struct SyntheticClassRanges {
  double healthy_jitter[2] = {0.001, 0.005};
  double healthy_shimmer[2] = {0.01, 0.03};
  double healthy_hnr_db[2] = {20.0, 30.0};
  double dysphonic_jitter[2] = {0.015, 0.04};
  double dysphonic_shimmer[2] = {0.06, 0.12};
  double dysphonic_hnr_db[2] = {4.0, 12.0};
  double female_f0[2] = {180.0, 240.0};
  double male_f0[2] = {90.0, 140.0};
  double duration[2] = {1.2, 2.0};
};

// Writes WAV files plus manifest.jsonl under out_dir and returns the records.
// Labels and genders are balanced; byte-identical output for a fixed seed.
std::vector<ManifestRecord> build_synthetic_corpus(int n_speakers,
                                                   const std::filesystem::path& out_dir,
                                                   uint64_t seed,
                                                   const SyntheticClassRanges& ranges = {});

// Desk-scale warp-bank material: a synthetic room/device impulse response
// (direct path, sparse early reflections, exponentially decaying tail) and a
// shaped environmental noise bed (pink-ish spectrum with slow amplitude
// modulation).
AudioClip make_impulse_response(uint64_t seed, int sample_rate);
AudioClip make_environment_noise(uint64_t seed, int sample_rate, double duration_s = 3.0);

// Writes n_irs + n_noises WAVs into out_dir/ir and out_dir/noise.
void build_warp_bank_fixtures(const std::filesystem::path& out_dir, int n_irs, int n_noises,
                              uint64_t seed, int sample_rate);

}  // namespace vqe

#endif  // VQE_SYNTH_HPP
