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

#include "vqe/synth.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "vqe/resample.hpp"
#include "vqe/rng.hpp"

namespace vqe {

namespace {

// /a/ formants. Bandwidths are kept wide enough that resonator ringing dies
// within a cycle; otherwise jitter smears the ringing across cycle boundaries
// and inflates the measured noise floor.
constexpr double kFormantFreq[4] = {730.0, 1090.0, 2440.0, 3400.0};
constexpr double kFormantBw[4] = {130.0, 140.0, 200.0, 280.0};

struct Resonator {
  double b1 = 0.0, b2 = 0.0, a0 = 0.0;
  double y1 = 0.0, y2 = 0.0;

  Resonator(double freq, double bw, double fs) {
    const double r = std::exp(-M_PI * bw / fs);
    b1 = 2.0 * r * std::cos(2.0 * M_PI * freq / fs);
    b2 = -r * r;
    a0 = 1.0 - b1 - b2;  // unity DC gain
  }

  double tick(double x) {
    const double y = a0 * x + b1 * y1 + b2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

// One-pole highpass used to shape aspiration noise toward the turbulence
// band before the vocal-tract filter.
struct Highpass {
  double a = 0.0, x1 = 0.0, y1 = 0.0;
  Highpass(double fc, double fs) {
    const double c = std::tan(M_PI * fc / fs);
    a = (1.0 - c) / (1.0 + c);
  }
  double tick(double x) {
    const double y = 0.5 * (1.0 + a) * (x - x1) + a * y1;
    x1 = x;
    y1 = y;
    return y;
  }
};

// Derivative of a Rosenberg-style glottal flow pulse over phase in [0, 1).
double glottal_flow_derivative(double phase) {
  constexpr double open_end = 0.40;
  constexpr double close_end = 0.58;
  if (phase < open_end) {
    return 0.5 * (M_PI / open_end) * std::sin(M_PI * phase / open_end);
  }
  if (phase < close_end) {
    const double u = (phase - open_end) / (close_end - open_end);
    return -(M_PI / (2.0 * (close_end - open_end))) * std::sin(M_PI * u * 0.5);
  }
  return 0.0;
}

std::vector<double> apply_formants(const std::vector<double>& x, double fs) {
  Resonator r1(kFormantFreq[0], kFormantBw[0], fs);
  Resonator r2(kFormantFreq[1], kFormantBw[1], fs);
  Resonator r3(kFormantFreq[2], kFormantBw[2], fs);
  Resonator r4(kFormantFreq[3], kFormantBw[3], fs);
  std::vector<double> y(x.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] = r4.tick(r3.tick(r2.tick(r1.tick(x[i]))));
  return y;
}

double power(const std::vector<double>& x, size_t lo, size_t hi) {
  double acc = 0.0;
  for (size_t i = lo; i < hi; ++i) acc += x[i] * x[i];
  return acc / double(hi - lo);
}

}  // namespace

void PhonationParams::validate() const {
  if (!(f0 > 0.0)) throw std::invalid_argument("PhonationParams: f0 must be positive");
  if (jitter < 0.0 || shimmer < 0.0)
    throw std::invalid_argument("PhonationParams: jitter and shimmer must be non-negative");
  if (!(duration > 0.0)) throw std::invalid_argument("PhonationParams: duration must be positive");
  if (std::isnan(hnr_db)) throw std::invalid_argument("PhonationParams: hnr_db is NaN");
}

AudioClip synthesize_phonation(const PhonationParams& p, int sample_rate) {
  p.validate();
  if (sample_rate <= 0) throw std::invalid_argument("synthesize_phonation: bad sample rate");

  const double fs = double(sample_rate);
  const size_t n = size_t(std::llround(p.duration * fs));
  if (n < 8) throw std::invalid_argument("synthesize_phonation: duration too short");

  Rng rng(p.seed);

  // Glottal source: phase accumulator whose cycle length is redrawn at each
  // wrap. With jitter = 0 the output is exactly periodic with period 1/f0.
  std::vector<double> source(n, 0.0);
  const double nominal_period = 1.0 / p.f0;
  double phase = 0.0;
  double period = nominal_period;
  double amp = 1.0;
  auto redraw_cycle = [&]() {
    double zj = rng.normal();
    zj = std::fmax(-3.0, std::fmin(3.0, zj));
    period = nominal_period * std::fmax(0.2, 1.0 + p.jitter * zj);
    double za = rng.normal();
    za = std::fmax(-3.0, std::fmin(3.0, za));
    amp = std::fmax(0.05, 1.0 + p.shimmer * za);
  };
  redraw_cycle();
  for (size_t i = 0; i < n; ++i) {
    source[i] = amp * glottal_flow_derivative(phase);
    phase += 1.0 / (period * fs);
    if (phase >= 1.0) {
      phase -= 1.0;
      redraw_cycle();
    }
  }

  std::vector<double> harmonic = apply_formants(source, fs);

  // Aspiration noise takes the same vocal-tract path; its gain is set from
  // the measured post-filter powers so the harmonics-to-noise power ratio
  // over the steady region equals hnr_db exactly.
  const bool noiseless = std::isinf(p.hnr_db) || p.hnr_db >= 1e9;
  std::vector<double> noise;
  double noise_gain = 0.0;
  if (!noiseless) {
    std::vector<double> raw(n);
    Highpass hp(400.0, fs);
    for (size_t i = 0; i < n; ++i) raw[i] = hp.tick(rng.normal());
    noise = apply_formants(raw, fs);
    const size_t lo = std::min(n / 8, size_t(std::llround(0.05 * fs)));
    const size_t hi = n - lo;
    const double ph = power(harmonic, lo, hi);
    const double pn = power(noise, lo, hi);
    if (pn > 0.0) noise_gain = std::sqrt(ph / pn * std::pow(10.0, -p.hnr_db / 10.0));
  }

  std::vector<double> mix(n);
  for (size_t i = 0; i < n; ++i)
    mix[i] = harmonic[i] + (noiseless ? 0.0 : noise_gain * noise[i]);

  // 10 ms raised-cosine fades, then a common gain to a 0.5 peak. Both parts
  // are scaled together, so the ratio is untouched.
  const size_t fade = std::min(n / 4, size_t(std::llround(0.01 * fs)));
  for (size_t i = 0; i < fade; ++i) {
    const double w = 0.5 * (1.0 - std::cos(M_PI * double(i) / double(fade)));
    mix[i] *= w;
    mix[n - 1 - i] *= w;
  }
  double peak = 0.0;
  for (double v : mix) peak = std::max(peak, std::fabs(v));
  const double gain = peak > 0.0 ? 0.5 / peak : 1.0;

  AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.samples.resize(n);
  for (size_t i = 0; i < n; ++i) clip.samples[i] = float(mix[i] * gain);
  return clip;
}

std::vector<ManifestRecord> build_synthetic_corpus(int n_speakers,
                                                   const std::filesystem::path& out_dir,
                                                   uint64_t seed,
                                                   const SyntheticClassRanges& ranges) {
  if (n_speakers < 4)
    throw std::invalid_argument("build_synthetic_corpus: need at least 4 speakers");

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "audio", ec);
  if (ec || !std::filesystem::is_directory(out_dir / "audio"))
    throw std::runtime_error("build_synthetic_corpus: cannot create " + (out_dir / "audio").string());

  // Cell order alternates both label and gender so partial rounds stay as
  // balanced as possible on both margins.
  const std::pair<Label, Gender> cells[4] = {
      {Label::dysphonic, Gender::female},
      {Label::healthy, Gender::male},
      {Label::dysphonic, Gender::male},
      {Label::healthy, Gender::female},
  };

  std::vector<ManifestRecord> records;
  records.reserve(size_t(n_speakers));
  for (int i = 0; i < n_speakers; ++i) {
    const auto [label, gender] = cells[i % 4];
    Rng rng(derive_seed(seed, uint64_t(i)));

    const bool dys = label == Label::dysphonic;
    PhonationParams p;
    p.jitter = dys ? rng.uniform(ranges.dysphonic_jitter[0], ranges.dysphonic_jitter[1])
                   : rng.uniform(ranges.healthy_jitter[0], ranges.healthy_jitter[1]);
    p.shimmer = dys ? rng.uniform(ranges.dysphonic_shimmer[0], ranges.dysphonic_shimmer[1])
                    : rng.uniform(ranges.healthy_shimmer[0], ranges.healthy_shimmer[1]);
    p.hnr_db = dys ? rng.uniform(ranges.dysphonic_hnr_db[0], ranges.dysphonic_hnr_db[1])
                   : rng.uniform(ranges.healthy_hnr_db[0], ranges.healthy_hnr_db[1]);
    p.f0 = gender == Gender::female ? rng.uniform(ranges.female_f0[0], ranges.female_f0[1])
                                    : rng.uniform(ranges.male_f0[0], ranges.male_f0[1]);
    p.duration = rng.uniform(ranges.duration[0], ranges.duration[1]);
    p.seed = derive_seed(seed, 0x10000u + uint64_t(i));

    const AudioClip clip = synthesize_phonation(p, kWorkingRate);

    char name[32];
    std::snprintf(name, sizeof(name), "s%04d", i);
    ManifestRecord r;
    r.speaker_id = name;
    r.session_id = "a";
    r.label = label;
    r.gender = gender;
    r.corpus = "synthetic";
    r.path = std::string("audio/") + name + "_a.wav";
    r.sample_rate = clip.sample_rate;
    r.duration = clip.duration();
    write_wav(out_dir / r.path, clip);
    records.push_back(std::move(r));
  }

  nlohmann::json ranges_json;
  ranges_json["healthy"] = {{"jitter", {ranges.healthy_jitter[0], ranges.healthy_jitter[1]}},
                            {"shimmer", {ranges.healthy_shimmer[0], ranges.healthy_shimmer[1]}},
                            {"hnr_db", {ranges.healthy_hnr_db[0], ranges.healthy_hnr_db[1]}}};
  ranges_json["dysphonic"] = {{"jitter", {ranges.dysphonic_jitter[0], ranges.dysphonic_jitter[1]}},
                              {"shimmer", {ranges.dysphonic_shimmer[0], ranges.dysphonic_shimmer[1]}},
                              {"hnr_db", {ranges.dysphonic_hnr_db[0], ranges.dysphonic_hnr_db[1]}}};
  ranges_json["f0"] = {{"female", {ranges.female_f0[0], ranges.female_f0[1]}},
                       {"male", {ranges.male_f0[0], ranges.male_f0[1]}}};
  std::vector<std::string> header = {
      "synthetic sustained-/a/ corpus; seed " + std::to_string(seed),
      "class parameter ranges: " + ranges_json.dump(),
      "all clips peak-normalized to 0.5 at synthesis; ingestion applies no normalization",
  };
  save_manifest(out_dir / "manifest.jsonl", records, header);
  return records;
}

AudioClip make_impulse_response(uint64_t seed, int sample_rate) {
  Rng rng(seed);
  const double fs = double(sample_rate);
  const size_t n = size_t(std::llround(0.25 * fs));
  std::vector<double> ir(n, 0.0);
  ir[0] = 1.0;
  const int reflections = 3 + int(rng.next_below(5));
  for (int k = 0; k < reflections; ++k) {
    const size_t d = size_t(std::llround(rng.uniform(0.001, 0.018) * fs));
    if (d < n) ir[d] += rng.uniform(0.15, 0.55) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
  }
  const double tau = rng.uniform(0.030, 0.120);
  const double tail_level = rng.uniform(0.05, 0.25);
  for (size_t i = 1; i < n; ++i)
    ir[i] += tail_level * rng.normal() * std::exp(-double(i) / (tau * fs));
  // Device coloration: one-pole lowpass with a random corner.
  const double a = rng.uniform(0.0, 0.6);
  double y1 = 0.0;
  for (size_t i = 0; i < n; ++i) {
    y1 = (1.0 - a) * ir[i] + a * y1;
    ir[i] = y1;
  }
  double peak = 0.0;
  for (double v : ir) peak = std::max(peak, std::fabs(v));
  AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.samples.resize(n);
  for (size_t i = 0; i < n; ++i) clip.samples[i] = float(ir[i] / peak);
  return clip;
}

AudioClip make_environment_noise(uint64_t seed, int sample_rate, double duration_s) {
  Rng rng(seed);
  const double fs = double(sample_rate);
  const size_t n = size_t(std::llround(duration_s * fs));
  std::vector<double> x(n);
  // Pink-ish spectrum: white + heavier one-pole lowpassed component.
  const double a = rng.uniform(0.95, 0.995);
  const double lf_mix = rng.uniform(2.0, 8.0);
  double y1 = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double w = rng.normal();
    y1 = a * y1 + (1.0 - a) * w;
    x[i] = w + lf_mix * y1;
  }
  // Slow amplitude modulation for an environmental feel.
  const double mod_hz = rng.uniform(0.3, 2.0);
  const double depth = rng.uniform(0.2, 0.6);
  const double phi = rng.uniform(0.0, 2.0 * M_PI);
  for (size_t i = 0; i < n; ++i)
    x[i] *= 1.0 + depth * std::sin(2.0 * M_PI * mod_hz * double(i) / fs + phi);

  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::fabs(v));
  AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.samples.resize(n);
  for (size_t i = 0; i < n; ++i) clip.samples[i] = float(0.9 * x[i] / peak);
  return clip;
}

void build_warp_bank_fixtures(const std::filesystem::path& out_dir, int n_irs, int n_noises,
                              uint64_t seed, int sample_rate) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "ir", ec);
  std::filesystem::create_directories(out_dir / "noise", ec);
  for (int i = 0; i < n_irs; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "ir_%03d.wav", i);
    write_wav(out_dir / "ir" / name, make_impulse_response(derive_seed(seed, uint64_t(i)), sample_rate));
  }
  for (int i = 0; i < n_noises; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "noise_%03d.wav", i);
    write_wav(out_dir / "noise" / name,
              make_environment_noise(derive_seed(seed, 0x8000u + uint64_t(i)), sample_rate));
  }
}

}  // namespace vqe
