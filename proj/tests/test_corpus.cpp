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

#include <filesystem>
#include <fstream>
#include <set>

#include "support/oracles.hpp"
#include "vqe/manifest.hpp"
#include "vqe/split.hpp"
#include "vqe/synth.hpp"

using namespace vqe;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "vqe_corpus_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

ManifestRecord make_record(const std::string& spk, const std::string& sess, Label label,
                           Gender gender) {
  ManifestRecord r;
  r.speaker_id = spk;
  r.session_id = sess;
  r.label = label;
  r.gender = gender;
  r.corpus = "test";
  r.path = "audio/" + spk + "_" + sess + ".wav";
  r.sample_rate = 25000;
  r.duration = 1.0;
  return r;
}

std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("manifest: empty file gives an empty list") {
  const auto dir = fresh_dir("manifest_empty");
  const auto path = dir / "m.jsonl";
  std::ofstream(path).close();
  CHECK(load_manifest(path).empty());
}

TEST_CASE("manifest: missing label names the line") {
  const auto dir = fresh_dir("manifest_missing");
  const auto path = dir / "m.jsonl";
  {
    std::ofstream os(path);
    os << R"({"speaker_id":"a","session_id":"1","label":"healthy","gender":"male",)"
       << R"("corpus":"t","path":"a.wav","sample_rate":25000,"duration":1.0})" << "\n";
    os << R"({"speaker_id":"b","session_id":"1","gender":"male",)"
       << R"("corpus":"t","path":"b.wav","sample_rate":25000,"duration":1.0})" << "\n";
  }
  try {
    load_manifest(path);
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}

TEST_CASE("manifest: three-line fixture reads back exactly") {
  const auto dir = fresh_dir("manifest_fixture");
  const auto path = dir / "m.jsonl";
  std::vector<ManifestRecord> records = {
      make_record("s01", "a", Label::dysphonic, Gender::female),
      make_record("s02", "a", Label::healthy, Gender::male),
      make_record("s02", "b", Label::healthy, Gender::male),
  };
  records[2].duration = 2.5;
  save_manifest(path, records, {"fixture header line"});
  const auto back = load_manifest(path);
  REQUIRE(back.size() == 3);
  CHECK(back[0].speaker_id == "s01");
  CHECK(back[0].label == Label::dysphonic);
  CHECK(back[0].gender == Gender::female);
  CHECK(back[1].speaker_id == "s02");
  CHECK(back[2].session_id == "b");
  CHECK(back[2].duration == doctest::Approx(2.5));
  CHECK(back[2].path == "audio/s02_b.wav");
}

TEST_CASE("manifest: duplicate speaker/session pair is rejected") {
  const auto dir = fresh_dir("manifest_dup");
  const auto path = dir / "m.jsonl";
  std::vector<ManifestRecord> records = {
      make_record("s01", "a", Label::healthy, Gender::male),
  };
  save_manifest(path, records);
  {
    std::ofstream os(path, std::ios::app);
    os << R"({"speaker_id":"s01","session_id":"a","label":"healthy","gender":"male",)"
       << R"("corpus":"t","path":"x.wav","sample_rate":25000,"duration":1.0})" << "\n";
  }
  CHECK_THROWS(load_manifest(path));
}

TEST_CASE("split: 10 speakers at 0.7 gives 7/3") {
  std::vector<ManifestRecord> records;
  for (int i = 0; i < 10; ++i)
    records.push_back(make_record("spk" + std::to_string(i), "a",
                                  i % 2 ? Label::healthy : Label::dysphonic,
                                  i % 2 ? Gender::male : Gender::female));
  auto [train, val] = split_speaker_disjoint(records, {0.7, 42});
  std::set<std::string> train_spk, val_spk;
  for (const auto& r : train) train_spk.insert(r.speaker_id);
  for (const auto& r : val) val_spk.insert(r.speaker_id);
  CHECK(train_spk.size() == 7);
  CHECK(val_spk.size() == 3);
}

TEST_CASE("split: both sessions of a speaker stay on one side") {
  std::vector<ManifestRecord> records;
  for (int i = 0; i < 6; ++i)
    records.push_back(make_record("spk" + std::to_string(i), "a", Label::healthy, Gender::male));
  records.push_back(make_record("spk3", "b", Label::healthy, Gender::male));
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto [train, val] = split_speaker_disjoint(records, {0.7, seed});
    int in_train = 0, in_val = 0;
    for (const auto& r : train)
      if (r.speaker_id == "spk3") ++in_train;
    for (const auto& r : val)
      if (r.speaker_id == "spk3") ++in_val;
    CHECK((in_train == 2 || in_val == 2));
    CHECK(in_train * in_val == 0);
  }
}

TEST_CASE("split: same seed twice gives an identical split, disjoint always") {
  std::vector<ManifestRecord> records;
  for (int i = 0; i < 23; ++i)
    records.push_back(make_record("spk" + std::to_string(i), "a",
                                  i % 3 ? Label::healthy : Label::dysphonic,
                                  i % 2 ? Gender::male : Gender::female));
  for (uint64_t seed : {1ull, 9ull, 77ull}) {
    auto [t1, v1] = split_speaker_disjoint(records, {0.7, seed});
    auto [t2, v2] = split_speaker_disjoint(records, {0.7, seed});
    REQUIRE(t1.size() == t2.size());
    for (size_t i = 0; i < t1.size(); ++i) CHECK(t1[i].speaker_id == t2[i].speaker_id);
    std::set<std::string> ts, vs;
    for (const auto& r : t1) ts.insert(r.speaker_id);
    for (const auto& r : v1) vs.insert(r.speaker_id);
    for (const auto& s : vs) CHECK(ts.count(s) == 0);
  }
}

TEST_CASE("split: fewer than 2 speakers is an error") {
  std::vector<ManifestRecord> records = {make_record("only", "a", Label::healthy, Gender::male),
                                         make_record("only", "b", Label::healthy, Gender::male)};
  CHECK_THROWS(split_speaker_disjoint(records, {0.7, 0}));
  CHECK_THROWS(split_speaker_disjoint({}, {0.7, 0}));
}

TEST_CASE("synthesis: unperturbed phonation is periodic at 1/f0") {
  PhonationParams p;
  p.f0 = 200.0;
  p.jitter = 0.0;
  p.shimmer = 0.0;
  p.hnr_db = 1e9;
  p.duration = 1.0;
  p.seed = 5;
  const auto clip = synthesize_phonation(p, 25000);
  CHECK(oracles::measured_period_seconds(clip) == doctest::Approx(1.0 / 200.0).epsilon(0.002));
}

TEST_CASE("synthesis: jitter 2% measured by the cycle-length oracle") {
  PhonationParams p;
  p.f0 = 130.0;
  p.jitter = 0.02;
  p.shimmer = 0.0;
  p.hnr_db = 25.0;
  p.duration = 2.0;
  p.seed = 17;
  const auto clip = synthesize_phonation(p, 25000);
  const double j = oracles::measured_jitter(clip);
  CHECK(j > 0.015);
  CHECK(j < 0.025);
}

TEST_CASE("synthesis: 10 dB HNR measured by template separation") {
  PhonationParams p;
  p.f0 = 180.0;
  p.jitter = 0.005;
  p.shimmer = 0.02;
  p.hnr_db = 10.0;
  p.duration = 2.0;
  p.seed = 23;
  const auto clip = synthesize_phonation(p, 25000);
  CHECK(oracles::measured_hnr_db(clip) == doctest::Approx(10.0).epsilon(0.1));
}

TEST_CASE("synthesis: deterministic given identical params") {
  PhonationParams p;
  p.f0 = 150.0;
  p.jitter = 0.01;
  p.shimmer = 0.05;
  p.hnr_db = 15.0;
  p.duration = 0.7;
  p.seed = 99;
  const auto a = synthesize_phonation(p, 25000);
  const auto b = synthesize_phonation(p, 25000);
  REQUIRE(a.samples.size() == b.samples.size());
  for (size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);
}

TEST_CASE("synthesis: invalid params are rejected") {
  PhonationParams p;
  p.f0 = -1.0;
  CHECK_THROWS(synthesize_phonation(p, 25000));
  p.f0 = 100.0;
  p.jitter = -0.1;
  CHECK_THROWS(synthesize_phonation(p, 25000));
  p.jitter = 0.0;
  p.duration = 0.0;
  CHECK_THROWS(synthesize_phonation(p, 25000));
}

TEST_CASE("synthetic corpus: n=24 is balanced in labels and genders") {
  const auto dir = fresh_dir("corpus_balance");
  const auto records = build_synthetic_corpus(24, dir, 7);
  REQUIRE(records.size() == 24);
  int dys = 0, female = 0;
  for (const auto& r : records) {
    dys += r.label == Label::dysphonic;
    female += r.gender == Gender::female;
  }
  CHECK(dys == 12);
  CHECK(female == 12);
  // files exist and load
  for (const auto& r : records) {
    const auto clip = read_wav(resolve_audio_path(dir / "manifest.jsonl", r));
    CHECK(clip.sample_rate == 25000);
  }
}

TEST_CASE("synthetic corpus: same seed twice is byte-identical") {
  const auto dir_a = fresh_dir("corpus_det_a");
  const auto dir_b = fresh_dir("corpus_det_b");
  build_synthetic_corpus(8, dir_a, 1234);
  build_synthetic_corpus(8, dir_b, 1234);
  CHECK(file_bytes(dir_a / "manifest.jsonl") == file_bytes(dir_b / "manifest.jsonl"));
  for (int i = 0; i < 8; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "audio/s%04d_a.wav", i);
    CHECK(file_bytes(dir_a / name) == file_bytes(dir_b / name));
  }
}

TEST_CASE("synthetic corpus: measured HNR stays inside its class range") {
  const auto dir = fresh_dir("corpus_hnr");
  const SyntheticClassRanges ranges;
  const auto records = build_synthetic_corpus(12, dir, 3);
  // +-1 dB measurement tolerance, matching the synthesis contract.
  for (const auto& r : records) {
    const auto clip = read_wav(resolve_audio_path(dir / "manifest.jsonl", r));
    const double hnr = oracles::measured_hnr_db(clip);
    if (r.label == Label::healthy) {
      CHECK(hnr >= ranges.healthy_hnr_db[0] - 1.0);
      CHECK(hnr <= ranges.healthy_hnr_db[1] + 1.0);
    } else {
      CHECK(hnr >= ranges.dysphonic_hnr_db[0] - 1.0);
      CHECK(hnr <= ranges.dysphonic_hnr_db[1] + 1.0);
    }
  }
}

TEST_CASE("synthetic corpus: fewer than 4 speakers is rejected") {
  const auto dir = fresh_dir("corpus_small");
  CHECK_THROWS(build_synthetic_corpus(3, dir, 0));
}
