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

#include "vqe/manifest.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace vqe {

using nlohmann::json;

std::string to_string(Label l) { return l == Label::dysphonic ? "dysphonic" : "healthy"; }
std::string to_string(Gender g) { return g == Gender::male ? "male" : "female"; }

Label label_from_string(const std::string& s) {
  if (s == "dysphonic") return Label::dysphonic;
  if (s == "healthy") return Label::healthy;
  throw std::invalid_argument("unknown label '" + s + "' (expected dysphonic|healthy)");
}

Gender gender_from_string(const std::string& s) {
  if (s == "female") return Gender::female;
  if (s == "male") return Gender::male;
  throw std::invalid_argument("unknown gender '" + s + "' (expected female|male)");
}

std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_manifest: cannot open " + path.string());

  std::vector<ManifestRecord> records;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error("load_manifest: " + where + ": malformed line: " + e.what());
    }
    ManifestRecord r;
    try {
      r.speaker_id = j.at("speaker_id").get<std::string>();
      r.session_id = j.at("session_id").get<std::string>();
      r.label = label_from_string(j.at("label").get<std::string>());
      r.gender = gender_from_string(j.at("gender").get<std::string>());
      r.corpus = j.at("corpus").get<std::string>();
      r.path = j.at("path").get<std::string>();
      r.sample_rate = j.at("sample_rate").get<int>();
      r.duration = j.at("duration").get<double>();
    } catch (const std::exception& e) {
      throw std::runtime_error("load_manifest: " + where + ": " + e.what());
    }
    if (r.sample_rate <= 0)
      throw std::runtime_error("load_manifest: " + where + ": sample_rate must be positive");
    if (!(r.duration > 0.0))
      throw std::runtime_error("load_manifest: " + where + ": duration must be positive");
    if (!seen.insert({r.speaker_id, r.session_id}).second)
      throw std::runtime_error("load_manifest: " + where + ": duplicate (speaker_id, session_id) = (" +
                               r.speaker_id + ", " + r.session_id + ")");
    records.push_back(std::move(r));
  }
  return records;
}

void save_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records,
                   const std::vector<std::string>& header_lines) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("save_manifest: cannot open " + path.string() + " for writing");
  for (const auto& h : header_lines) out << "# " << h << "\n";
  for (const auto& r : records) {
    json j;
    j["speaker_id"] = r.speaker_id;
    j["session_id"] = r.session_id;
    j["label"] = to_string(r.label);
    j["gender"] = to_string(r.gender);
    j["corpus"] = r.corpus;
    j["path"] = r.path;
    j["sample_rate"] = r.sample_rate;
    j["duration"] = r.duration;
    out << j.dump() << "\n";
  }
  if (!out) throw std::runtime_error("save_manifest: write failed for " + path.string());
}

std::filesystem::path resolve_audio_path(const std::filesystem::path& manifest_path,
                                         const ManifestRecord& record) {
  std::filesystem::path p(record.path);
  if (p.is_absolute()) return p;
  return manifest_path.parent_path() / p;
}

}  // namespace vqe
