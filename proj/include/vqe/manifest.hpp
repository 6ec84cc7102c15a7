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

#ifndef VQE_MANIFEST_HPP
#define VQE_MANIFEST_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace vqe {

enum class Label { healthy = 0, dysphonic = 1 };
enum class Gender { female = 0, male = 1 };

std::string to_string(Label l);
std::string to_string(Gender g);
Label label_from_string(const std::string& s);
Gender gender_from_string(const std::string& s);

// One recording. `path` is stored as written in the manifest, usually
// relative to the manifest file; resolve with resolve_audio_path.
struct ManifestRecord {
  std::string speaker_id;
  std::string session_id;
  Label label = Label::healthy;
  Gender gender = Gender::female;
  std::string corpus;
  std::string path;
  int sample_rate = 0;
  double duration = 0.0;
};

// Manifests are UTF-8 line-delimited JSON objects, one record per line.
// Lines starting with '#' are header/comment lines and are skipped.
std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path);

void save_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records,
                   const std::vector<std::string>& header_lines = {});

std::filesystem::path resolve_audio_path(const std::filesystem::path& manifest_path,
                                         const ManifestRecord& record);

}  // namespace vqe

#endif  // VQE_MANIFEST_HPP
