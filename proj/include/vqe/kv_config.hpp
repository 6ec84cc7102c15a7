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

#ifndef VQE_KV_CONFIG_HPP
#define VQE_KV_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace vqe {

// Plain-text `key = value` configuration with '#' comments. Keys are dotted
// (train.steps, model.blocks, ...). Every key must be registered; unknown
// keys are errors so typos cannot silently change a run.
class KvConfig {
 public:
  void register_key(const std::string& key, const std::string& default_value,
                    const std::string& help);

  void load_file(const std::filesystem::path& path);
  // "key=value" strings from --set; applied after the file.
  void apply_overrides(const std::vector<std::string>& overrides);

  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;
  int64_t get_int(const std::string& key) const;
  uint64_t get_uint(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  std::string describe() const;  // registered keys with defaults and help

 private:
  struct Entry {
    std::string value;
    std::string help;
  };
  void check_known(const std::string& key) const;
  std::map<std::string, Entry> entries_;
};

}  // namespace vqe

#endif  // VQE_KV_CONFIG_HPP
