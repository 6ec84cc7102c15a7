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

#include "vqe/kv_config.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace vqe {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

void KvConfig::register_key(const std::string& key, const std::string& default_value,
                            const std::string& help) {
  entries_[key] = Entry{default_value, help};
}

void KvConfig::check_known(const std::string& key) const {
  if (!entries_.count(key)) {
    std::string msg = "unknown config key '" + key + "'; known keys:";
    for (const auto& [k, _] : entries_) msg += " " + k;
    throw std::invalid_argument(msg);
  }
}

void KvConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path.string());
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: " + path.string() + ":" + std::to_string(line_no) +
                               ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    check_known(key);
    entries_[key].value = value;
  }
}

void KvConfig::apply_overrides(const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got '" + o + "'");
    const std::string key = trim(o.substr(0, eq));
    const std::string value = trim(o.substr(eq + 1));
    check_known(key);
    entries_[key].value = value;
  }
}

bool KvConfig::has(const std::string& key) const {
  const auto it = entries_.find(key);
  return it != entries_.end() && !it->second.value.empty();
}

std::string KvConfig::get(const std::string& key) const {
  check_known(key);
  return entries_.at(key).value;
}

int64_t KvConfig::get_int(const std::string& key) const {
  const std::string v = get(key);
  try {
    size_t pos = 0;
    const int64_t r = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return r;
  } catch (...) {
    throw std::invalid_argument("config key '" + key + "': '" + v + "' is not an integer");
  }
}

uint64_t KvConfig::get_uint(const std::string& key) const {
  const int64_t v = get_int(key);
  if (v < 0) throw std::invalid_argument("config key '" + key + "' must be non-negative");
  return uint64_t(v);
}

double KvConfig::get_double(const std::string& key) const {
  const std::string v = get(key);
  try {
    size_t pos = 0;
    const double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return r;
  } catch (...) {
    throw std::invalid_argument("config key '" + key + "': '" + v + "' is not a number");
  }
}

bool KvConfig::get_bool(const std::string& key) const {
  std::string v = get(key);
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config key '" + key + "': '" + v + "' is not a boolean");
}

void KvConfig::set(const std::string& key, const std::string& value) {
  check_known(key);
  entries_[key].value = value;
}

std::string KvConfig::describe() const {
  std::string out;
  for (const auto& [k, e] : entries_) {
    out += k + " = " + e.value;
    if (!e.help.empty()) out += "   # " + e.help;
    out += "\n";
  }
  return out;
}

}  // namespace vqe
