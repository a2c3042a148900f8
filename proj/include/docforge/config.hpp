/* Copyright 2026 The Docforge Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef DOCFORGE_CONFIG_HPP_
#define DOCFORGE_CONFIG_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace docforge {

// Value in a run config: either a scalar (kept as text) or an inline table.
struct ConfigValue {
  std::string text;
  std::vector<std::pair<std::string, ConfigValue>> table;
  bool is_table = false;

  const ConfigValue* find(const std::string& key) const;
};

// Line-oriented key-value format:
//
//   # comment
//   seed = 7
//   model.d_model = 64
//   paths.out_dir = "runs/drmt"
//   stage = {steps = 2000, mix = {Dr = 0.5, DrMT = 0.5}}
//
// Keys are [A-Za-z0-9_.-]+. Values are double-quoted strings, bare words, or
// brace tables of comma-separated key = value pairs (nestable). A key may
// repeat; every occurrence is kept in file order (used for `stage`).
// `include = "other.conf"` splices another file in place, resolved relative
// to the including file; later entries win for scalar lookups.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source = "<config>");
  static Config parse_string(const std::string& text);
  static Config load(const std::string& path);

  // Replaces every occurrence of key; value text uses the same grammar.
  void set(const std::string& key, const std::string& value);
  // "key=value" form used by --set.
  void apply_override(const std::string& assignment);

  bool has(const std::string& key) const;
  std::vector<const ConfigValue*> all(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Entries whose key starts with `prefix`, prefix stripped.
  std::vector<std::pair<std::string, std::string>> with_prefix(
      const std::string& prefix) const;

  // Throws ConfigError naming the first key not in `known` and not
  // starting with any of `known_prefixes`.
  void check_keys(const std::set<std::string>& known,
                  const std::vector<std::string>& known_prefixes = {}) const;

  const std::vector<std::pair<std::string, ConfigValue>>& entries() const {
    return entries_;
  }

 private:
  static Config load_nested(const std::string& path, int depth);
  const ConfigValue* last(const std::string& key) const;

  std::vector<std::pair<std::string, ConfigValue>> entries_;
};

double to_double(const ConfigValue& v, const std::string& what);
std::int64_t to_int(const ConfigValue& v, const std::string& what);

}  // namespace docforge

#endif  // DOCFORGE_CONFIG_HPP_
