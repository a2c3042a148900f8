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

#include "docforge/config.hpp"

#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "docforge/errors.hpp"

namespace docforge {
namespace {

bool key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
         c == '-';
}

class Parser {
 public:
  Parser(std::string_view text, std::size_t line) : s_(text), line_(line) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) {
      ++pos_;
    }
  }
  bool at_end() {
    skip_ws();
    return pos_ == s_.size() || s_[pos_] == '#';
  }
  std::string key() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && key_char(s_[pos_])) ++pos_;
    if (pos_ == start) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }
  void expect(char c) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  ConfigValue value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    ConfigValue v;
    if (s_[pos_] == '{') {
      ++pos_;
      v.is_table = true;
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == '}') {
        ++pos_;
        return v;
      }
      while (true) {
        std::string k = key();
        expect('=');
        v.table.emplace_back(std::move(k), value());
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ',') {
          ++pos_;
          continue;
        }
        expect('}');
        break;
      }
      return v;
    }
    if (s_[pos_] == '"') {
      ++pos_;
      while (pos_ < s_.size() && s_[pos_] != '"') {
        if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
        v.text += s_[pos_++];
      }
      if (pos_ >= s_.size()) fail("unterminated string");
      ++pos_;
      return v;
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != '}' &&
           s_[pos_] != '{' && s_[pos_] != '#' && s_[pos_] != ' ' &&
           s_[pos_] != '\t' && s_[pos_] != '\r') {
      ++pos_;
    }
    if (pos_ == start) fail("empty value");
    v.text = std::string(s_.substr(start, pos_ - start));
    return v;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(line_, what + " at column " + std::to_string(pos_ + 1));
  }

 private:
  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

}  // namespace

const ConfigValue* ConfigValue::find(const std::string& key) const {
  for (const auto& [k, v] : table) {
    if (k == key) return &v;
  }
  return nullptr;
}

Config Config::parse(std::istream& in, const std::string& source) {
  Config cfg;
  std::string line;
  std::size_t line_no = 0;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      Parser p(line, line_no);
      if (p.at_end()) continue;
      std::string k = p.key();
      p.expect('=');
      ConfigValue v = p.value();
      if (!p.at_end()) p.fail("trailing characters");
      cfg.entries_.emplace_back(std::move(k), std::move(v));
    }
  } catch (const ParseError& e) {
    throw ParseError(e.line(), source + ": " + e.detail());
  }
  return cfg;
}

Config Config::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

Config Config::load(const std::string& path) {
  return load_nested(path, 0);
}

Config Config::load_nested(const std::string& path, int depth) {
  if (depth > 8) throw ConfigError("include nesting too deep at " + path);
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  Config parsed = parse(in, path);
  Config cfg;
  for (auto& [k, v] : parsed.entries_) {
    if (k != "include") {
      cfg.entries_.emplace_back(std::move(k), std::move(v));
      continue;
    }
    std::filesystem::path inc(v.text);
    if (inc.is_relative()) inc = std::filesystem::path(path).parent_path() / inc;
    Config sub = load_nested(inc.string(), depth + 1);
    for (auto& e : sub.entries_) cfg.entries_.push_back(std::move(e));
  }
  return cfg;
}

void Config::set(const std::string& key, const std::string& value) {
  Parser p(value, 0);
  ConfigValue v = p.value();
  if (!p.at_end()) p.fail("trailing characters in override of " + key);
  std::erase_if(entries_, [&](const auto& e) { return e.first == key; });
  entries_.emplace_back(key, std::move(v));
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not key=value");
  }
  std::string key = assignment.substr(0, eq);
  while (!key.empty() && key.back() == ' ') key.pop_back();
  set(key, assignment.substr(eq + 1));
}

bool Config::has(const std::string& key) const { return last(key) != nullptr; }

const ConfigValue* Config::last(const std::string& key) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->first == key) return &it->second;
  }
  return nullptr;
}

std::vector<const ConfigValue*> Config::all(const std::string& key) const {
  std::vector<const ConfigValue*> out;
  for (const auto& [k, v] : entries_) {
    if (k == key) out.push_back(&v);
  }
  return out;
}

std::string Config::get_string(const std::string& key) const {
  const auto* v = last(key);
  if (!v) throw ConfigError("missing required key '" + key + "'");
  if (v->is_table) throw ConfigError("key '" + key + "' must be a scalar");
  return v->text;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double to_double(const ConfigValue& v, const std::string& what) {
  if (v.is_table) throw ConfigError(what + " must be a number");
  double out = 0.0;
  const char* first = v.text.data();
  const char* end = first + v.text.size();
  auto [ptr, ec] = std::from_chars(first, end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(what + ": '" + v.text + "' is not a number");
  }
  return out;
}

std::int64_t to_int(const ConfigValue& v, const std::string& what) {
  if (v.is_table) throw ConfigError(what + " must be an integer");
  std::int64_t out = 0;
  const char* first = v.text.data();
  const char* end = first + v.text.size();
  auto [ptr, ec] = std::from_chars(first, end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(what + ": '" + v.text + "' is not an integer");
  }
  return out;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto* v = last(key);
  return v ? to_double(*v, key) : fallback;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  const auto* v = last(key);
  return v ? to_int(*v, key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto* v = last(key);
  if (!v) return fallback;
  if (v->text == "true" || v->text == "1") return true;
  if (v->text == "false" || v->text == "0") return false;
  throw ConfigError(key + ": '" + v->text + "' is not a boolean");
}

std::vector<std::pair<std::string, std::string>> Config::with_prefix(
    const std::string& prefix) const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, v] : entries_) {
    if (k.size() > prefix.size() && k.compare(0, prefix.size(), prefix) == 0 &&
        !v.is_table) {
      out.emplace_back(k.substr(prefix.size()), v.text);
    }
  }
  return out;
}

void Config::check_keys(const std::set<std::string>& known,
                        const std::vector<std::string>& known_prefixes) const {
  for (const auto& [k, v] : entries_) {
    if (known.count(k)) continue;
    bool ok = false;
    for (const auto& p : known_prefixes) {
      if (k.compare(0, p.size(), p) == 0) ok = true;
    }
    if (!ok) throw ConfigError("unknown config key '" + k + "'");
  }
}

}  // namespace docforge
