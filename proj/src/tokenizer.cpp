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

#include "docforge/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "docforge/corpus.hpp"
#include "docforge/errors.hpp"

namespace docforge {

Vocabulary::Vocabulary(int num_sentinels) : num_sentinels_(num_sentinels) {
  if (num_sentinels < 0) throw ConfigError("negative sentinel count");
  for (const char* s : {"<pad>", "</s>", "<unk>", "<sep>"}) add_token(s);
  for (int k = 0; k < num_sentinels; ++k) {
    add_token("MASK_" + std::to_string(k));
  }
}

void Vocabulary::add_token(std::string token) {
  const auto id = static_cast<TokenId>(id_to_token_.size());
  token_to_id_.emplace(token, id);
  id_to_token_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(const std::vector<std::string>& texts,
                             std::size_t min_freq, std::size_t max_size,
                             int num_sentinels,
                             const std::vector<std::string>& reserved) {
  Vocabulary vocab(num_sentinels);
  if (max_size <= vocab.size()) {
    throw ConfigError("max_size " + std::to_string(max_size) +
                      " leaves no room past " + std::to_string(vocab.size()) +
                      " specials and sentinels");
  }
  for (const auto& r : reserved) {
    if (vocab.size() >= max_size) break;
    if (!vocab.contains(r)) vocab.add_token(r);
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& t : texts) {
    for (auto& w : split_words(t)) ++counts[std::move(w)];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [w, c] : counts) {
    if (c >= min_freq && !vocab.contains(w)) ranked.emplace_back(w, c);
  }
  // `counts` is ordered, so a stable sort on frequency keeps lexicographic ties.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (auto& [w, c] : ranked) {
    if (vocab.size() >= max_size) break;
    vocab.add_token(std::move(w));
  }
  return vocab;
}

TokenId Vocabulary::sentinel(int k) const {
  if (k < 0 || k >= num_sentinels_) {
    throw ContractError("sentinel index " + std::to_string(k) +
                        " out of range (have " + std::to_string(num_sentinels_) +
                        ")");
  }
  return kFirstSentinelId + k;
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return token_to_id_.count(std::string(token)) > 0;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw ContractError("unknown token id " + std::to_string(id));
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocabulary::encode_words(std::string_view text) const {
  std::vector<TokenId> ids;
  for (const auto& w : split_words(text)) ids.push_back(id(w));
  return ids;
}

std::vector<TokenId> Vocabulary::encode(std::string_view text) const {
  auto ids = encode_words(text);
  ids.push_back(kEosId);
  return ids;
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId t : ids) {
    const std::string& tok = token(t);
    if (t == kPadId || t == kEosId) continue;
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "#specials\t" << kFirstSentinelId << "\tsentinels\t" << num_sentinels_
      << '\n';
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
    out << id_to_token_[i] << '\t' << i << '\n';
  }
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, path + ": missing header");
  std::istringstream header(line);
  std::string tag, sentinels_tag;
  int specials = 0, sentinels = 0;
  std::string a, b;
  std::getline(header, tag, '\t');
  std::getline(header, a, '\t');
  std::getline(header, sentinels_tag, '\t');
  std::getline(header, b, '\t');
  try {
    specials = std::stoi(a);
    sentinels = std::stoi(b);
  } catch (const std::exception&) {
    throw ParseError(1, "bad vocabulary header: " + line);
  }
  if (tag != "#specials" || sentinels_tag != "sentinels" ||
      specials != kFirstSentinelId) {
    throw ParseError(1, "bad vocabulary header: " + line);
  }
  Vocabulary vocab(sentinels);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ParseError(line_no, "expected token<TAB>id");
    }
    std::string tok = line.substr(0, tab);
    std::size_t expect = 0;
    try {
      expect = std::stoul(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw ParseError(line_no, "bad id in '" + line + "'");
    }
    if (expect < vocab.size()) {
      if (vocab.id_to_token_[expect] != tok) {
        throw ParseError(line_no, "reserved id " + std::to_string(expect) +
                                      " must be " + vocab.id_to_token_[expect]);
      }
      continue;
    }
    if (expect != vocab.size()) {
      throw ParseError(line_no, "ids must be contiguous; expected " +
                                    std::to_string(vocab.size()));
    }
    if (vocab.contains(tok)) throw ParseError(line_no, "duplicate token " + tok);
    vocab.add_token(std::move(tok));
  }
  return vocab;
}

}  // namespace docforge
