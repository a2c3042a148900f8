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

#ifndef DOCFORGE_TOKENIZER_HPP_
#define DOCFORGE_TOKENIZER_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace docforge {

using TokenId = std::int32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kEosId = 1;
inline constexpr TokenId kUnkId = 2;
// Boundary between the two halves of a translation-LM sequence.
inline constexpr TokenId kSepId = 3;
inline constexpr TokenId kFirstSentinelId = 4;
inline constexpr int kDefaultSentinels = 100;

// Word-level vocabulary. Layout: specials (PAD, EOS, UNK, SEP), then the
// contiguous sentinel block MASK_0..MASK_{K-1}, then content tokens by
// descending frequency.
class Vocabulary {
 public:
  explicit Vocabulary(int num_sentinels = kDefaultSentinels);

  // Content tokens with frequency >= min_freq, most frequent first, ties in
  // lexicographic order, truncated so size() <= max_size. `reserved` tokens
  // (task prefixes and the like) are always admitted ahead of corpus words.
  static Vocabulary build(const std::vector<std::string>& texts,
                          std::size_t min_freq, std::size_t max_size,
                          int num_sentinels = kDefaultSentinels,
                          const std::vector<std::string>& reserved = {});

  std::size_t size() const { return id_to_token_.size(); }
  int num_sentinels() const { return num_sentinels_; }
  TokenId first_content_id() const { return kFirstSentinelId + num_sentinels_; }

  TokenId sentinel(int k) const;
  bool is_sentinel(TokenId id) const {
    return id >= kFirstSentinelId && id < first_content_id();
  }
  int sentinel_index(TokenId id) const { return id - kFirstSentinelId; }

  // UNK when absent.
  TokenId id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const;

  // Whitespace split, OOV -> UNK, no EOS.
  std::vector<TokenId> encode_words(std::string_view text) const;
  // encode_words + trailing EOS.
  std::vector<TokenId> encode(std::string_view text) const;
  // Drops PAD/EOS, renders sentinels as MASK_k. Throws on unknown ids.
  std::string decode(std::span<const TokenId> ids) const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  bool operator==(const Vocabulary& other) const {
    return num_sentinels_ == other.num_sentinels_ &&
           id_to_token_ == other.id_to_token_;
  }

 private:
  void add_token(std::string token);

  int num_sentinels_;
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, TokenId> token_to_id_;
};

}  // namespace docforge

#endif  // DOCFORGE_TOKENIZER_HPP_
