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

#ifndef DOCFORGE_SYNTH_HPP_
#define DOCFORGE_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "docforge/corpus.hpp"

namespace docforge {

// A toy language: a fixed word list and a sparse first-order Markov chain
// over it. Documents are single walks through the chain, so consecutive
// sentences are statistically linked and sentence order carries signal.
struct SyntheticLanguage {
  std::string lang;
  std::vector<std::string> words;
  // successors[i] = (word index, weight) pairs.
  std::vector<std::vector<std::pair<std::size_t, double>>> successors;
};

struct SynthDocConfig {
  std::size_t min_sentences = 4;
  std::size_t max_sentences = 8;
  std::size_t min_words = 4;
  std::size_t max_words = 7;
};

SyntheticLanguage make_language(const std::string& lang, std::size_t num_words,
                                std::size_t num_successors, std::uint64_t seed);

// Sentences end with a standalone "." token.
std::vector<Document> generate_documents(const SyntheticLanguage& language,
                                         const SynthDocConfig& cfg,
                                         std::size_t count,
                                         const std::string& id_prefix,
                                         std::uint64_t seed);

// Bijective word cipher from `language` into freshly generated target words
// (capitalized, disjoint from the source list). "." maps to itself.
CipherKey make_cipher_key(const SyntheticLanguage& language,
                          const std::string& target_lang, std::uint64_t seed);

}  // namespace docforge

#endif  // DOCFORGE_SYNTH_HPP_
