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

#include "docforge/synth.hpp"

#include <set>

#include "docforge/errors.hpp"
#include "docforge/rng.hpp"

namespace docforge {
namespace {

constexpr std::string_view kOnsets[] = {"b", "d", "g", "k", "l", "m", "n",
                                        "p", "r", "s", "t", "v", "z", "sh"};
constexpr std::string_view kVowels[] = {"a", "e", "i", "o", "u"};

std::string random_word(Rng& rng) {
  std::string w;
  const std::size_t syllables = 2 + rng.uniform(2);
  for (std::size_t i = 0; i < syllables; ++i) {
    w += kOnsets[rng.uniform(std::size(kOnsets))];
    w += kVowels[rng.uniform(std::size(kVowels))];
  }
  return w;
}

}  // namespace

SyntheticLanguage make_language(const std::string& lang, std::size_t num_words,
                                std::size_t num_successors, std::uint64_t seed) {
  if (num_words < 2 || num_successors < 1) {
    throw ConfigError("synthetic language needs >= 2 words and >= 1 successor");
  }
  num_successors = std::min(num_successors, num_words);
  Rng rng(derive_seed(seed, hash_string(lang)));
  SyntheticLanguage language;
  language.lang = lang;
  std::set<std::string> seen;
  while (language.words.size() < num_words) {
    auto w = random_word(rng);
    if (seen.insert(w).second) language.words.push_back(std::move(w));
  }
  language.successors.resize(num_words);
  for (std::size_t i = 0; i < num_words; ++i) {
    std::set<std::size_t> picked;
    while (picked.size() < num_successors) picked.insert(rng.uniform(num_words));
    std::size_t rank = 1;
    for (std::size_t j : picked) {
      // Zipf-like weights in a random rank order.
      language.successors[i].emplace_back(j, 1.0 / static_cast<double>(rank++));
    }
    auto& succ = language.successors[i];
    for (std::size_t k = succ.size(); k > 1; --k) {
      std::swap(succ[k - 1].second, succ[rng.uniform(k)].second);
    }
  }
  return language;
}

std::vector<Document> generate_documents(const SyntheticLanguage& language,
                                         const SynthDocConfig& cfg,
                                         std::size_t count,
                                         const std::string& id_prefix,
                                         std::uint64_t seed) {
  if (cfg.min_sentences < 1 || cfg.max_sentences < cfg.min_sentences ||
      cfg.min_words < 1 || cfg.max_words < cfg.min_words) {
    throw ConfigError("bad synthetic document length bounds");
  }
  Rng rng(derive_seed(seed, hash_string(language.lang), hash_string(id_prefix)));
  std::vector<Document> docs;
  docs.reserve(count);
  std::vector<double> weights;
  for (std::size_t d = 0; d < count; ++d) {
    Document doc;
    doc.doc_id = id_prefix + std::to_string(d);
    doc.lang = language.lang;
    const std::size_t n_sent =
        cfg.min_sentences + rng.uniform(cfg.max_sentences - cfg.min_sentences + 1);
    std::size_t word = rng.uniform(language.words.size());
    for (std::size_t s = 0; s < n_sent; ++s) {
      const std::size_t n_words =
          cfg.min_words + rng.uniform(cfg.max_words - cfg.min_words + 1);
      std::string sentence;
      for (std::size_t w = 0; w < n_words; ++w) {
        sentence += language.words[word];
        sentence += ' ';
        const auto& succ = language.successors[word];
        weights.clear();
        for (const auto& [next, weight] : succ) weights.push_back(weight);
        word = succ[rng.categorical(weights)].first;
      }
      sentence += '.';
      doc.sentences.push_back(std::move(sentence));
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

CipherKey make_cipher_key(const SyntheticLanguage& language,
                          const std::string& target_lang, std::uint64_t seed) {
  Rng rng(derive_seed(seed, hash_string(target_lang)));
  CipherKey key;
  key.source_lang = language.lang;
  key.target_lang = target_lang;
  std::set<std::string> used(language.words.begin(), language.words.end());
  for (const auto& w : language.words) {
    std::string t;
    do {
      t = random_word(rng);
      t[0] = static_cast<char>(t[0] - 'a' + 'A');
    } while (!used.insert(t).second);
    key.table.emplace(w, std::move(t));
  }
  key.table.emplace(".", ".");
  key.validate();
  return key;
}

}  // namespace docforge
