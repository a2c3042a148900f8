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

#ifndef DOCFORGE_TESTS_HELPERS_HPP_
#define DOCFORGE_TESTS_HELPERS_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "docforge/corruption.hpp"
#include "docforge/model.hpp"
#include "docforge/pipeline.hpp"
#include "docforge/rng.hpp"
#include "docforge/synth.hpp"
#include "docforge/tokenizer.hpp"

namespace docforge::testing {

inline ModelConfig tiny_config(int vocab = 20) {
  ModelConfig c;
  c.d_model = 16;
  c.n_heads = 2;
  c.n_enc_layers = 1;
  c.n_dec_layers = 1;
  c.d_ff = 32;
  c.vocab_size = vocab;
  c.max_positions = 64;
  c.dropout_rate = 0.0;
  c.seed = 7;
  return c;
}

// Content ids drawn from [lo, hi), EOS appended.
inline std::vector<TokenId> random_ids(Rng& rng, std::size_t n, TokenId lo,
                                       TokenId hi) {
  std::vector<TokenId> ids;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(lo + static_cast<TokenId>(rng.uniform(static_cast<std::uint64_t>(hi - lo))));
  }
  ids.push_back(kEosId);
  return ids;
}

inline TrainingExample random_example(Rng& rng, std::size_t in_len,
                                      std::size_t tgt_len, TokenId lo,
                                      TokenId hi) {
  TrainingExample ex;
  ex.input_ids = random_ids(rng, in_len, lo, hi);
  ex.target_ids = random_ids(rng, tgt_len, lo, hi);
  return ex;
}

inline Batch single(const TrainingExample& ex) {
  return make_batch({ex}, 1024, 1024);
}

// A small cipher world: monolingual "xx" documents paired with their "yy"
// cipher translations, plus a vocabulary over both sides.
struct World {
  SyntheticLanguage language;
  CipherKey key;
  std::vector<Document> docs;
  ParallelCorpus corpus;
  Vocabulary vocab;
};

inline World make_world(std::size_t num_docs, std::size_t num_words = 30,
                        int num_sentinels = 10, SynthDocConfig doc_cfg = {},
                        std::uint64_t seed = 1) {
  World w;
  w.language = make_language("xx", num_words, 4, seed);
  w.key = make_cipher_key(w.language, "yy", seed + 1);
  w.docs = generate_documents(w.language, doc_cfg, num_docs, "d", seed + 2);
  const CipherKey key = w.key;
  w.corpus = build_parallel_corpus(
      w.docs, [key](const Document& d) { return cipher_translate(d, key); },
      num_docs, seed + 3);
  std::vector<std::string> texts;
  for (const auto* p : w.corpus.all()) {
    texts.push_back(p->src.text());
    texts.push_back(p->tgt.text());
  }
  w.vocab = Vocabulary::build(texts, 1, 100000, num_sentinels,
                              {"Translate", "Summarize", "xx", "to", "yy", ":"});
  return w;
}

// Fresh directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("docforge_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace docforge::testing

#endif  // DOCFORGE_TESTS_HELPERS_HPP_
