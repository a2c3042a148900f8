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

#ifndef DOCFORGE_CORPUS_HPP_
#define DOCFORGE_CORPUS_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace docforge {

struct Document {
  std::string doc_id;
  std::string lang;
  std::vector<std::string> sentences;

  // Sentences joined by single spaces.
  std::string text() const;

  bool operator==(const Document&) const = default;
};

struct ParallelDocPair {
  Document src;
  Document tgt;
  std::string pair_id;

  bool operator==(const ParallelDocPair&) const = default;
};

using LangPair = std::pair<std::string, std::string>;

// Throws ValidationError when an invariant does not hold.
void validate(const Document& doc);
void validate(const ParallelDocPair& pair);

class ParallelCorpus {
 public:
  using PairMap = std::map<LangPair, std::vector<ParallelDocPair>>;

  // Validates the pair and its doc_ids against everything already added.
  void add(ParallelDocPair pair);

  const PairMap& pairs_by_langpair() const { return pairs_; }
  const std::vector<ParallelDocPair>& pairs(const LangPair& key) const;

  // All pairs, ordered by language pair then insertion order.
  std::vector<const ParallelDocPair*> all() const;
  std::size_t size() const;
  bool empty() const { return size() == 0; }

  bool operator==(const ParallelCorpus& other) const {
    return pairs_ == other.pairs_;
  }

 private:
  PairMap pairs_;
  std::map<std::string, int> ids_;
};

// Splits after ".", "!", "?", "。", "！", "？" when followed by whitespace or
// end of text. Whitespace inside a sentence collapses to single spaces.
std::vector<std::string> segment_sentences(std::string_view text);

// Splits on ASCII whitespace.
std::vector<std::string> split_words(std::string_view text);
std::string join_words(const std::vector<std::string>& words,
                       std::string_view sep = " ");

// Word-substitution translator. Words missing from the table are reversed
// (by code point) and tagged "@<target_lang>"; a word already carrying the
// "@<source_lang>" tag is untagged and reversed, so the inverse key undoes
// the fallback. Trailing punctuation is split off and kept, so "cd." becomes
// table["cd"] + ".". Table entries may not contain '@'.
struct CipherKey {
  std::string source_lang;
  std::string target_lang;
  std::map<std::string, std::string> table;

  void validate() const;
  CipherKey inverse() const;
  std::string translate_word(std::string_view word) const;
  std::string translate_sentence(std::string_view sentence) const;
};

Document cipher_translate(const Document& doc, const CipherKey& key);

using Translator = std::function<Document(const Document&)>;

// Samples at most sample_n documents per source language without
// replacement and translates each one sentence by sentence.
ParallelCorpus build_parallel_corpus(const std::vector<Document>& mono_docs,
                                     const Translator& translator,
                                     std::size_t sample_n, std::uint64_t seed);

// Line-delimited JSON records. Document lines carry doc_id/lang/sentences;
// pair lines add pair_id and src/tgt sub-records. read_documents takes the
// source side of pair lines, so a test set can be fed to translate as is.
std::vector<Document> read_documents(std::istream& in);
std::vector<Document> read_documents(const std::string& path);
void write_documents(std::ostream& out, const std::vector<Document>& docs);
void write_documents(const std::string& path, const std::vector<Document>& docs);

ParallelCorpus read_corpus(std::istream& in);
ParallelCorpus read_corpus(const std::string& path);
void write_corpus(std::ostream& out, const ParallelCorpus& corpus);
void write_corpus(const std::string& path, const ParallelCorpus& corpus);

void write_cipher_key(const std::string& path, const CipherKey& key);
CipherKey read_cipher_key(const std::string& path);

}  // namespace docforge

#endif  // DOCFORGE_CORPUS_HPP_
