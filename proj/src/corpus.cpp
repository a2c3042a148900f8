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

#include "docforge/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "docforge/errors.hpp"
#include "docforge/rng.hpp"
#include "json.hpp"

namespace docforge {
namespace {

using ordered_json = nlohmann::ordered_json;

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

bool ends_sentence(std::string_view word) {
  static constexpr std::string_view kTerminals[] = {".", "!", "?", "。",
                                                     "！", "？"};
  for (auto t : kTerminals) {
    if (ends_with(word, t)) return true;
  }
  return false;
}

std::vector<std::string> utf8_code_points(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto lead = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if ((lead & 0xE0) == 0xC0) {
      len = 2;
    } else if ((lead & 0xF0) == 0xE0) {
      len = 3;
    } else if ((lead & 0xF8) == 0xF0) {
      len = 4;
    }
    len = std::min(len, s.size() - i);
    out.emplace_back(s.substr(i, len));
    i += len;
  }
  return out;
}

std::string reverse_code_points(std::string_view s) {
  auto cps = utf8_code_points(s);
  std::string out;
  out.reserve(s.size());
  for (auto it = cps.rbegin(); it != cps.rend(); ++it) out += *it;
  return out;
}

ordered_json document_to_json(const Document& doc) {
  ordered_json j;
  j["doc_id"] = doc.doc_id;
  j["lang"] = doc.lang;
  j["sentences"] = doc.sentences;
  return j;
}

Document document_from_json(const nlohmann::json& j, std::size_t line) {
  if (!j.is_object()) throw ParseError(line, "record is not an object");
  for (const char* field : {"doc_id", "lang", "sentences"}) {
    if (!j.contains(field)) {
      throw ParseError(line, std::string("missing field \"") + field + "\"");
    }
  }
  Document doc;
  try {
    doc.doc_id = j.at("doc_id").get<std::string>();
    doc.lang = j.at("lang").get<std::string>();
    doc.sentences = j.at("sentences").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line, std::string("bad field type: ") + e.what());
  }
  try {
    validate(doc);
  } catch (const ValidationError& e) {
    throw ParseError(line, e.what());
  }
  return doc;
}

template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), is_space)) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    fn(j, line_no);
  }
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return out;
}

}  // namespace

std::string Document::text() const { return join_words(sentences); }

void validate(const Document& doc) {
  if (doc.doc_id.empty()) throw ValidationError("document has empty doc_id");
  if (doc.sentences.empty()) {
    throw ValidationError("document " + doc.doc_id + " has no sentences");
  }
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    const auto& s = doc.sentences[i];
    if (std::all_of(s.begin(), s.end(), is_space)) {
      throw ValidationError("document " + doc.doc_id + ": sentence " +
                            std::to_string(i) + " is blank");
    }
  }
}

void validate(const ParallelDocPair& pair) {
  validate(pair.src);
  validate(pair.tgt);
  if (pair.src.sentences.size() != pair.tgt.sentences.size()) {
    throw ValidationError("pair " + pair.pair_id +
                          ": sentence counts differ (" +
                          std::to_string(pair.src.sentences.size()) + " vs " +
                          std::to_string(pair.tgt.sentences.size()) + ")");
  }
  if (pair.src.lang == pair.tgt.lang) {
    throw ValidationError("pair " + pair.pair_id + ": src and tgt share lang " +
                          pair.src.lang);
  }
}

void ParallelCorpus::add(ParallelDocPair pair) {
  validate(pair);
  if (pair.pair_id.empty()) throw ValidationError("pair has empty pair_id");
  for (const auto* id : {&pair.pair_id, &pair.src.doc_id, &pair.tgt.doc_id}) {
    if (ids_.count(*id)) throw ValidationError("duplicate id " + *id);
  }
  if (pair.src.doc_id == pair.tgt.doc_id) {
    throw ValidationError("duplicate doc_id " + pair.src.doc_id);
  }
  ids_[pair.pair_id] = 0;
  ids_[pair.src.doc_id] = 1;
  ids_[pair.tgt.doc_id] = 1;
  LangPair key{pair.src.lang, pair.tgt.lang};
  pairs_[key].push_back(std::move(pair));
}

const std::vector<ParallelDocPair>& ParallelCorpus::pairs(
    const LangPair& key) const {
  static const std::vector<ParallelDocPair> kEmpty;
  auto it = pairs_.find(key);
  return it == pairs_.end() ? kEmpty : it->second;
}

std::vector<const ParallelDocPair*> ParallelCorpus::all() const {
  std::vector<const ParallelDocPair*> out;
  for (const auto& [key, list] : pairs_) {
    for (const auto& p : list) out.push_back(&p);
  }
  return out;
}

std::size_t ParallelCorpus::size() const {
  std::size_t n = 0;
  for (const auto& [key, list] : pairs_) n += list.size();
  return n;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) words.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

std::string join_words(const std::vector<std::string>& words,
                       std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += sep;
    out += words[i];
  }
  return out;
}

std::vector<std::string> segment_sentences(std::string_view text) {
  auto words = split_words(text);
  if (words.empty()) throw ValidationError("empty document: no text to segment");
  std::vector<std::string> sentences;
  std::vector<std::string> current;
  for (auto& w : words) {
    const bool last = ends_sentence(w);
    current.push_back(std::move(w));
    if (last) {
      sentences.push_back(join_words(current));
      current.clear();
    }
  }
  if (!current.empty()) sentences.push_back(join_words(current));
  return sentences;
}

void CipherKey::validate() const {
  if (source_lang == target_lang) {
    throw ValidationError("cipher key maps " + source_lang + " onto itself");
  }
  std::set<std::string> values;
  for (const auto& [from, to] : table) {
    if (from.empty() || to.empty()) {
      throw ValidationError("cipher key has an empty entry");
    }
    if (from.find('@') != std::string::npos ||
        to.find('@') != std::string::npos) {
      throw ValidationError("cipher key entry contains '@': " + from);
    }
    if (!values.insert(to).second) {
      throw ValidationError("cipher key is not invertible: " + to +
                            " has two preimages");
    }
  }
}

CipherKey CipherKey::inverse() const {
  CipherKey inv;
  inv.source_lang = target_lang;
  inv.target_lang = source_lang;
  for (const auto& [from, to] : table) {
    if (!inv.table.emplace(to, from).second) {
      throw ValidationError("cipher key is not invertible: " + to +
                            " has two preimages");
    }
  }
  return inv;
}

namespace {

// Length of the trailing punctuation run ("cd." -> 1).
std::size_t punct_suffix(std::string_view word) {
  static const std::string_view kMarks[] = {".", "!", "?", ",", ";", ":",
                                            "\xe3\x80\x82", "\xef\xbc\x81",
                                            "\xef\xbc\x9f"};
  std::size_t n = 0;
  for (bool more = true; more;) {
    more = false;
    for (auto m : kMarks) {
      if (word.size() - n > m.size() && ends_with(word.substr(0, word.size() - n), m)) {
        n += m.size();
        more = true;
        break;
      }
    }
  }
  return n;
}

}  // namespace

std::string CipherKey::translate_word(std::string_view word) const {
  if (auto it = table.find(std::string(word)); it != table.end()) {
    return it->second;
  }
  if (const std::size_t n = punct_suffix(word); n > 0) {
    return translate_word(word.substr(0, word.size() - n)) +
           std::string(word.substr(word.size() - n));
  }
  const std::string own_tag = "@" + source_lang;
  if (ends_with(word, own_tag) && word.size() > own_tag.size()) {
    return reverse_code_points(word.substr(0, word.size() - own_tag.size()));
  }
  return reverse_code_points(word) + "@" + target_lang;
}

std::string CipherKey::translate_sentence(std::string_view sentence) const {
  auto words = split_words(sentence);
  for (auto& w : words) w = translate_word(w);
  return join_words(words);
}

Document cipher_translate(const Document& doc, const CipherKey& key) {
  Document out;
  out.doc_id = doc.doc_id + "." + key.target_lang;
  out.lang = key.target_lang;
  out.sentences.reserve(doc.sentences.size());
  for (const auto& s : doc.sentences) {
    out.sentences.push_back(key.translate_sentence(s));
  }
  return out;
}

ParallelCorpus build_parallel_corpus(const std::vector<Document>& mono_docs,
                                     const Translator& translator,
                                     std::size_t sample_n, std::uint64_t seed) {
  if (sample_n < 1) throw ContractError("build_parallel_corpus: sample_n < 1");
  std::map<std::string, std::vector<std::size_t>> by_lang;
  for (std::size_t i = 0; i < mono_docs.size(); ++i) {
    by_lang[mono_docs[i].lang].push_back(i);
  }
  ParallelCorpus corpus;
  for (auto& [lang, indices] : by_lang) {
    Rng rng(derive_seed(seed, hash_string(lang)));
    const std::size_t take = std::min(sample_n, indices.size());
    // Partial Fisher-Yates: the first `take` slots are a uniform sample.
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + rng.uniform(indices.size() - i);
      std::swap(indices[i], indices[j]);
    }
    std::vector<std::size_t> chosen(indices.begin(), indices.begin() + take);
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t idx : chosen) {
      const Document& src = mono_docs[idx];
      ParallelDocPair pair;
      pair.src = src;
      pair.tgt = translator(src);
      pair.pair_id = src.doc_id + ">" + pair.tgt.lang;
      corpus.add(std::move(pair));
    }
  }
  return corpus;
}

std::vector<Document> read_documents(std::istream& in) {
  std::vector<Document> docs;
  std::set<std::string> seen;
  for_each_record(in, [&](const nlohmann::json& j, std::size_t line) {
    const bool pair = j.is_object() && j.contains("pair_id") && j.contains("src");
    Document doc = document_from_json(pair ? j.at("src") : j, line);
    if (!seen.insert(doc.doc_id).second) {
      throw ValidationError("line " + std::to_string(line) +
                            ": duplicate doc_id " + doc.doc_id);
    }
    docs.push_back(std::move(doc));
  });
  return docs;
}

std::vector<Document> read_documents(const std::string& path) {
  auto in = open_in(path);
  return read_documents(in);
}

void write_documents(std::ostream& out, const std::vector<Document>& docs) {
  for (const auto& d : docs) out << document_to_json(d).dump() << '\n';
}

void write_documents(const std::string& path,
                     const std::vector<Document>& docs) {
  auto out = open_out(path);
  write_documents(out, docs);
}

ParallelCorpus read_corpus(std::istream& in) {
  ParallelCorpus corpus;
  for_each_record(in, [&](const nlohmann::json& j, std::size_t line) {
    if (!j.is_object()) throw ParseError(line, "record is not an object");
    for (const char* field : {"pair_id", "src", "tgt"}) {
      if (!j.contains(field)) {
        throw ParseError(line, std::string("missing field \"") + field + "\"");
      }
    }
    ParallelDocPair pair;
    if (!j.at("pair_id").is_string()) {
      throw ParseError(line, "pair_id must be a string");
    }
    pair.pair_id = j.at("pair_id").get<std::string>();
    pair.src = document_from_json(j.at("src"), line);
    pair.tgt = document_from_json(j.at("tgt"), line);
    try {
      corpus.add(std::move(pair));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line) + ": " + e.what());
    }
  });
  return corpus;
}

ParallelCorpus read_corpus(const std::string& path) {
  auto in = open_in(path);
  return read_corpus(in);
}

void write_corpus(std::ostream& out, const ParallelCorpus& corpus) {
  for (const auto* p : corpus.all()) {
    ordered_json j;
    j["pair_id"] = p->pair_id;
    j["src"] = document_to_json(p->src);
    j["tgt"] = document_to_json(p->tgt);
    out << j.dump() << '\n';
  }
}

void write_corpus(const std::string& path, const ParallelCorpus& corpus) {
  auto out = open_out(path);
  write_corpus(out, corpus);
}

void write_cipher_key(const std::string& path, const CipherKey& key) {
  auto out = open_out(path);
  out << "#cipher\t" << key.source_lang << '\t' << key.target_lang << '\n';
  for (const auto& [from, to] : key.table) out << from << '\t' << to << '\n';
}

CipherKey read_cipher_key(const std::string& path) {
  auto in = open_in(path);
  CipherKey key;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string a, b, c;
    std::getline(fields, a, '\t');
    std::getline(fields, b, '\t');
    if (line_no == 1) {
      std::getline(fields, c, '\t');
      if (a != "#cipher" || b.empty() || c.empty()) {
        throw ParseError(line_no, "expected '#cipher<TAB>src<TAB>tgt' header");
      }
      key.source_lang = b;
      key.target_lang = c;
      continue;
    }
    if (a.empty() || b.empty()) throw ParseError(line_no, "expected word<TAB>word");
    key.table[a] = b;
  }
  if (line_no == 0) throw ParseError(0, path + " is empty");
  key.validate();
  return key;
}

}  // namespace docforge
