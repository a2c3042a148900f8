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

#include "docforge/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include "docforge/errors.hpp"
#include "json.hpp"

namespace docforge {
namespace {

constexpr std::pair<Objective, std::string_view> kObjectiveNames[] = {
    {Objective::SpanCorrupt, "SpanCorrupt"}, {Objective::Dr, "Dr"},
    {Objective::DrMT, "DrMT"},               {Objective::DocNMT, "DocNMT"},
    {Objective::DocTLM, "DocTLM"},           {Objective::SenTLM, "SenTLM"},
    {Objective::Summarize, "Summarize"},
};

// m distinct values from [0, n), ascending (Floyd's algorithm).
std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t m, Rng& rng) {
  std::set<std::size_t> chosen;
  for (std::size_t j = n - m; j < n; ++j) {
    const std::size_t t = rng.uniform(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  return {chosen.begin(), chosen.end()};
}

// Uniform composition of `total` into `parts` non-negative integers.
std::vector<std::size_t> random_composition(std::size_t total, std::size_t parts,
                                            Rng& rng) {
  std::vector<std::size_t> out(parts, 0);
  if (parts == 1) {
    out[0] = total;
    return out;
  }
  // Stars and bars: parts - 1 bars among total + parts - 1 slots.
  auto bars = sample_distinct(total + parts - 1, parts - 1, rng);
  std::size_t prev = 0;
  for (std::size_t i = 0; i + 1 < parts; ++i) {
    out[i] = bars[i] - prev;
    prev = bars[i] + 1;
  }
  out[parts - 1] = total + parts - 1 - prev;
  return out;
}

void check_spans(std::span<const Span> spans, std::size_t n) {
  std::size_t end = 0;
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const Span& s = spans[k];
    if (s.length == 0) {
      throw ContractError("span " + std::to_string(k) + " is empty");
    }
    if (s.start < end) {
      throw ContractError("span " + std::to_string(k) +
                          " overlaps or precedes the previous span");
    }
    if (s.start + s.length > n) {
      throw ContractError("span " + std::to_string(k) + " ends at " +
                          std::to_string(s.start + s.length) + " past " +
                          std::to_string(n) + " tokens");
    }
    end = s.start + s.length;
  }
}

std::vector<TokenId> with_eos(std::vector<TokenId> ids) {
  ids.push_back(kEosId);
  return ids;
}

void check_permutation(std::span<const std::size_t> permutation, std::size_t n) {
  if (permutation.size() != n) {
    throw ContractError("permutation has " + std::to_string(permutation.size()) +
                        " entries for " + std::to_string(n) + " sentences");
  }
  std::vector<bool> seen(n, false);
  for (std::size_t p : permutation) {
    if (p >= n || seen[p]) throw ContractError("not a permutation");
    seen[p] = true;
  }
}

Document permute(const Document& doc, std::span<const std::size_t> permutation) {
  check_permutation(permutation, doc.sentences.size());
  Document out;
  out.doc_id = doc.doc_id;
  out.lang = doc.lang;
  out.sentences.reserve(permutation.size());
  for (std::size_t p : permutation) out.sentences.push_back(doc.sentences[p]);
  return out;
}

std::vector<TokenId> tlm_concat(const Document& src, const Document& tgt,
                                const Vocabulary& vocab, std::size_t* boundary) {
  auto seq = document_tokens(src, vocab);
  *boundary = seq.size();
  seq.push_back(kSepId);
  auto t = document_tokens(tgt, vocab);
  seq.insert(seq.end(), t.begin(), t.end());
  return seq;
}

// Samples over the maskable positions (everything but the boundary) and
// maps back, splitting any span that straddles the boundary.
std::vector<Span> tlm_spans(std::size_t n_src, std::size_t n_tgt,
                            const CorruptionConfig& cfg, Rng& rng) {
  auto sample = sample_spans(n_src + n_tgt, cfg, rng);
  std::vector<Span> out;
  for (const Span& s : sample.spans) {
    const std::size_t end = s.start + s.length;
    if (end <= n_src) {
      out.push_back(s);
    } else if (s.start >= n_src) {
      out.push_back({s.start + 1, s.length});
    } else {
      out.push_back({s.start, n_src - s.start});
      out.push_back({n_src + 1, end - n_src});
    }
  }
  return out;
}

TrainingExample tlm_example(Objective objective, const Document& src,
                            const Document& tgt, const Vocabulary& vocab,
                            std::span<const Span> spans) {
  std::size_t boundary = 0;
  auto seq = tlm_concat(src, tgt, vocab, &boundary);
  for (const Span& s : spans) {
    if (s.start <= boundary && boundary < s.start + s.length) {
      throw ContractError("span covers the language boundary token");
    }
  }
  TrainingExample ex;
  ex.objective = objective;
  ex.input_ids = with_eos(apply_mask(seq, spans, vocab));
  ex.target_ids = span_targets(seq, spans, vocab);
  ex.src_lang = src.lang;
  ex.tgt_lang = tgt.lang;
  return ex;
}

}  // namespace

std::string_view objective_name(Objective objective) {
  for (const auto& [o, name] : kObjectiveNames) {
    if (o == objective) return name;
  }
  return "?";
}

Objective parse_objective(std::string_view name) {
  for (const auto& [o, n] : kObjectiveNames) {
    if (n == name) return o;
  }
  throw ConfigError("unknown objective '" + std::string(name) + "'");
}

void CorruptionConfig::validate() const {
  if (!(noise_density > 0.0 && noise_density < 1.0)) {
    throw ConfigError("noise_density must lie in (0, 1)");
  }
  if (!(mean_span_len >= 1.0)) throw ConfigError("mean_span_len must be >= 1");
}

std::pair<Document, std::vector<std::size_t>> shuffle_sentences(
    const Document& doc, Rng& rng) {
  std::vector<std::size_t> perm(doc.sentences.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.uniform(i)]);
  }
  return {permute(doc, perm), std::move(perm)};
}

Document unshuffle_sentences(const Document& shuffled,
                             std::span<const std::size_t> permutation) {
  check_permutation(permutation, shuffled.sentences.size());
  Document out = shuffled;
  for (std::size_t i = 0; i < permutation.size(); ++i) {
    out.sentences[permutation[i]] = shuffled.sentences[i];
  }
  return out;
}

std::size_t noise_budget(std::size_t n_tokens, const CorruptionConfig& cfg) {
  const auto raw = static_cast<std::size_t>(
      std::llround(static_cast<double>(n_tokens) * cfg.noise_density));
  return std::clamp<std::size_t>(raw, 1, n_tokens - 1);
}

std::size_t span_budget(std::size_t num_noise, std::size_t n_tokens,
                        const CorruptionConfig& cfg) {
  auto spans = static_cast<std::size_t>(
      std::llround(static_cast<double>(num_noise) / cfg.mean_span_len));
  spans = std::max<std::size_t>(spans, 1);
  spans = std::min(spans, num_noise);
  // Interior gaps need at least one visible token each.
  spans = std::min(spans, n_tokens - num_noise + 1);
  return spans;
}

SpanSample sample_spans(std::size_t n_tokens, const CorruptionConfig& cfg,
                        Rng& rng) {
  if (n_tokens < 2) return {{}, true};
  const std::size_t num_noise = noise_budget(n_tokens, cfg);
  const std::size_t num_spans = span_budget(num_noise, n_tokens, cfg);
  const std::size_t num_visible = n_tokens - num_noise;

  auto lengths = random_composition(num_noise - num_spans, num_spans, rng);
  for (auto& l : lengths) ++l;
  auto gaps = random_composition(num_visible - (num_spans - 1), num_spans + 1, rng);
  for (std::size_t i = 1; i < num_spans; ++i) ++gaps[i];

  SpanSample out;
  out.spans.reserve(num_spans);
  std::size_t pos = gaps[0];
  for (std::size_t k = 0; k < num_spans; ++k) {
    out.spans.push_back({pos, lengths[k]});
    pos += lengths[k] + gaps[k + 1];
  }
  return out;
}

std::vector<TokenId> apply_mask(std::span<const TokenId> tokens,
                                std::span<const Span> spans,
                                const Vocabulary& vocab) {
  check_spans(spans, tokens.size());
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  std::size_t pos = 0;
  for (std::size_t k = 0; k < spans.size(); ++k) {
    out.insert(out.end(), tokens.begin() + pos, tokens.begin() + spans[k].start);
    out.push_back(vocab.sentinel(static_cast<int>(k)));
    pos = spans[k].start + spans[k].length;
  }
  out.insert(out.end(), tokens.begin() + pos, tokens.end());
  return out;
}

std::vector<TokenId> span_targets(std::span<const TokenId> tokens,
                                  std::span<const Span> spans,
                                  const Vocabulary& vocab) {
  check_spans(spans, tokens.size());
  std::vector<TokenId> out;
  for (std::size_t k = 0; k < spans.size(); ++k) {
    out.push_back(vocab.sentinel(static_cast<int>(k)));
    auto first = tokens.begin() + spans[k].start;
    out.insert(out.end(), first, first + spans[k].length);
  }
  out.push_back(kEosId);
  return out;
}

std::vector<TokenId> document_tokens(const Document& doc, const Vocabulary& vocab) {
  std::vector<TokenId> ids;
  for (const auto& s : doc.sentences) {
    auto w = vocab.encode_words(s);
    ids.insert(ids.end(), w.begin(), w.end());
  }
  return ids;
}

std::optional<TrainingExample> make_span_corruption(const Document& doc,
                                                    const Vocabulary& vocab,
                                                    const CorruptionConfig& cfg,
                                                    Rng& rng) {
  const auto n = document_tokens(doc, vocab).size();
  if (n < 2) return std::nullopt;
  auto sample = sample_spans(n, cfg, rng);
  return make_span_corruption_with(doc, vocab, sample.spans);
}

TrainingExample make_span_corruption_with(const Document& doc,
                                          const Vocabulary& vocab,
                                          std::span<const Span> spans) {
  const auto tokens = document_tokens(doc, vocab);
  TrainingExample ex;
  ex.objective = Objective::SpanCorrupt;
  ex.input_ids = with_eos(apply_mask(tokens, spans, vocab));
  ex.target_ids = span_targets(tokens, spans, vocab);
  ex.src_lang = doc.lang;
  ex.tgt_lang = doc.lang;
  ex.source_id = doc.doc_id;
  return ex;
}

std::optional<TrainingExample> make_dr(const Document& doc,
                                       const Vocabulary& vocab,
                                       const CorruptionConfig& cfg, Rng& rng) {
  auto [shuffled, perm] = shuffle_sentences(doc, rng);
  const auto tokens = document_tokens(shuffled, vocab);
  if (tokens.size() < 2) return std::nullopt;
  auto sample = sample_spans(tokens.size(), cfg, rng);
  TrainingExample ex;
  ex.objective = Objective::Dr;
  ex.input_ids = with_eos(apply_mask(tokens, sample.spans, vocab));
  ex.target_ids = with_eos(document_tokens(doc, vocab));
  ex.src_lang = doc.lang;
  ex.tgt_lang = doc.lang;
  ex.permutation = std::move(perm);
  ex.source_id = doc.doc_id;
  return ex;
}

std::optional<TrainingExample> make_drmt(const ParallelDocPair& pair,
                                         const Vocabulary& vocab,
                                         const CorruptionConfig& cfg, Rng& rng) {
  auto [shuffled, perm] = shuffle_sentences(pair.src, rng);
  const auto n = document_tokens(shuffled, vocab).size();
  if (n < 2) return std::nullopt;
  auto sample = sample_spans(n, cfg, rng);
  return make_drmt_with(pair, vocab, perm, sample.spans);
}

TrainingExample make_drmt_with(const ParallelDocPair& pair,
                               const Vocabulary& vocab,
                               std::span<const std::size_t> permutation,
                               std::span<const Span> spans) {
  const Document shuffled = permute(pair.src, permutation);
  TrainingExample ex;
  ex.objective = Objective::DrMT;
  ex.input_ids = with_eos(apply_mask(document_tokens(shuffled, vocab), spans, vocab));
  ex.target_ids = with_eos(document_tokens(pair.tgt, vocab));
  ex.src_lang = pair.src.lang;
  ex.tgt_lang = pair.tgt.lang;
  ex.permutation.emplace(permutation.begin(), permutation.end());
  ex.source_id = pair.pair_id;
  return ex;
}

TrainingExample make_docnmt(const ParallelDocPair& pair, const Vocabulary& vocab) {
  TrainingExample ex;
  ex.objective = Objective::DocNMT;
  ex.input_ids = with_eos(document_tokens(pair.src, vocab));
  ex.target_ids = with_eos(document_tokens(pair.tgt, vocab));
  ex.src_lang = pair.src.lang;
  ex.tgt_lang = pair.tgt.lang;
  ex.source_id = pair.pair_id;
  return ex;
}

std::optional<TrainingExample> make_doctlm(const ParallelDocPair& pair,
                                           const Vocabulary& vocab,
                                           const CorruptionConfig& cfg,
                                           Rng& rng) {
  const auto n_src = document_tokens(pair.src, vocab).size();
  const auto n_tgt = document_tokens(pair.tgt, vocab).size();
  if (n_src + n_tgt < 2) return std::nullopt;
  auto spans = tlm_spans(n_src, n_tgt, cfg, rng);
  return make_doctlm_with(pair, vocab, spans);
}

TrainingExample make_doctlm_with(const ParallelDocPair& pair,
                                 const Vocabulary& vocab,
                                 std::span<const Span> spans) {
  auto ex = tlm_example(Objective::DocTLM, pair.src, pair.tgt, vocab, spans);
  ex.source_id = pair.pair_id;
  return ex;
}

std::optional<TrainingExample> make_sentlm(const ParallelDocPair& pair,
                                           std::size_t sent_idx,
                                           const Vocabulary& vocab,
                                           const CorruptionConfig& cfg,
                                           Rng& rng) {
  if (sent_idx >= pair.src.sentences.size() ||
      sent_idx >= pair.tgt.sentences.size()) {
    throw ContractError("sentence index " + std::to_string(sent_idx) +
                        " out of range for pair " + pair.pair_id);
  }
  Document src{pair.src.doc_id, pair.src.lang, {pair.src.sentences[sent_idx]}};
  Document tgt{pair.tgt.doc_id, pair.tgt.lang, {pair.tgt.sentences[sent_idx]}};
  const auto n_src = document_tokens(src, vocab).size();
  const auto n_tgt = document_tokens(tgt, vocab).size();
  if (n_src + n_tgt < 2) return std::nullopt;
  auto spans = tlm_spans(n_src, n_tgt, cfg, rng);
  auto ex = tlm_example(Objective::SenTLM, src, tgt, vocab, spans);
  ex.source_id = pair.pair_id + "#" + std::to_string(sent_idx);
  return ex;
}

std::uint64_t example_seed(std::uint64_t global_seed, std::string_view record_id,
                           Objective objective, std::uint64_t epoch) {
  return derive_seed(global_seed, hash_string(record_id),
                     static_cast<std::uint64_t>(objective), epoch);
}

void write_example(std::ostream& out, const TrainingExample& example) {
  nlohmann::ordered_json j;
  j["objective"] = objective_name(example.objective);
  j["input_ids"] = example.input_ids;
  j["target_ids"] = example.target_ids;
  if (example.permutation) {
    j["permutation"] = *example.permutation;
  } else {
    j["permutation"] = nullptr;
  }
  j["langs"] = {example.src_lang, example.tgt_lang};
  j["source_id"] = example.source_id;
  out << j.dump() << '\n';
}

std::vector<TrainingExample> read_examples(std::istream& in) {
  std::vector<TrainingExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TrainingExample ex;
      ex.objective = parse_objective(j.at("objective").get<std::string>());
      ex.input_ids = j.at("input_ids").get<std::vector<TokenId>>();
      ex.target_ids = j.at("target_ids").get<std::vector<TokenId>>();
      if (j.contains("permutation") && !j.at("permutation").is_null()) {
        ex.permutation = j.at("permutation").get<std::vector<std::size_t>>();
      }
      const auto langs = j.at("langs").get<std::vector<std::string>>();
      if (langs.size() != 2) throw ParseError(line_no, "langs must have 2 entries");
      ex.src_lang = langs[0];
      ex.tgt_lang = langs[1];
      if (j.contains("source_id")) ex.source_id = j.at("source_id").get<std::string>();
      out.push_back(std::move(ex));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

}  // namespace docforge
