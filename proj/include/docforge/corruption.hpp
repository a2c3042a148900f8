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

#ifndef DOCFORGE_CORRUPTION_HPP_
#define DOCFORGE_CORRUPTION_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "docforge/corpus.hpp"
#include "docforge/rng.hpp"
#include "docforge/tokenizer.hpp"

namespace docforge {

enum class Objective {
  SpanCorrupt,
  Dr,
  DrMT,
  DocNMT,
  DocTLM,
  SenTLM,
  // Finetuning task; not a pretraining objective.
  Summarize,
};

std::string_view objective_name(Objective objective);
// Throws ConfigError on unknown names.
Objective parse_objective(std::string_view name);

struct CorruptionConfig {
  double noise_density = 0.15;
  double mean_span_len = 3.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Span {
  std::size_t start = 0;
  std::size_t length = 0;

  bool operator==(const Span&) const = default;
};

struct SpanSample {
  std::vector<Span> spans;
  // Set when n_tokens < 2 and nothing could be masked.
  bool degenerate = false;
};

struct TrainingExample {
  Objective objective = Objective::SpanCorrupt;
  std::vector<TokenId> input_ids;
  std::vector<TokenId> target_ids;
  std::string src_lang;
  std::string tgt_lang;
  // permutation[i] = original index of shuffled sentence i.
  std::optional<std::vector<std::size_t>> permutation;
  std::string source_id;

  bool operator==(const TrainingExample&) const = default;
};

// Uniform Fisher-Yates over sentences.
std::pair<Document, std::vector<std::size_t>> shuffle_sentences(
    const Document& doc, Rng& rng);

// Inverse of shuffle_sentences given its recorded permutation.
Document unshuffle_sentences(const Document& shuffled,
                             std::span<const std::size_t> permutation);

// Number of masked tokens for a sequence of n_tokens (n_tokens >= 2).
std::size_t noise_budget(std::size_t n_tokens, const CorruptionConfig& cfg);
std::size_t span_budget(std::size_t num_noise, std::size_t n_tokens,
                        const CorruptionConfig& cfg);

// Random segmentation: the noise budget is split into span_budget spans by a
// uniform random composition (each span >= 1), and the remaining tokens into
// num_spans + 1 gaps (interior gaps >= 1, the two outer gaps >= 0).
SpanSample sample_spans(std::size_t n_tokens, const CorruptionConfig& cfg,
                        Rng& rng);

// Replaces span k with MASK_k. Throws ContractError on overlap or overflow.
std::vector<TokenId> apply_mask(std::span<const TokenId> tokens,
                                std::span<const Span> spans,
                                const Vocabulary& vocab);

// MASK_0 <span 0> MASK_1 <span 1> ... EOS.
std::vector<TokenId> span_targets(std::span<const TokenId> tokens,
                                  std::span<const Span> spans,
                                  const Vocabulary& vocab);

// Encodes every sentence of `doc` in order, without EOS.
std::vector<TokenId> document_tokens(const Document& doc, const Vocabulary& vocab);

// The make_* functions return std::nullopt when the source side has fewer
// than two tokens to corrupt (the caller skips the example).
std::optional<TrainingExample> make_span_corruption(const Document& doc,
                                                    const Vocabulary& vocab,
                                                    const CorruptionConfig& cfg,
                                                    Rng& rng);
TrainingExample make_span_corruption_with(const Document& doc,
                                          const Vocabulary& vocab,
                                          std::span<const Span> spans);

std::optional<TrainingExample> make_dr(const Document& doc,
                                       const Vocabulary& vocab,
                                       const CorruptionConfig& cfg, Rng& rng);

std::optional<TrainingExample> make_drmt(const ParallelDocPair& pair,
                                         const Vocabulary& vocab,
                                         const CorruptionConfig& cfg, Rng& rng);
// DrMT with the noise fixed by the caller.
TrainingExample make_drmt_with(const ParallelDocPair& pair,
                               const Vocabulary& vocab,
                               std::span<const std::size_t> permutation,
                               std::span<const Span> spans);

TrainingExample make_docnmt(const ParallelDocPair& pair, const Vocabulary& vocab);

std::optional<TrainingExample> make_doctlm(const ParallelDocPair& pair,
                                           const Vocabulary& vocab,
                                           const CorruptionConfig& cfg,
                                           Rng& rng);
// Spans index the concatenation src ++ SEP ++ tgt and must not cover SEP.
TrainingExample make_doctlm_with(const ParallelDocPair& pair,
                                 const Vocabulary& vocab,
                                 std::span<const Span> spans);

// Throws ContractError when sent_idx is out of range.
std::optional<TrainingExample> make_sentlm(const ParallelDocPair& pair,
                                           std::size_t sent_idx,
                                           const Vocabulary& vocab,
                                           const CorruptionConfig& cfg,
                                           Rng& rng);

// Per-example seed so that shards of work reproduce the same examples.
std::uint64_t example_seed(std::uint64_t global_seed, std::string_view record_id,
                           Objective objective, std::uint64_t epoch = 0);

// Line-delimited dump records: objective, input_ids, target_ids, permutation,
// langs, source_id.
void write_example(std::ostream& out, const TrainingExample& example);
std::vector<TrainingExample> read_examples(std::istream& in);

}  // namespace docforge

#endif  // DOCFORGE_CORRUPTION_HPP_
