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

#ifndef DOCFORGE_EVAL_HPP_
#define DOCFORGE_EVAL_HPP_

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace docforge {

using Tokens = std::vector<std::string>;

struct EvalReport {
  std::string metric;
  // 0..100.
  double score = 0.0;
  // BLEU components: modified n-gram precisions (fractions), brevity penalty.
  std::array<double, 4> precisions{};
  double brevity_penalty = 0.0;
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
  // ROUGE components (fractions, mean over segments).
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t n_segments = 0;
};

// Document-level BLEU: each document is one segment, clipped n-gram counts
// (n = 1..4) and lengths are pooled over the corpus before the geometric
// mean. No smoothing: any order with zero matches (or nothing to match)
// scores 0. Throws ContractError on empty or misaligned inputs.
EvalReport d_bleu(const std::vector<Tokens>& hyp_docs,
                  const std::vector<Tokens>& ref_docs);
// Whitespace-tokenizes each document first.
EvalReport d_bleu(const std::vector<std::string>& hyp_docs,
                  const std::vector<std::string>& ref_docs);

enum class RougeVariant { R1, R2, RL };

std::string rouge_name(RougeVariant variant);

// F1 over clipped unigram/bigram overlap (R1/R2) or LCS length (RL).
// An empty hypothesis scores 0; an empty reference is a ContractError.
EvalReport rouge(const Tokens& hyp, const Tokens& ref, RougeVariant variant);
// Mean of per-segment scores.
EvalReport corpus_rouge(const std::vector<Tokens>& hyps,
                        const std::vector<Tokens>& refs, RougeVariant variant);

std::size_t lcs_length(const Tokens& a, const Tokens& b);

// One header row, then one row per report:
// metric score p1 p2 p3 p4 bp precision recall f1 n_segments
void write_report_tsv(std::ostream& out, const std::vector<EvalReport>& reports);
void write_report_tsv(const std::string& path, const std::vector<EvalReport>& reports);

}  // namespace docforge

#endif  // DOCFORGE_EVAL_HPP_
