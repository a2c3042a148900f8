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

#include "docforge/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "docforge/corpus.hpp"
#include "docforge/errors.hpp"

namespace docforge {
namespace {

using NgramCounts = std::map<std::string, std::size_t>;

NgramCounts ngrams(const Tokens& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t k = 1; k < n; ++k) {
      key += '\x1f';
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

std::size_t clipped_overlap(const NgramCounts& hyp, const NgramCounts& ref) {
  std::size_t overlap = 0;
  for (const auto& [gram, c] : hyp) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(c, it->second);
  }
  return overlap;
}

std::size_t total(const NgramCounts& counts) {
  std::size_t n = 0;
  for (const auto& [g, c] : counts) n += c;
  return n;
}

double f_measure(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

EvalReport d_bleu(const std::vector<Tokens>& hyp_docs,
                  const std::vector<Tokens>& ref_docs) {
  if (ref_docs.empty()) throw ContractError("d_bleu: empty reference list");
  if (hyp_docs.size() != ref_docs.size()) {
    throw ContractError("d_bleu: " + std::to_string(hyp_docs.size()) +
                        " hypotheses for " + std::to_string(ref_docs.size()) +
                        " references");
  }
  std::array<std::size_t, 4> matches{}, possible{};
  EvalReport r;
  r.metric = "d-BLEU";
  r.n_segments = ref_docs.size();
  for (std::size_t d = 0; d < ref_docs.size(); ++d) {
    r.hyp_len += hyp_docs[d].size();
    r.ref_len += ref_docs[d].size();
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto h = ngrams(hyp_docs[d], n);
      matches[n - 1] += clipped_overlap(h, ngrams(ref_docs[d], n));
      possible[n - 1] += total(h);
    }
  }
  bool zero = false;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    if (possible[n] == 0 || matches[n] == 0) {
      zero = true;
      r.precisions[n] = 0.0;
      continue;
    }
    r.precisions[n] = static_cast<double>(matches[n]) / static_cast<double>(possible[n]);
    log_sum += std::log(r.precisions[n]);
  }
  if (r.hyp_len == 0) {
    r.brevity_penalty = 0.0;
  } else if (r.hyp_len < r.ref_len) {
    r.brevity_penalty = std::exp(1.0 - static_cast<double>(r.ref_len) /
                                           static_cast<double>(r.hyp_len));
  } else {
    r.brevity_penalty = 1.0;
  }
  r.score = zero ? 0.0 : 100.0 * r.brevity_penalty * std::exp(log_sum / 4.0);
  return r;
}

EvalReport d_bleu(const std::vector<std::string>& hyp_docs,
                  const std::vector<std::string>& ref_docs) {
  std::vector<Tokens> h, r;
  for (const auto& s : hyp_docs) h.push_back(split_words(s));
  for (const auto& s : ref_docs) r.push_back(split_words(s));
  return d_bleu(h, r);
}

std::string rouge_name(RougeVariant variant) {
  switch (variant) {
    case RougeVariant::R1:
      return "ROUGE-1";
    case RougeVariant::R2:
      return "ROUGE-2";
    case RougeVariant::RL:
      return "ROUGE-L";
  }
  return "ROUGE";
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

EvalReport rouge(const Tokens& hyp, const Tokens& ref, RougeVariant variant) {
  if (ref.empty()) throw ContractError("rouge: empty reference");
  EvalReport r;
  r.metric = rouge_name(variant);
  r.n_segments = 1;
  r.hyp_len = hyp.size();
  r.ref_len = ref.size();
  if (hyp.empty()) return r;
  std::size_t overlap = 0, hyp_total = 0, ref_total = 0;
  if (variant == RougeVariant::RL) {
    overlap = lcs_length(hyp, ref);
    hyp_total = hyp.size();
    ref_total = ref.size();
  } else {
    const std::size_t n = variant == RougeVariant::R1 ? 1 : 2;
    const auto h = ngrams(hyp, n);
    const auto g = ngrams(ref, n);
    overlap = clipped_overlap(h, g);
    hyp_total = total(h);
    ref_total = total(g);
    if (hyp_total == 0 || ref_total == 0) {
      // Too short for this order: only an exact match counts.
      const double s = hyp == ref ? 1.0 : 0.0;
      r.precision = r.recall = r.f1 = s;
      r.score = 100.0 * s;
      return r;
    }
  }
  r.precision = static_cast<double>(overlap) / static_cast<double>(hyp_total);
  r.recall = static_cast<double>(overlap) / static_cast<double>(ref_total);
  r.f1 = f_measure(r.precision, r.recall);
  r.score = 100.0 * r.f1;
  return r;
}

EvalReport corpus_rouge(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs,
                        RougeVariant variant) {
  if (refs.empty()) throw ContractError("corpus_rouge: empty reference list");
  if (hyps.size() != refs.size()) throw ContractError("corpus_rouge: size mismatch");
  EvalReport r;
  r.metric = rouge_name(variant);
  r.n_segments = refs.size();
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto one = rouge(hyps[i], refs[i], variant);
    r.precision += one.precision;
    r.recall += one.recall;
    r.f1 += one.f1;
    r.score += one.score;
    r.hyp_len += one.hyp_len;
    r.ref_len += one.ref_len;
  }
  const double n = static_cast<double>(refs.size());
  r.precision /= n;
  r.recall /= n;
  r.f1 /= n;
  r.score /= n;
  return r;
}

void write_report_tsv(std::ostream& out, const std::vector<EvalReport>& reports) {
  out << "metric\tscore\tp1\tp2\tp3\tp4\tbp\tprecision\trecall\tf1\tn_segments\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return std::string(buf);
  };
  for (const auto& r : reports) {
    const bool bleu = r.metric == "d-BLEU";
    out << r.metric << '\t' << num(r.score);
    for (double p : r.precisions) out << '\t' << (bleu ? num(p) : "-");
    out << '\t' << (bleu ? num(r.brevity_penalty) : "-");
    out << '\t' << (bleu ? "-" : num(r.precision));
    out << '\t' << (bleu ? "-" : num(r.recall));
    out << '\t' << (bleu ? "-" : num(r.f1));
    out << '\t' << r.n_segments << '\n';
  }
}

void write_report_tsv(const std::string& path, const std::vector<EvalReport>& reports) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_report_tsv(out, reports);
}

}  // namespace docforge
