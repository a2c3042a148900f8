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

#include "docforge/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "docforge/errors.hpp"

namespace docforge {

std::string make_prefix(Task task, std::string_view src_lang_name,
                        std::string_view tgt_lang_name) {
  if (src_lang_name.empty() || tgt_lang_name.empty()) {
    throw ContractError("make_prefix: language names must be non-empty");
  }
  std::string out = task == Task::Translate ? "Translate " : "Summarize ";
  out += src_lang_name;
  out += " to ";
  out += tgt_lang_name;
  out += " :";
  return out;
}

const std::string& LanguageNames::name(const std::string& code) const {
  auto it = names_.find(code);
  return it == names_.end() ? code : it->second;
}

std::vector<Chunk> chunk_document(const Document& doc, const Vocabulary& vocab,
                                  std::size_t max_len, std::size_t prefix_len) {
  if (max_len <= prefix_len + 1) {
    throw ContractError("chunk budget " + std::to_string(max_len) +
                        " leaves no room after a " + std::to_string(prefix_len) +
                        "-token prefix and EOS");
  }
  const std::size_t budget = max_len - prefix_len - 1;
  std::vector<Chunk> chunks;
  Chunk current;
  std::size_t used = 0;
  auto flush = [&] {
    if (!current.sentences.empty()) chunks.push_back(std::move(current));
    current = Chunk{};
    used = 0;
  };
  for (const auto& sentence : doc.sentences) {
    const std::size_t n = vocab.encode_words(sentence).size();
    if (n > budget) {
      flush();
      const auto words = split_words(sentence);
      for (std::size_t i = 0; i < words.size(); i += budget) {
        const auto last = std::min(words.size(), i + budget);
        std::vector<std::string> piece(words.begin() + i, words.begin() + last);
        chunks.push_back(Chunk{{join_words(piece)}, true});
      }
      continue;
    }
    if (used + n > budget) flush();
    current.sentences.push_back(sentence);
    used += n;
  }
  flush();
  return chunks;
}

MixtureSchedule MixtureSchedule::single(Objective objective, std::int64_t steps) {
  MixtureSchedule s;
  s.stages.push_back({steps, {{objective, 1.0}}});
  return s;
}

void MixtureSchedule::validate() const {
  if (stages.empty()) throw ConfigError("schedule has no stages");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto& st = stages[i];
    if (st.steps <= 0) {
      throw ConfigError("stage " + std::to_string(i) + ": steps must be positive");
    }
    if (st.mix.empty()) throw ConfigError("stage " + std::to_string(i) + ": empty mix");
    double sum = 0.0;
    for (const auto& [o, w] : st.mix) {
      if (!(w >= 0.0)) {
        throw ConfigError("stage " + std::to_string(i) + ": negative weight");
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ConfigError("stage " + std::to_string(i) + ": weights sum to " +
                        std::to_string(sum) + ", not 1");
    }
  }
}

std::int64_t MixtureSchedule::total_steps() const {
  std::int64_t total = 0;
  for (const auto& s : stages) total += s.steps;
  return total;
}

std::size_t MixtureSchedule::stage_index(std::int64_t global_step) const {
  std::int64_t end = 0;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    end += stages[i].steps;
    if (global_step < end) return i;
  }
  return stages.size() - 1;
}

ObjectiveStream::ObjectiveStream(Objective objective, const ParallelCorpus& corpus,
                                 const Vocabulary& vocab, StreamOptions options)
    : objective_(objective), vocab_(&vocab), options_(std::move(options)) {
  options_.corruption.validate();
  for (const auto* pair : corpus.all()) {
    if (objective == Objective::SenTLM) {
      for (std::size_t s = 0; s < pair->src.sentences.size(); ++s) {
        records_.push_back({pair, s});
      }
    } else {
      records_.push_back({pair, 0});
    }
  }
  if (records_.empty()) {
    throw ValidationError(std::string("no records for objective ") +
                          std::string(objective_name(objective)));
  }
  start_epoch();
}

void ObjectiveStream::start_epoch() {
  order_.resize(records_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  Rng rng(derive_seed(options_.corruption.seed,
                      static_cast<std::uint64_t>(objective_), epoch_, 0x0de7ULL));
  for (std::size_t i = order_.size(); i > 1; --i) {
    std::swap(order_[i - 1], order_[rng.uniform(i)]);
  }
  cursor_ = 0;
}

std::optional<TrainingExample> ObjectiveStream::build(const Record& record) {
  const ParallelDocPair& pair = *record.pair;
  std::string record_id = pair.pair_id;
  if (objective_ == Objective::SenTLM) {
    record_id += "#" + std::to_string(record.sentence);
  }
  Rng rng(example_seed(options_.corruption.seed, record_id, objective_, epoch_));
  const auto& cfg = options_.corruption;
  std::optional<TrainingExample> ex;
  switch (objective_) {
    case Objective::SpanCorrupt:
      ex = make_span_corruption(pair.src, *vocab_, cfg, rng);
      break;
    case Objective::Dr:
      ex = make_dr(pair.src, *vocab_, cfg, rng);
      break;
    case Objective::DrMT:
      ex = make_drmt(pair, *vocab_, cfg, rng);
      break;
    case Objective::DocNMT:
      ex = make_docnmt(pair, *vocab_);
      break;
    case Objective::DocTLM:
      ex = make_doctlm(pair, *vocab_, cfg, rng);
      break;
    case Objective::SenTLM:
      ex = make_sentlm(pair, record.sentence, *vocab_, cfg, rng);
      break;
    case Objective::Summarize:
      return encode_task_example(
          make_toy_summary(pair, options_.summary_sentences), *vocab_,
          options_.names);
  }
  if (ex && options_.translation_prefix &&
      (objective_ == Objective::DrMT || objective_ == Objective::DocNMT)) {
    // Added after corruption so the prefix is never masked.
    auto prefix = vocab_->encode_words(make_prefix(
        Task::Translate, options_.names.name(ex->src_lang),
        options_.names.name(ex->tgt_lang)));
    ex->input_ids.insert(ex->input_ids.begin(), prefix.begin(), prefix.end());
  }
  return ex;
}

TrainingExample ObjectiveStream::next() {
  std::size_t misses = 0;
  while (true) {
    if (cursor_ == order_.size()) {
      ++epoch_;
      start_epoch();
    }
    auto ex = build(records_[order_[cursor_++]]);
    if (ex) return std::move(*ex);
    if (++misses > records_.size()) {
      throw ValidationError(std::string("every record is degenerate for ") +
                            std::string(objective_name(objective_)));
    }
  }
}

StreamSet make_streams(const MixtureSchedule& schedule,
                       const ParallelCorpus& corpus, const Vocabulary& vocab,
                       const StreamOptions& options) {
  StreamSet streams;
  for (const auto& stage : schedule.stages) {
    for (const auto& [o, w] : stage.mix) {
      if (!streams.count(o)) streams.emplace(o, ObjectiveStream(o, corpus, vocab, options));
    }
  }
  return streams;
}

TrainingExample next_example(const MixtureSchedule& schedule, StreamSet& streams,
                             std::int64_t global_step, Rng& rng) {
  const auto& stage = schedule.stages.at(schedule.stage_index(global_step));
  std::vector<double> weights;
  weights.reserve(stage.mix.size());
  for (const auto& [o, w] : stage.mix) weights.push_back(w);
  const Objective objective = stage.mix[rng.categorical(weights)].first;
  auto it = streams.find(objective);
  if (it == streams.end()) {
    throw ContractError(std::string("no stream for objective ") +
                        std::string(objective_name(objective)));
  }
  return it->second.next();
}

TaskExample make_translation_task(const ParallelDocPair& pair) {
  return {Task::Translate, pair.src, pair.tgt};
}

TaskExample make_toy_summary(const ParallelDocPair& pair, std::size_t k) {
  if (k < 1) throw ContractError("make_toy_summary: k must be >= 1");
  TaskExample t{Task::Summarize, pair.src, pair.tgt};
  t.target.sentences.resize(std::min(k, pair.tgt.sentences.size()));
  return t;
}

TrainingExample encode_task_example(const TaskExample& task,
                                    const Vocabulary& vocab,
                                    const LanguageNames& names) {
  TrainingExample ex;
  ex.objective = task.task == Task::Translate ? Objective::DocNMT
                                              : Objective::Summarize;
  const auto prefix = make_prefix(task.task, names.name(task.source.lang),
                                  names.name(task.target.lang));
  ex.input_ids = vocab.encode_words(prefix);
  const auto src = document_tokens(task.source, vocab);
  ex.input_ids.insert(ex.input_ids.end(), src.begin(), src.end());
  ex.input_ids.push_back(kEosId);
  ex.target_ids = document_tokens(task.target, vocab);
  ex.target_ids.push_back(kEosId);
  ex.src_lang = task.source.lang;
  ex.tgt_lang = task.target.lang;
  ex.source_id = task.source.doc_id;
  return ex;
}

Eigen::MatrixXf Batch::loss_mask() const {
  Eigen::MatrixXf mask = Eigen::MatrixXf::Zero(targets.rows(), targets.cols());
  for (std::size_t i = 0; i < size(); ++i) {
    mask.row(static_cast<Eigen::Index>(i))
        .head(static_cast<Eigen::Index>(target_lengths[i]))
        .setOnes();
  }
  return mask;
}

std::vector<TokenId> truncate_with_eos(std::span<const TokenId> ids,
                                       std::size_t max_len) {
  if (ids.size() <= max_len) return {ids.begin(), ids.end()};
  std::vector<TokenId> out(ids.begin(), ids.begin() + max_len);
  if (!out.empty()) out.back() = kEosId;
  return out;
}

namespace {

std::span<const TokenId> strip_trailing_pad(std::span<const TokenId> ids) {
  std::size_t n = ids.size();
  while (n > 0 && ids[n - 1] == kPadId) --n;
  return ids.first(n);
}

}  // namespace

Batch make_batch(const std::vector<TrainingExample>& examples,
                 std::size_t max_input_len, std::size_t max_target_len) {
  if (max_input_len == 0 || max_target_len == 0) {
    throw ContractError("make_batch: lengths must be positive");
  }
  std::vector<std::vector<TokenId>> ins, tgts;
  Batch b;
  std::size_t in_w = 0, tgt_w = 0;
  for (const auto& ex : examples) {
    ins.push_back(truncate_with_eos(strip_trailing_pad(ex.input_ids), max_input_len));
    tgts.push_back(truncate_with_eos(strip_trailing_pad(ex.target_ids), max_target_len));
    in_w = std::max(in_w, ins.back().size());
    tgt_w = std::max(tgt_w, tgts.back().size());
    b.input_lengths.push_back(ins.back().size());
    b.target_lengths.push_back(tgts.back().size());
    b.objectives.push_back(ex.objective);
  }
  const auto rows = static_cast<Eigen::Index>(examples.size());
  b.inputs = TokenMatrix::Constant(rows, static_cast<Eigen::Index>(in_w), kPadId);
  b.targets = TokenMatrix::Constant(rows, static_cast<Eigen::Index>(tgt_w), kPadId);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& in = ins[static_cast<std::size_t>(i)];
    const auto& tg = tgts[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < in.size(); ++j) b.inputs(i, static_cast<Eigen::Index>(j)) = in[j];
    for (std::size_t j = 0; j < tg.size(); ++j) b.targets(i, static_cast<Eigen::Index>(j)) = tg[j];
  }
  return b;
}

Batch pack_batch(const std::function<TrainingExample()>& stream,
                 std::size_t batch_size, std::size_t max_input_len,
                 std::size_t max_target_len) {
  if (batch_size == 0) throw ContractError("pack_batch: batch_size must be positive");
  std::vector<TrainingExample> examples;
  examples.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) examples.push_back(stream());
  return make_batch(examples, max_input_len, max_target_len);
}

BatchStream::BatchStream(MixtureSchedule schedule, const ParallelCorpus& corpus,
                         const Vocabulary& vocab, StreamOptions options,
                         BatchingOptions batching, std::uint64_t seed)
    : schedule_(std::move(schedule)),
      batching_(batching),
      seed_(seed) {
  schedule_.validate();
  streams_ = make_streams(schedule_, corpus, vocab, options);
}

std::vector<TrainingExample> BatchStream::draw() {
  ++step_;
  std::vector<TrainingExample> examples;
  examples.reserve(batching_.batch_size);
  for (std::size_t slot = 0; slot < batching_.batch_size; ++slot) {
    Rng rng(derive_seed(seed_, static_cast<std::uint64_t>(step_), slot));
    examples.push_back(next_example(schedule_, streams_, step_ - 1, rng));
  }
  return examples;
}

Batch BatchStream::next() {
  return make_batch(draw(), batching_.max_input_len, batching_.max_target_len);
}

void BatchStream::skip(std::int64_t steps) {
  for (std::int64_t i = 0; i < steps; ++i) draw();
}

}  // namespace docforge
