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

#ifndef DOCFORGE_PIPELINE_HPP_
#define DOCFORGE_PIPELINE_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "docforge/corpus.hpp"
#include "docforge/corruption.hpp"
#include "docforge/tokenizer.hpp"

namespace docforge {

enum class Task { Translate, Summarize };

// "Translate X to Y :" / "Summarize X to Y :".
std::string make_prefix(Task task, std::string_view src_lang_name,
                        std::string_view tgt_lang_name);

// Display names used in prefixes, keyed by language code. Codes without an
// entry are used verbatim.
class LanguageNames {
 public:
  LanguageNames() = default;
  explicit LanguageNames(std::map<std::string, std::string> names)
      : names_(std::move(names)) {}
  const std::string& name(const std::string& code) const;
  const std::map<std::string, std::string>& entries() const { return names_; }

 private:
  std::map<std::string, std::string> names_;
};

struct Chunk {
  std::vector<std::string> sentences;
  // Set when a single sentence exceeded the budget and was cut by tokens.
  bool hard_split = false;
};

// Greedy packing of whole consecutive sentences so that
// prefix_len + chunk tokens + EOS <= max_len.
std::vector<Chunk> chunk_document(const Document& doc, const Vocabulary& vocab,
                                  std::size_t max_len = 512,
                                  std::size_t prefix_len = 0);

struct MixtureStage {
  std::int64_t steps = 0;
  std::vector<std::pair<Objective, double>> mix;
};

struct MixtureSchedule {
  std::vector<MixtureStage> stages;

  static MixtureSchedule single(Objective objective, std::int64_t steps);

  // Weights per stage sum to 1, step counts positive.
  void validate() const;
  std::int64_t total_steps() const;
  // 0-based step; steps past the end stay in the last stage.
  std::size_t stage_index(std::int64_t global_step) const;
};

struct StreamOptions {
  CorruptionConfig corruption;
  LanguageNames names;
  // Prefix translation-shaped inputs (DrMT, DocNMT) with "Translate X to Y :".
  bool translation_prefix = true;
  std::size_t summary_sentences = 1;
};

// Endless stream of one objective over a corpus. Records are visited in a
// seeded per-epoch order; degenerate records are skipped and the stream
// wraps around at the end of each epoch.
class ObjectiveStream {
 public:
  ObjectiveStream(Objective objective, const ParallelCorpus& corpus,
                  const Vocabulary& vocab, StreamOptions options);

  TrainingExample next();

  Objective objective() const { return objective_; }
  std::uint64_t epoch() const { return epoch_; }
  std::size_t num_records() const { return records_.size(); }

 private:
  struct Record {
    const ParallelDocPair* pair;
    std::size_t sentence;
  };

  void start_epoch();
  std::optional<TrainingExample> build(const Record& record);

  Objective objective_;
  const Vocabulary* vocab_;
  StreamOptions options_;
  std::vector<Record> records_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::uint64_t epoch_ = 0;
};

using StreamSet = std::map<Objective, ObjectiveStream>;

StreamSet make_streams(const MixtureSchedule& schedule,
                       const ParallelCorpus& corpus, const Vocabulary& vocab,
                       const StreamOptions& options);

// Picks the stage for global_step, samples an objective by the stage
// weights and pulls from that objective's stream.
TrainingExample next_example(const MixtureSchedule& schedule, StreamSet& streams,
                             std::int64_t global_step, Rng& rng);

// Prefix, source, target documents for a finetuning task.
struct TaskExample {
  Task task = Task::Translate;
  Document source;
  Document target;
};

TaskExample make_translation_task(const ParallelDocPair& pair);
// Target = first min(k, S) target sentences.
TaskExample make_toy_summary(const ParallelDocPair& pair, std::size_t k);
TrainingExample encode_task_example(const TaskExample& task,
                                    const Vocabulary& vocab,
                                    const LanguageNames& names);

using TokenMatrix =
    Eigen::Matrix<TokenId, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Rows padded with PAD to the batch maximum; true lengths recorded.
struct Batch {
  TokenMatrix inputs;
  TokenMatrix targets;
  std::vector<std::size_t> input_lengths;
  std::vector<std::size_t> target_lengths;
  std::vector<Objective> objectives;

  std::size_t size() const { return input_lengths.size(); }
  std::span<const TokenId> input(std::size_t i) const {
    return {inputs.row(static_cast<Eigen::Index>(i)).data(), input_lengths[i]};
  }
  std::span<const TokenId> target(std::size_t i) const {
    return {targets.row(static_cast<Eigen::Index>(i)).data(), target_lengths[i]};
  }
  // 1 where a target position counts towards the loss.
  Eigen::MatrixXf loss_mask() const;
};

// Keeps the head and forces a trailing EOS.
std::vector<TokenId> truncate_with_eos(std::span<const TokenId> ids,
                                       std::size_t max_len);

// Trailing PADs are dropped before truncation, so they never reach the loss.
Batch make_batch(const std::vector<TrainingExample>& examples,
                 std::size_t max_input_len, std::size_t max_target_len);

Batch pack_batch(const std::function<TrainingExample()>& stream,
                 std::size_t batch_size, std::size_t max_input_len,
                 std::size_t max_target_len);

struct BatchingOptions {
  std::size_t batch_size = 8;
  std::size_t max_input_len = 256;
  std::size_t max_target_len = 256;
};

// Batches for consecutive training steps drawn from a mixture schedule.
// Step n (1-based) uses schedule position n - 1; objective choices are
// seeded per (seed, step, slot), so a stream skipped to step n yields the
// same batches as one that produced steps 1..n-1 first.
class BatchStream {
 public:
  BatchStream(MixtureSchedule schedule, const ParallelCorpus& corpus,
              const Vocabulary& vocab, StreamOptions options,
              BatchingOptions batching, std::uint64_t seed);

  Batch next();
  void skip(std::int64_t steps);
  // Step number of the batch the next call to next() returns.
  std::int64_t next_step() const { return step_ + 1; }

 private:
  std::vector<TrainingExample> draw();

  MixtureSchedule schedule_;
  StreamSet streams_;
  BatchingOptions batching_;
  std::uint64_t seed_;
  std::int64_t step_ = 0;
};

}  // namespace docforge

#endif  // DOCFORGE_PIPELINE_HPP_
