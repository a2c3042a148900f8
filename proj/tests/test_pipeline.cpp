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

#include <map>
#include <string>
#include <vector>

#include "docforge/errors.hpp"
#include "docforge/pipeline.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace docforge;

namespace {

// A vocabulary where w0..w699 are single tokens.
Vocabulary numbered(std::size_t n) {
  std::vector<std::string> words;
  for (std::size_t i = 0; i < n; ++i) words.push_back("w" + std::to_string(i));
  return Vocabulary::build({join_words(words)}, 1, 100000, 10);
}

std::string sentence(std::size_t from, std::size_t count) {
  std::vector<std::string> words;
  for (std::size_t i = 0; i < count; ++i) words.push_back("w" + std::to_string(from + i));
  return join_words(words);
}

MixtureSchedule two_stage() {
  MixtureSchedule s;
  s.stages.push_back({100, {{Objective::Dr, 1.0}}});
  s.stages.push_back({100, {{Objective::DrMT, 1.0}}});
  return s;
}

TrainingExample of_length(std::size_t in, std::size_t tgt) {
  Rng rng(in * 31 + tgt);
  return testing::random_example(rng, in - 1, tgt - 1, 20, 30);
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("prefixes") {
  CHECK(make_prefix(Task::Translate, "German", "English") == "Translate German to English :");
  CHECK(make_prefix(Task::Summarize, "Spanish", "English") == "Summarize Spanish to English :");
  CHECK_THROWS_AS(make_prefix(Task::Translate, "", "English"), ContractError);
  const LanguageNames names(std::map<std::string, std::string>{{"xx", "Xish"}});
  CHECK(names.name("xx") == "Xish");
  CHECK(names.name("yy") == "yy");
}

TEST_CASE("prefix tokens are never masked") {
  const auto world = testing::make_world(30);
  StreamOptions opts;
  opts.names = LanguageNames({{"xx", "xx"}, {"yy", "yy"}});
  ObjectiveStream stream(Objective::DrMT, world.corpus, world.vocab, opts);
  const auto prefix = world.vocab.encode_words("Translate xx to yy :");
  for (int i = 0; i < 100; ++i) {
    const auto ex = stream.next();
    REQUIRE(ex.input_ids.size() > prefix.size());
    CHECK(std::equal(prefix.begin(), prefix.end(), ex.input_ids.begin()));
    CHECK_FALSE(world.vocab.is_sentinel(ex.input_ids[prefix.size() - 1]));
  }
  StreamOptions bare = opts;
  bare.translation_prefix = false;
  ObjectiveStream plain(Objective::DocNMT, world.corpus, world.vocab, bare);
  const auto ex = plain.next();
  CHECK(ex.input_ids.front() != prefix.front());
}

TEST_CASE("chunking") {
  const auto v = numbered(700);
  const Document small{"d", "xx", {sentence(0, 20), sentence(20, 19)}};
  const auto one = chunk_document(small, v, 512);
  REQUIRE(one.size() == 1);
  CHECK(one[0].sentences == small.sentences);

  const Document big{"d", "xx", {sentence(0, 300), sentence(300, 300)}};
  const auto two = chunk_document(big, v, 512);
  REQUIRE(two.size() == 2);
  CHECK(two[0].sentences == std::vector<std::string>{big.sentences[0]});
  CHECK(two[1].sentences == std::vector<std::string>{big.sentences[1]});
  CHECK_FALSE(two[0].hard_split);

  // Exactly full: 511 tokens + EOS.
  const Document tight{"d", "xx", {sentence(0, 500), sentence(500, 11)}};
  CHECK(chunk_document(tight, v, 512).size() == 1);
  CHECK(chunk_document(tight, v, 512, 1).size() == 2);
}

TEST_CASE("chunks partition the document and respect the budget") {
  const auto v = numbered(700);
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    Document d{"d", "xx", {}};
    const std::size_t n = 1 + rng.uniform(12);
    for (std::size_t i = 0; i < n; ++i) d.sentences.push_back(sentence(i, 1 + rng.uniform(40)));
    const std::size_t max_len = 8 + rng.uniform(80);
    const std::size_t prefix_len = rng.uniform(5);
    const auto chunks = chunk_document(d, v, max_len, prefix_len);
    std::vector<std::string> joined;
    bool hard = false;
    for (const auto& c : chunks) {
      std::size_t len = prefix_len + 1;
      for (const auto& s : c.sentences) len += v.encode_words(s).size();
      CHECK(len <= max_len);
      hard = hard || c.hard_split;
      joined.insert(joined.end(), c.sentences.begin(), c.sentences.end());
    }
    if (!hard) {
      CHECK(joined == d.sentences);
    } else {
      CHECK(join_words(joined) == join_words(d.sentences));
    }
  }
}

TEST_CASE("oversized sentences are hard split") {
  const auto v = numbered(700);
  const Document d{"d", "xx", {sentence(0, 3), sentence(3, 25), sentence(28, 2)}};
  const auto chunks = chunk_document(d, v, 11);
  REQUIRE(chunks.size() == 5);
  CHECK_FALSE(chunks[0].hard_split);
  CHECK(chunks[1].hard_split);
  CHECK(chunks[1].sentences[0] == sentence(3, 10));
  CHECK(chunks[3].sentences[0] == sentence(23, 5));
  CHECK_FALSE(chunks[4].hard_split);
  CHECK_THROWS_AS(chunk_document(d, v, 4, 3), ContractError);
}

TEST_CASE("single objective stream") {
  const auto world = testing::make_world(12);
  StreamSet streams = make_streams(MixtureSchedule::single(Objective::DrMT, 10),
                                   world.corpus, world.vocab, {});
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    CHECK(next_example(MixtureSchedule::single(Objective::DrMT, 10), streams, i, rng)
              .objective == Objective::DrMT);
  }
}

TEST_CASE("mixture ratio") {
  const auto world = testing::make_world(20);
  MixtureSchedule half;
  half.stages.push_back({10000, {{Objective::Dr, 0.5}, {Objective::DrMT, 0.5}}});
  StreamSet streams = make_streams(half, world.corpus, world.vocab, {});
  Rng rng(99);
  int drmt = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    drmt += next_example(half, streams, i, rng).objective == Objective::DrMT;
  }
  CHECK(static_cast<double>(drmt) / draws == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("stage boundaries") {
  const auto s = two_stage();
  CHECK(s.stage_index(0) == 0);
  CHECK(s.stage_index(99) == 0);
  CHECK(s.stage_index(100) == 1);
  CHECK(s.stage_index(500) == 1);
  CHECK(s.total_steps() == 200);

  const auto world = testing::make_world(12);
  StreamSet streams = make_streams(s, world.corpus, world.vocab, {});
  Rng rng(1);
  for (std::int64_t step = 0; step < 200; ++step) {
    const auto o = next_example(s, streams, step, rng).objective;
    CHECK(o == (step < 100 ? Objective::Dr : Objective::DrMT));
  }
}

TEST_CASE("schedule validation") {
  MixtureSchedule s;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.stages.push_back({10, {{Objective::Dr, 0.5}, {Objective::DrMT, 0.4}}});
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.stages[0].mix[1].second = 0.5;
  CHECK_NOTHROW(s.validate());
  s.stages[0].steps = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("streams wrap around at epoch end") {
  const auto world = testing::make_world(5);
  ObjectiveStream stream(Objective::Dr, world.corpus, world.vocab, {});
  std::map<std::string, int> seen;
  for (int i = 0; i < 5; ++i) ++seen[stream.next().source_id];
  CHECK(seen.size() == 5);
  CHECK(stream.epoch() == 0);
  const auto again = stream.next();
  CHECK(stream.epoch() == 1);
  CHECK(seen.count(again.source_id) == 1);

  ObjectiveStream sent(Objective::SenTLM, world.corpus, world.vocab, {});
  std::size_t total = 0;
  for (const auto* p : world.corpus.all()) total += p->src.sentences.size();
  CHECK(sent.num_records() == total);
}

TEST_CASE("streams are deterministic") {
  const auto world = testing::make_world(10);
  ObjectiveStream a(Objective::DocTLM, world.corpus, world.vocab, {});
  ObjectiveStream b(Objective::DocTLM, world.corpus, world.vocab, {});
  for (int i = 0; i < 25; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("batch packing") {
  const std::vector<TrainingExample> three{of_length(5, 3), of_length(2, 7), of_length(4, 4)};
  std::size_t i = 0;
  const Batch b = pack_batch([&] { return three[i++]; }, 3, 1024, 1024);
  CHECK(b.size() == 3);
  CHECK(b.inputs.rows() == 3);
  CHECK(b.inputs.cols() == 5);
  CHECK(b.targets.cols() == 7);
  CHECK(b.input_lengths == std::vector<std::size_t>{5, 2, 4});
  CHECK(b.target_lengths == std::vector<std::size_t>{3, 7, 4});
  CHECK(b.inputs(1, 2) == kPadId);
  CHECK(std::vector<TokenId>(b.input(0).begin(), b.input(0).end()) == three[0].input_ids);

  const auto mask = b.loss_mask();
  CHECK(mask.sum() == 14.0f);
  CHECK(mask(0, 2) == 1.0f);
  CHECK(mask(0, 3) == 0.0f);
  CHECK(mask(1, 6) == 1.0f);
  for (Eigen::Index r = 0; r < b.targets.rows(); ++r) {
    for (Eigen::Index c = 0; c < b.targets.cols(); ++c) {
      if (b.targets(r, c) == kPadId) CHECK(mask(r, c) == 0.0f);
    }
  }
  CHECK_THROWS_AS(pack_batch([&] { return three[0]; }, 0, 10, 10), ContractError);
}

TEST_CASE("truncation keeps the head and ends in EOS") {
  const auto long_ex = of_length(1030, 1030);
  const Batch b = make_batch({long_ex}, 1024, 1024);
  CHECK(b.input_lengths[0] == 1024);
  CHECK(b.inputs(0, 1023) == kEosId);
  CHECK(b.inputs(0, 1022) == long_ex.input_ids[1022]);
  CHECK(b.target_lengths[0] == 1024);
  CHECK(b.targets(0, 1023) == kEosId);
  CHECK(truncate_with_eos(std::vector<TokenId>{5, 6, kEosId}, 8).size() == 3);
}

TEST_CASE("batch stream is reproducible and skippable") {
  const auto world = testing::make_world(15);
  const auto schedule = two_stage();
  BatchStream a(schedule, world.corpus, world.vocab, {}, {4, 128, 128}, 7);
  BatchStream b(schedule, world.corpus, world.vocab, {}, {4, 128, 128}, 7);
  std::vector<Batch> seq;
  for (int i = 0; i < 6; ++i) seq.push_back(a.next());
  b.skip(3);
  CHECK(b.next_step() == 4);
  const Batch fourth = b.next();
  CHECK(fourth.inputs == seq[3].inputs);
  CHECK(fourth.targets == seq[3].targets);
  CHECK(fourth.objectives == seq[3].objectives);
}

TEST_CASE("toy summaries") {
  const auto world = testing::make_world(10, 30, 10, {5, 5, 4, 7});
  const auto& pair = *world.corpus.all().front();
  REQUIRE(pair.tgt.sentences.size() == 5);
  const auto one = make_toy_summary(pair, 1);
  CHECK(one.task == Task::Summarize);
  CHECK(one.source == pair.src);
  CHECK(one.target.sentences == std::vector<std::string>{pair.tgt.sentences[0]});
  CHECK(make_toy_summary(pair, 10).target.sentences == pair.tgt.sentences);
  CHECK(one.target.lang != one.source.lang);
  CHECK_THROWS_AS(make_toy_summary(pair, 0), ContractError);

  const LanguageNames names;
  const auto ex = encode_task_example(one, world.vocab, names);
  CHECK(ex.objective == Objective::Summarize);
  const auto decoded = world.vocab.decode(ex.input_ids);
  CHECK(decoded.rfind("Summarize xx to yy : ", 0) == 0);
  CHECK(ex.target_ids == world.vocab.encode(pair.tgt.sentences[0]));

  const auto nmt = encode_task_example(make_translation_task(pair), world.vocab, names);
  CHECK(nmt.objective == Objective::DocNMT);
  CHECK(world.vocab.decode(nmt.input_ids).rfind("Translate", 0) == 0);
}

}  // TEST_SUITE
