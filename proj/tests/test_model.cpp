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

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "docforge/errors.hpp"
#include "docforge/model.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace docforge;
using docforge::testing::random_example;
using docforge::testing::tiny_config;

namespace {

// Central differences over every parameter, compared entrywise.
double max_gradient_error(ModelParams<double>& params, const Batch& batch) {
  const ModelParams<double> analytic = grad(params, batch);
  auto refs = params.tensors();
  auto grefs = analytic.tensors();
  const double eps = 1e-4;
  double worst = 0.0;
  for (std::size_t k = 0; k < refs.size(); ++k) {
    double* t = refs[k].data;
    const double* g = grefs[k].data;
    for (Eigen::Index i = 0; i < refs[k].size; ++i) {
      const double saved = t[i];
      t[i] = saved + eps;
      const double up = forward_loss(params, batch).loss;
      t[i] = saved - eps;
      const double down = forward_loss(params, batch).loss;
      t[i] = saved;
      const double numeric = (up - down) / (2 * eps);
      const double a = g[i];
      const double err = std::abs(a - numeric) /
                         std::max({std::abs(a), std::abs(numeric), 1e-5});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

std::vector<TokenId> prefix(const std::vector<TokenId>& v, std::size_t n) {
  return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(11);
  for (int trial = 0; trial < 3; ++trial) {
    ModelConfig cfg = tiny_config();
    cfg.seed = 100 + static_cast<std::uint64_t>(trial);
    cfg.tie_embeddings = trial != 2;
    auto params = init_params<double>(cfg);
    std::vector<TrainingExample> exs;
    exs.push_back(random_example(rng, 4 + trial, 3 + trial, 3, 20));
    exs.push_back(random_example(rng, 6, 2, 3, 20));
    const Batch batch = make_batch(exs, 64, 64);
    CHECK(max_gradient_error(params, batch) < 1e-3);
  }
}

TEST_CASE("initial loss is near log vocab size") {
  ModelConfig cfg;
  cfg.vocab_size = 100;
  cfg.dropout_rate = 0.0;
  cfg.seed = 3;
  const auto params = init_params<float>(cfg);
  Rng rng(5);
  std::vector<TrainingExample> exs;
  for (int i = 0; i < 8; ++i) exs.push_back(random_example(rng, 20, 20, 4, 100));
  const double loss = forward_loss(params, make_batch(exs, 64, 64)).loss;
  CHECK(std::abs(loss - std::log(100.0)) < 0.05 * std::log(100.0));
}

TEST_CASE("head count must divide the model width") {
  ModelConfig cfg = tiny_config();
  cfg.d_model = 6;
  cfg.n_heads = 4;
  CHECK_THROWS_AS(init_params<float>(cfg), ConfigError);
}

TEST_CASE("same seed gives identical parameters") {
  const auto a = init_params<float>(tiny_config());
  const auto b = init_params<float>(tiny_config());
  const auto ta = a.tensors();
  const auto tb = b.tensors();
  REQUIRE(ta.size() == tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    CHECK(ta[i].name == tb[i].name);
    REQUIRE(ta[i].size == tb[i].size);
    CHECK(std::equal(ta[i].data, ta[i].data + ta[i].size, tb[i].data));
  }
  ModelConfig other = tiny_config();
  other.seed = 8;
  CHECK_FALSE(init_params<float>(other).embedding == a.embedding);
}

TEST_CASE("trailing pad in the target leaves the loss unchanged") {
  const auto params = init_params<double>(tiny_config());
  Rng rng(2);
  TrainingExample ex = random_example(rng, 5, 4, 3, 20);
  const double base = forward_loss(params, testing::single(ex)).loss;
  TrainingExample padded = ex;
  padded.target_ids.insert(padded.target_ids.end(), 3, kPadId);
  padded.input_ids.insert(padded.input_ids.end(), 2, kPadId);
  CHECK(forward_loss(params, testing::single(padded)).loss == base);

  // A wider neighbour only adds pad columns to this row.
  TrainingExample wide = random_example(rng, 9, 9, 3, 20);
  const auto both = forward_loss(params, make_batch({ex, wide}, 64, 64));
  const auto alone = forward_loss(params, testing::single(ex));
  REQUIRE(both.token_log_probs[0].size() == alone.token_log_probs[0].size());
  for (std::size_t t = 0; t < alone.token_log_probs[0].size(); ++t) {
    CHECK(both.token_log_probs[0][t] == doctest::Approx(alone.token_log_probs[0][t]).epsilon(1e-12));
  }
}

TEST_CASE("duplicated examples get identical losses") {
  const auto params = init_params<double>(tiny_config());
  Rng rng(12);
  const TrainingExample ex = random_example(rng, 5, 6, 3, 20);
  const TrainingExample other = random_example(rng, 8, 3, 3, 20);
  const auto out = forward_loss(params, make_batch({ex, other, ex}, 64, 64));
  CHECK(out.token_log_probs[0] == out.token_log_probs[2]);
  CHECK(out.num_tokens == 7 + 4 + 7);
}

TEST_CASE("empty targets contribute nothing") {
  const auto params = init_params<double>(tiny_config());
  Rng rng(4);
  TrainingExample ex = random_example(rng, 5, 4, 3, 20);
  TrainingExample empty = random_example(rng, 5, 0, 3, 20);
  empty.target_ids.assign(4, kPadId);
  const double alone = forward_loss(params, testing::single(ex)).loss;
  const double mixed = forward_loss(params, make_batch({empty, ex}, 64, 64)).loss;
  CHECK(mixed == doctest::Approx(alone).epsilon(1e-12));

  const Batch only_empty = testing::single(empty);
  ModelParams<double> g;
  const auto out = loss_and_grad(params, only_empty, g);
  CHECK(out.num_tokens == 0);
  CHECK(out.loss == 0.0);
  for (const auto& t : g.tensors()) {
    CHECK(std::all_of(t.data, t.data + t.size, [](double x) { return x == 0.0; }));
  }
}

TEST_CASE("unused sentinel input embeddings receive no gradient") {
  ModelConfig cfg = tiny_config(40);
  cfg.tie_embeddings = false;
  const auto params = init_params<double>(cfg);
  Rng rng(9);
  // Sentinels occupy ids 4..13 here; the batch only uses ids 14 and up.
  std::vector<TrainingExample> exs{random_example(rng, 6, 5, 14, 40),
                                   random_example(rng, 3, 7, 14, 40)};
  const auto g = grad(params, make_batch(exs, 64, 64));
  for (TokenId id = 4; id < 14; ++id) CHECK(g.embedding.row(id).isZero(0.0));
  CHECK_FALSE(g.output.row(4).isZero(0.0));
  CHECK_FALSE(g.embedding.row(exs[0].input_ids[0]).isZero(0.0));
}

TEST_CASE("decoder position t never sees later target tokens") {
  const auto params = init_params<double>(tiny_config());
  Rng rng(6);
  const TrainingExample ex = random_example(rng, 6, 7, 3, 20);
  const auto base = decoder_logits(params, ex.input_ids, ex.target_ids);
  for (std::size_t t = 0; t < ex.target_ids.size(); ++t) {
    auto changed = ex.target_ids;
    changed[t] = changed[t] == 5 ? 6 : 5;
    const auto logits = decoder_logits(params, ex.input_ids, changed);
    const auto rows = static_cast<Eigen::Index>(t + 1);
    CHECK(logits.topRows(rows) == base.topRows(rows));
    if (t + 1 < ex.target_ids.size()) {
      CHECK_FALSE(logits.row(rows) == base.row(rows));
    }
  }
}

TEST_CASE("greedy decode matches full recomputation") {
  ModelConfig cfg = tiny_config();
  cfg.seed = 21;
  const auto params = init_params<double>(cfg);
  Rng rng(8);
  for (int trial = 0; trial < 4; ++trial) {
    const auto input = testing::random_ids(rng, 5 + trial, 3, 20);
    const auto out = greedy_decode(params, input, 12);
    REQUIRE(!out.empty());
    CHECK(out.size() <= 12);
    if (out.size() < 12) CHECK(out.back() == kEosId);
    const auto logits = decoder_logits(params, input, out);
    for (std::size_t t = 0; t < out.size(); ++t) {
      Eigen::Index best = 0;
      for (Eigen::Index v = 1; v < logits.cols(); ++v) {
        if (logits(static_cast<Eigen::Index>(t), v) > logits(static_cast<Eigen::Index>(t), best)) best = v;
      }
      CHECK(best == out[t]);
    }
    CHECK(greedy_decode(params, input, 12) == out);
    CHECK(greedy_decode(params, input, 1) == prefix(out, 1));
  }
}

TEST_CASE("dropout is reproducible from its seed") {
  ModelConfig cfg = tiny_config();
  const auto params = init_params<double>(cfg);
  Rng rng(1);
  const Batch b = testing::single(random_example(rng, 6, 6, 3, 20));
  ForwardOptions opts{0.3, 42};
  const double a = forward_loss(params, b, opts).loss;
  CHECK(forward_loss(params, b, opts).loss == a);
  opts.dropout_seed = 43;
  CHECK(forward_loss(params, b, opts).loss != a);
  CHECK(forward_loss(params, b).loss != a);
}

TEST_CASE("gradient with dropout matches central differences") {
  ModelConfig cfg = tiny_config(12);
  cfg.d_model = 8;
  cfg.d_ff = 12;
  auto params = init_params<double>(cfg);
  Rng rng(13);
  const Batch b = testing::single(random_example(rng, 4, 3, 3, 12));
  const ForwardOptions opts{0.25, 77};
  const auto analytic = grad(params, b, opts);
  auto refs = params.tensors();
  auto grefs = analytic.tensors();
  double worst = 0.0;
  for (std::size_t k = 0; k < refs.size(); ++k) {
    double* t = refs[k].data;
    for (Eigen::Index i = 0; i < refs[k].size; ++i) {
      const double saved = t[i];
      t[i] = saved + 1e-4;
      const double up = forward_loss(params, b, opts).loss;
      t[i] = saved - 1e-4;
      const double down = forward_loss(params, b, opts).loss;
      t[i] = saved;
      const double n = (up - down) / 2e-4;
      const double a = grefs[k].data[i];
      worst = std::max(worst, std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-5}));
    }
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("non-finite parameters raise a numeric error") {
  auto params = init_params<float>(tiny_config());
  params.embedding(5, 0) = std::numeric_limits<float>::quiet_NaN();
  TrainingExample ex;
  ex.input_ids = {5, kEosId};
  ex.target_ids = {6, kEosId};
  CHECK_THROWS_AS(forward_loss(params, testing::single(ex)), NumericError);
}

}  // TEST_SUITE
