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

// One PASS/FAIL line per acceptance criterion. Criteria 6, 7 and 10 run the
// shipped experiment configs end to end under ./acceptance_runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "docforge/config.hpp"
#include "docforge/corpus.hpp"
#include "docforge/corruption.hpp"
#include "docforge/decode.hpp"
#include "docforge/eval.hpp"
#include "docforge/experiment.hpp"
#include "docforge/model.hpp"
#include "docforge/optim.hpp"
#include "docforge/pipeline.hpp"
#include "docforge/synth.hpp"
#include "helpers.hpp"

using namespace docforge;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << name << " ("
            << o.detail << ")" << std::endl;
}

// Input sentinels stand for one or more hidden tokens; every visible run
// must appear in `stream` in order, separated by at least one token.
bool consistent_with(const std::vector<TokenId>& input, const std::vector<TokenId>& stream,
                     const Vocabulary& vocab) {
  std::vector<std::vector<TokenId>> runs(1);
  for (TokenId t : input) {
    if (t == kEosId) break;
    if (vocab.is_sentinel(t)) {
      runs.emplace_back();
    } else {
      runs.back().push_back(t);
    }
  }
  if (runs.size() == 1) return runs[0] == stream;
  const auto& head = runs.front();
  const auto& tail = runs.back();
  if (head.size() + tail.size() + runs.size() - 1 > stream.size()) return false;
  if (!std::equal(head.begin(), head.end(), stream.begin())) return false;
  std::size_t pos = head.size();
  for (std::size_t r = 1; r + 1 < runs.size(); ++r) {
    const auto from = stream.begin() + static_cast<std::ptrdiff_t>(std::min(pos + 1, stream.size()));
    const auto it = std::search(from, stream.end(), runs[r].begin(), runs[r].end());
    if (it == stream.end() && !runs[r].empty()) return false;
    pos = static_cast<std::size_t>(it - stream.begin()) + runs[r].size();
  }
  const std::size_t tail_start = stream.size() - tail.size();
  return tail_start >= pos + 1 &&
         std::equal(tail.begin(), tail.end(), stream.begin() + static_cast<std::ptrdiff_t>(tail_start));
}

Outcome noise_statistics() {
  const auto t0 = Clock::now();
  const CorruptionConfig cfg;
  Rng rng(20240601);
  double masked = 0, spans = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    for (const auto& s : sample_spans(200, cfg, rng).spans) {
      masked += static_cast<double>(s.length);
      spans += 1;
    }
  }
  const double rate = masked / (200.0 * draws);
  const double mean_len = masked / spans;
  const double secs = seconds_since(t0);
  return {rate >= 0.14 && rate <= 0.16 && mean_len >= 2.8 && mean_len <= 3.2 && secs < 10,
          "mask rate " + fmt("%.4f", rate) + ", mean span " + fmt("%.3f", mean_len) + ", " +
              fmt("%.2f", secs) + " s"};
}

Outcome reordering_soundness() {
  const auto t0 = Clock::now();
  const auto world = testing::make_world(500, 30, 100);
  const CorruptionConfig cfg;
  std::size_t checked = 0, bad = 0;
  for (const auto* p : world.corpus.all()) {
    for (Objective o : {Objective::Dr, Objective::DrMT}) {
      Rng rng(example_seed(77, p->pair_id, o));
      const auto ex = o == Objective::Dr ? make_dr(p->src, world.vocab, cfg, rng)
                                         : make_drmt(*p, world.vocab, cfg, rng);
      ++checked;
      if (!ex || !ex->permutation) {
        ++bad;
        continue;
      }
      const auto& perm = *ex->permutation;
      Document shuffled = p->src;
      for (std::size_t i = 0; i < perm.size(); ++i) shuffled.sentences[i] = p->src.sentences[perm[i]];
      bool ok = unshuffle_sentences(shuffled, perm) == p->src;
      ok = ok && consistent_with(ex->input_ids, document_tokens(shuffled, world.vocab), world.vocab);
      const auto& want = o == Objective::Dr ? p->src : p->tgt;
      ok = ok && ex->target_ids == world.vocab.encode(want.text());
      bad += !ok;
    }
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && checked >= 1000 && secs < 5,
          std::to_string(checked) + " examples, " + std::to_string(bad) + " mismatches, " +
              fmt("%.2f", secs) + " s"};
}

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
      const double err =
          std::abs(g[i] - numeric) / std::max({std::abs(g[i]), std::abs(numeric), 1e-5});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

Outcome gradient_check() {
  const auto t0 = Clock::now();
  Rng rng(31);
  double worst = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    ModelConfig cfg = testing::tiny_config(20);
    cfg.seed = 500 + static_cast<std::uint64_t>(trial);
    auto params = init_params<double>(cfg);
    std::vector<TrainingExample> exs;
    exs.push_back(testing::random_example(rng, 5 + trial, 4, 3, 20));
    exs.push_back(testing::random_example(rng, 3, 2 + trial, 3, 20));
    worst = std::max(worst, max_gradient_error(params, make_batch(exs, 64, 64)));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-3 && secs < 30,
          "max relative error " + fmt("%.2e", worst) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome schedule_exactness() {
  const double base = 0.01;
  const auto s = LrSchedule::inverse_sqrt(base);
  const auto c = LrSchedule::constant(0.001);
  bool ok = s.rate(1) == base && std::abs(s.rate(4) - base / 2) < 1e-15 &&
            std::abs(s.rate(100) - base / 10) < 1e-15;
  for (std::int64_t n : {1, 2, 100, 2000, 1000000}) ok = ok && c.rate(n) == 0.001;
  return {ok, "lr(1)=" + fmt("%g", s.rate(1)) + " lr(4)=" + fmt("%g", s.rate(4)) +
                  " lr(100)=" + fmt("%g", s.rate(100)) + " constant=" + fmt("%g", c.rate(7))};
}

Outcome metric_oracles() {
  const auto world = testing::make_world(50);
  std::vector<std::string> refs;
  for (const auto* p : world.corpus.all()) refs.push_back(p->tgt.text());
  const double identity = d_bleu(refs, refs).score;
  const double hand = d_bleu(std::vector<std::string>{"a b c d"},
                             std::vector<std::string>{"a b c d e"}).score;
  const double rl = rouge({"a", "c"}, {"a", "b", "c"}, RougeVariant::RL).score;
  const bool ok = std::abs(identity - 100.0) < 1e-9 && std::abs(hand - 77.88) < 0.01 &&
                  std::abs(rl - 80.0) < 0.1;
  return {ok, "identity " + fmt("%.4f", identity) + ", hand case " + fmt("%.4f", hand) +
                  ", ROUGE-L hand case " + fmt("%.4f", rl)};
}

Outcome mixture_ratio(const fs::path& experiments) {
  const auto world = testing::make_world(40);
  MixtureSchedule half =
      schedule_from(Config::load((experiments / "pretrain_dr_drmt_mix.conf").string()));
  half.stages[0].steps = 10000;
  StreamSet streams = make_streams(half, world.corpus, world.vocab, {});
  Rng rng(8);
  int drmt = 0;
  for (int i = 0; i < 10000; ++i) drmt += next_example(half, streams, i, rng).objective == Objective::DrMT;
  const double frac = drmt / 10000.0;

  const auto staged =
      schedule_from(Config::load((experiments / "pretrain_dr_then_drmt.conf").string()));
  const std::int64_t boundary = staged.stages.at(0).steps;
  StreamSet staged_streams = make_streams(staged, world.corpus, world.vocab, {});
  bool hard = true;
  for (std::int64_t step = 0; step < staged.total_steps(); ++step) {
    const auto o = next_example(staged, staged_streams, step, rng).objective;
    hard = hard && o == (step < boundary ? Objective::Dr : Objective::DrMT);
  }
  return {std::abs(frac - 0.5) <= 0.02 && hard,
          "DrMT fraction " + fmt("%.4f", frac) + ", staged boundary at step " +
              std::to_string(boundary) + (hard ? " exact" : " violated")};
}

Outcome chunked_decoding() {
  const auto lang = make_language("xx", 60, 4, 5);
  const auto key = make_cipher_key(lang, "yy", 6);
  const auto docs = generate_documents(lang, {90, 110, 4, 7}, 6, "long", 7);
  std::vector<std::string> texts;
  for (const auto& d : docs) {
    texts.push_back(d.text());
    texts.push_back(cipher_translate(d, key).text());
  }
  const auto vocab =
      Vocabulary::build(texts, 1, 100000, 100, {"Translate", "xx", "to", "yy", ":"});
  const auto prefix = vocab.encode_words("Translate xx to yy :");
  const auto cipher = cipher_decoder(key, vocab, prefix.size());
  std::size_t max_input = 0, chunks = 0;
  std::vector<std::size_t> seen;
  const ChunkDecoder dec = [&](std::span<const TokenId> in) {
    seen.push_back(in.size());
    return cipher(in);
  };
  bool ok = true;
  for (const auto& d : docs) {
    seen.clear();
    const auto r = translate_document(dec, d, vocab, {}, "yy");
    std::vector<std::string> joined;
    for (const auto& c : r.chunks) joined.insert(joined.end(), c.sentences.begin(), c.sentences.end());
    std::string concat;
    for (const auto& s : r.chunk_outputs) concat += (concat.empty() ? "" : " ") + s;
    for (std::size_t n : seen) max_input = std::max(max_input, n);
    chunks += r.chunks.size();
    ok = ok && r.chunks.size() >= 2 && seen.size() == r.chunks.size() && joined == d.sentences &&
         r.document.text() == concat &&
         cipher_translate(r.document, key.inverse()).sentences == d.sentences;
  }
  ok = ok && max_input <= 512;
  return {ok, std::to_string(docs.size()) + " documents, " + std::to_string(chunks) +
                  " chunks, longest chunk input " + std::to_string(max_input) + " tokens"};
}

// Criterion 6 pipeline rooted at `root`; returns the four scores.
struct ArmScores {
  double drmt_zero = 0, dr_zero = 0, drmt_ft = 0, dr_ft = 0, scratch_ft = 0, seconds = 0;
};

double read_score(const fs::path& tsv) {
  std::ifstream in(tsv);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  std::istringstream cols(row);
  std::string metric, score;
  std::getline(cols, metric, '\t');
  std::getline(cols, score, '\t');
  return std::stod(score);
}

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

ArmScores run_pipeline(const fs::path& experiments, const fs::path& root) {
  const auto t0 = Clock::now();
  fs::remove_all(root);
  std::ostringstream sink;
  std::ofstream log(root.string() + ".log");
  const auto load = [&](const char* name, const fs::path& run) {
    auto c = Config::load((experiments / name).string());
    c.set("paths.data", quoted(root / "data"));
    c.set("paths.run", quoted(run));
    return c;
  };
  const auto eval_zero = [&](const fs::path& run) {
    auto c = load("base.conf", run);
    c.set("eval.checkpoint", quoted(run / "ckpt_002000.bin"));
    c.set("eval.output", "zero_finetune.tsv");
    c.set("eval.hyp_output", "zero_finetune_hyp.jsonl");
    run_command("evaluate", c, sink, log);
    return read_score(run / "zero_finetune.tsv");
  };
  const auto finetune_and_eval = [&](const char* conf, const fs::path& run, bool pretrained) {
    auto c = load(conf, run);
    if (pretrained) c.set("finetune.init", quoted(run / "ckpt_002000.bin"));
    run_command("finetune", c, sink, log);
    c.set("eval.checkpoint", quoted(run / "finetuned.bin"));
    c.set("eval.output", "finetuned.tsv");
    c.set("eval.hyp_output", "finetuned_hyp.jsonl");
    run_command("evaluate", c, sink, log);
    return read_score(run / "finetuned.tsv");
  };
  fs::create_directories(root);
  run_command("build-corpus", load("base.conf", root / "data"), sink, log);
  run_command("pretrain", load("pretrain_drmt.conf", root / "drmt"), sink, log);
  run_command("pretrain", load("pretrain_dr.conf", root / "dr"), sink, log);
  ArmScores s;
  s.drmt_zero = eval_zero(root / "drmt");
  s.dr_zero = eval_zero(root / "dr");
  s.drmt_ft = finetune_and_eval("finetune.conf", root / "drmt", true);
  s.dr_ft = finetune_and_eval("finetune.conf", root / "dr", true);
  s.scratch_ft = finetune_and_eval("scratch.conf", root / "scratch", false);
  s.seconds = seconds_since(t0);
  return s;
}

std::vector<fs::path> files_under(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

int main() {
  const fs::path experiments = fs::path(DOCFORGE_SOURCE_DIR) / "experiments";
  const fs::path runs = fs::absolute("acceptance_runs");

  report(1, "noise statistics", noise_statistics);
  report(2, "reordering soundness", reordering_soundness);
  report(3, "gradient check", gradient_check);
  report(4, "schedule exactness", schedule_exactness);
  report(5, "metric oracles", metric_oracles);

  ArmScores first, second;
  bool first_ok = false, second_ok = false;
  std::string pipeline_error;
  try {
    first = run_pipeline(experiments, runs / "first");
    first_ok = true;
    second = run_pipeline(experiments, runs / "second");
    second_ok = true;
  } catch (const std::exception& e) {
    pipeline_error = e.what();
  }

  report(6, "directional DrMT benefit", [&]() -> Outcome {
    if (!first_ok) return {false, "pipeline failed: " + pipeline_error};
    const bool ok = first.drmt_ft >= first.scratch_ft + 5 && first.drmt_ft >= first.dr_ft &&
                    first.seconds < 15 * 60;
    return {ok, "finetuned d-BLEU: DrMT " + fmt("%.2f", first.drmt_ft) + ", scratch " +
                    fmt("%.2f", first.scratch_ft) + ", Dr " + fmt("%.2f", first.dr_ft) + "; " +
                    fmt("%.0f", first.seconds) + " s"};
  });
  report(7, "translation without finetuning", [&]() -> Outcome {
    if (!first_ok) return {false, "pipeline failed: " + pipeline_error};
    return {first.drmt_zero > 20 && first.dr_zero < 2,
            "zero-finetune d-BLEU: DrMT " + fmt("%.2f", first.drmt_zero) + ", Dr " +
                fmt("%.2f", first.dr_zero)};
  });

  report(8, "mixture ratio", [&] { return mixture_ratio(experiments); });
  report(9, "chunked decoding contract", chunked_decoding);

  report(10, "end-to-end determinism", [&]() -> Outcome {
    if (!second_ok) return {false, "pipeline failed: " + pipeline_error};
    const auto a = files_under(runs / "first");
    const auto b = files_under(runs / "second");
    if (a != b) return {false, "runs produced different file sets"};
    std::size_t checkpoints = 0, tsvs = 0;
    for (const auto& rel : a) {
      if (slurp(runs / "first" / rel) != slurp(runs / "second" / rel)) {
        return {false, rel.string() + " differs"};
      }
      checkpoints += rel.extension() == ".bin";
      tsvs += rel.extension() == ".tsv";
    }
    return {checkpoints > 0 && tsvs > 0,
            std::to_string(a.size()) + " files identical (" + std::to_string(checkpoints) +
                " checkpoints, " + std::to_string(tsvs) + " TSVs)"};
  });

  return failures == 0 ? 0 : 1;
}
