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

#include "docforge/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <regex>
#include <sstream>

#include "docforge/checkpoint.hpp"
#include "docforge/corpus.hpp"
#include "docforge/corruption.hpp"
#include "docforge/decode.hpp"
#include "docforge/errors.hpp"
#include "docforge/eval.hpp"
#include "docforge/rng.hpp"
#include "docforge/synth.hpp"
#include "docforge/tokenizer.hpp"
#include "docforge/train.hpp"

namespace docforge {
namespace {

namespace fs = std::filesystem;
using Params = ModelParams<float>;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "seed", "paths.data", "paths.run", "stage",
      "synth.src_langs", "synth.tgt_lang", "synth.words", "synth.successors",
      "synth.train_docs", "synth.test_docs", "synth.min_sentences",
      "synth.max_sentences", "synth.min_words", "synth.max_words",
      "corpus.sample_n",
      "vocab.min_freq", "vocab.max_size", "vocab.sentinels",
      "model.d_model", "model.n_heads", "model.enc_layers", "model.dec_layers",
      "model.d_ff", "model.max_positions", "model.dropout",
      "model.tie_embeddings", "model.seed",
      "corruption.noise_density", "corruption.mean_span_len", "corruption.seed",
      "batch.size", "batch.max_input_len", "batch.max_target_len",
      "optim.schedule", "optim.lr", "optim.warmup", "optim.beta1",
      "optim.beta2", "optim.eps", "optim.clip",
      "train.objective", "train.steps", "train.max_steps", "train.seed",
      "train.log_every", "train.print_every", "train.checkpoint_every",
      "train.init", "train.resume", "train.prefix",
      "finetune.init", "finetune.task", "finetune.steps", "finetune.lr",
      "finetune.seed", "finetune.output", "finetune.summary_sentences",
      "finetune.checkpoint_every",
      "eval.checkpoint", "eval.set", "eval.task", "eval.max_docs",
      "eval.max_decode_len", "eval.chunk", "eval.hyp", "eval.hyp_output",
      "eval.output", "eval.summary_sentences",
      "translate.checkpoint", "translate.input", "translate.output",
      "translate.tgt_lang", "translate.max_decode_len", "translate.chunk",
      "examples.objective", "examples.count", "examples.output",
      "inspect.input", "inspect.n",
      "curve.dir", "curve.output"};
  return keys;
}


std::uint64_t base_seed(const Config& c) {
  return static_cast<std::uint64_t>(c.get_int("seed", 1));
}

std::size_t get_size(const Config& c, const std::string& key, std::int64_t fallback) {
  const auto v = c.get_int(key, fallback);
  if (v < 0) throw ConfigError(key + " must be non-negative");
  return static_cast<std::size_t>(v);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

fs::path data_dir(const Config& c) { return c.get_string("paths.data"); }

fs::path run_dir(const Config& c) {
  fs::path dir = c.get_string("paths.run");
  fs::create_directories(dir);
  return dir;
}

// Relative file names resolve inside `dir`.
std::string resolve(const fs::path& dir, const std::string& name) {
  fs::path p(name);
  return (p.is_relative() ? dir / p : p).string();
}

Vocabulary load_vocab(const Config& c) {
  return Vocabulary::load((data_dir(c) / "vocab.tsv").string());
}

Params load_params(const std::string& path) {
  return load_checkpoint<float>(path).params;
}

void check_vocab(const Params& p, const Vocabulary& vocab, const std::string& what) {
  if (static_cast<std::size_t>(p.config.vocab_size) != vocab.size()) {
    throw ConfigError(what + " has vocab_size " + std::to_string(p.config.vocab_size) +
                      " but the vocabulary has " + std::to_string(vocab.size()) +
                      " entries");
  }
}

AdamConfig adam_config(const Config& c) {
  AdamConfig a;
  a.beta1 = c.get_double("optim.beta1", a.beta1);
  a.beta2 = c.get_double("optim.beta2", a.beta2);
  a.epsilon = c.get_double("optim.eps", a.epsilon);
  a.clip_norm = c.get_double("optim.clip", a.clip_norm);
  return a;
}

StreamOptions stream_options(const Config& c) {
  StreamOptions o;
  o.corruption.noise_density = c.get_double("corruption.noise_density", 0.15);
  o.corruption.mean_span_len = c.get_double("corruption.mean_span_len", 3.0);
  o.corruption.seed = static_cast<std::uint64_t>(
      c.get_int("corruption.seed", static_cast<std::int64_t>(base_seed(c))));
  o.names = language_names(c);
  o.translation_prefix = c.get_bool("train.prefix", true);
  o.summary_sentences = get_size(c, "finetune.summary_sentences", 1);
  return o;
}

BatchingOptions batching(const Config& c) {
  BatchingOptions b;
  b.batch_size = get_size(c, "batch.size", 8);
  b.max_input_len = get_size(c, "batch.max_input_len", 256);
  b.max_target_len = get_size(c, "batch.max_target_len", 256);
  return b;
}

Task parse_task(const std::string& name) {
  if (name == "translate") return Task::Translate;
  if (name == "summarize") return Task::Summarize;
  throw ConfigError("unknown task '" + name + "' (expected translate or summarize)");
}

TrainOptions<float> train_options(const Config& c, std::ostream& log,
                                  const std::string& tag, std::int64_t steps) {
  TrainOptions<float> o;
  o.total_steps = steps;
  o.log_every = c.get_int("train.log_every", 10);
  const std::int64_t print_every = c.get_int("train.print_every", 100);
  o.on_log = [&log, tag, print_every](const LossPoint& p) {
    if (print_every > 0 && p.step % print_every == 0) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%s step %lld lr %.6g loss %.4f\n", tag.c_str(),
                    static_cast<long long>(p.step), p.lr, p.loss);
      log << buf << std::flush;
    }
  };
  return o;
}

struct Reference {
  Document source;
  Document target;
};

std::vector<Reference> references(const ParallelCorpus& test, Task task,
                                  std::size_t summary_sentences, std::size_t max_docs) {
  std::vector<Reference> refs;
  for (const auto* p : test.all()) {
    if (max_docs > 0 && refs.size() == max_docs) break;
    if (task == Task::Translate) {
      refs.push_back({p->src, p->tgt});
    } else {
      auto t = make_toy_summary(*p, summary_sentences);
      refs.push_back({t.source, t.target});
    }
  }
  return refs;
}

std::vector<EvalReport> score(Task task, const std::vector<Document>& hyps,
                              const std::vector<Reference>& refs) {
  std::vector<Tokens> h, r;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    h.push_back(split_words(hyps[i].text()));
    r.push_back(split_words(refs[i].target.text()));
  }
  if (task == Task::Translate) return {d_bleu(h, r)};
  return {corpus_rouge(h, r, RougeVariant::R1), corpus_rouge(h, r, RougeVariant::R2),
          corpus_rouge(h, r, RougeVariant::RL)};
}

std::vector<Document> decode_all(const Params& params, const std::vector<Reference>& refs,
                                 const Vocabulary& vocab, const LanguageNames& names,
                                 Task task, std::size_t max_decode, std::size_t chunk) {
  const auto decoder = model_decoder(params, max_decode);
  TranslateOptions opts{task, chunk};
  std::vector<Document> out;
  for (const auto& ref : refs) {
    out.push_back(
        translate_document(decoder, ref.source, vocab, names, ref.target.lang, opts).document);
  }
  return out;
}

struct EvalSetup {
  Task task;
  Vocabulary vocab;
  std::vector<Reference> refs;
  LanguageNames names;
  std::size_t max_decode;
  std::size_t chunk;
};

EvalSetup eval_setup(const Config& c) {
  EvalSetup s{parse_task(c.get_string("eval.task", "translate")), load_vocab(c), {},
              language_names(c), get_size(c, "eval.max_decode_len", 256),
              get_size(c, "eval.chunk", 512)};
  const auto set = c.get_string("eval.set", (data_dir(c) / "test.jsonl").string());
  s.refs = references(read_corpus(set), s.task, get_size(c, "eval.summary_sentences", 1),
                      get_size(c, "eval.max_docs", 0));
  if (s.refs.empty()) throw ValidationError("evaluation set " + set + " is empty");
  return s;
}

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string render_ids(const std::vector<TokenId>& ids, const Vocabulary& vocab) {
  std::string out;
  for (TokenId id : ids) {
    if (id == kEosId) continue;
    if (!out.empty()) out += ' ';
    out += vocab.token(id);
  }
  return out;
}

bool is_corrupting(Objective o) {
  return o != Objective::DocNMT && o != Objective::Summarize;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{
      "build-corpus", "make-examples", "pretrain", "finetune",
      "evaluate",     "translate",     "inspect",  "curve"};
  return names;
}

std::string checkpoint_name(std::int64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ckpt_%06lld.bin", static_cast<long long>(step));
  return buf;
}

LanguageNames language_names(const Config& config) {
  std::map<std::string, std::string> names;
  for (const auto& [code, name] : config.with_prefix("lang.")) names[code] = name;
  return LanguageNames(std::move(names));
}

ModelConfig model_config(const Config& c, int vocab_size) {
  ModelConfig m;
  m.d_model = static_cast<int>(c.get_int("model.d_model", 64));
  m.n_heads = static_cast<int>(c.get_int("model.n_heads", 4));
  m.n_enc_layers = static_cast<int>(c.get_int("model.enc_layers", 2));
  m.n_dec_layers = static_cast<int>(c.get_int("model.dec_layers", 2));
  m.d_ff = static_cast<int>(c.get_int("model.d_ff", 256));
  m.max_positions = static_cast<int>(c.get_int("model.max_positions", 512));
  m.dropout_rate = c.get_double("model.dropout", 0.1);
  m.tie_embeddings = c.get_bool("model.tie_embeddings", true);
  m.seed = static_cast<std::uint64_t>(
      c.get_int("model.seed", static_cast<std::int64_t>(base_seed(c))));
  m.vocab_size = vocab_size;
  m.validate();
  return m;
}

void check_config_keys(const Config& c) { c.check_keys(known_keys(), {"lang."}); }

MixtureSchedule schedule_from(const Config& c) {
  const auto stages = c.all("stage");
  if (stages.empty()) {
    return MixtureSchedule::single(parse_objective(c.get_string("train.objective", "DrMT")),
                                   c.get_int("train.steps", 1000));
  }
  MixtureSchedule s;
  for (const auto* st : stages) {
    if (!st->is_table) throw ConfigError("stage must be a {steps = N, mix = {...}} table");
    const auto* steps = st->find("steps");
    const auto* mix = st->find("mix");
    if (!steps || !mix || !mix->is_table) {
      throw ConfigError("stage needs steps and a mix table");
    }
    MixtureStage stage;
    stage.steps = to_int(*steps, "stage.steps");
    for (const auto& [name, w] : mix->table) {
      stage.mix.emplace_back(parse_objective(name), to_double(w, "stage.mix." + name));
    }
    s.stages.push_back(std::move(stage));
  }
  s.validate();
  return s;
}

LrSchedule lr_schedule(const Config& c) {
  LrSchedule s;
  s.kind = parse_schedule_kind(c.get_string("optim.schedule", "inverse_sqrt"));
  s.value = c.get_double("optim.lr", 0.01);
  s.warmup_steps = c.get_int("optim.warmup", 0);
  if (!(s.value > 0)) throw ConfigError("optim.lr must be positive");
  return s;
}

void build_corpus(const Config& c, std::ostream& log) {
  check_config_keys(c);
  const auto seed = base_seed(c);
  const fs::path dir = data_dir(c);
  fs::create_directories(dir);
  const auto src_langs = split_list(c.get_string("synth.src_langs", "xx"));
  const auto tgt = c.get_string("synth.tgt_lang", "yy");
  if (src_langs.empty()) throw ConfigError("synth.src_langs is empty");
  const auto words = get_size(c, "synth.words", 80);
  const auto successors = get_size(c, "synth.successors", 4);
  const auto train_docs = get_size(c, "synth.train_docs", 2000);
  const auto test_docs = get_size(c, "synth.test_docs", 100);
  SynthDocConfig doc_cfg;
  doc_cfg.min_sentences = get_size(c, "synth.min_sentences", 4);
  doc_cfg.max_sentences = get_size(c, "synth.max_sentences", 8);
  doc_cfg.min_words = get_size(c, "synth.min_words", 4);
  doc_cfg.max_words = get_size(c, "synth.max_words", 7);

  std::map<std::string, CipherKey> keys;
  std::vector<Document> mono, held_out;
  for (const auto& lang : src_langs) {
    if (lang == tgt) throw ConfigError("source language " + lang + " equals the target");
    const auto h = hash_string(lang);
    const auto language = make_language(lang, words, successors, derive_seed(seed, h, 1));
    keys[lang] = make_cipher_key(language, tgt, derive_seed(seed, h, 2));
    auto docs = generate_documents(language, doc_cfg, train_docs, lang + "-",
                                   derive_seed(seed, h, 3));
    mono.insert(mono.end(), docs.begin(), docs.end());
    auto test = generate_documents(language, doc_cfg, test_docs, lang + "-test-",
                                   derive_seed(seed, h, 4));
    held_out.insert(held_out.end(), test.begin(), test.end());
    write_cipher_key((dir / ("cipher_" + lang + ".tsv")).string(), keys[lang]);
  }
  const Translator translator = [&keys](const Document& d) {
    return cipher_translate(d, keys.at(d.lang));
  };
  const auto corpus = build_parallel_corpus(
      mono, translator, get_size(c, "corpus.sample_n", static_cast<std::int64_t>(train_docs)),
      derive_seed(seed, 5));
  const auto test = build_parallel_corpus(held_out, translator, std::max<std::size_t>(test_docs, 1),
                                          derive_seed(seed, 6));

  std::vector<std::string> texts;
  for (const auto& d : mono) texts.push_back(d.text());
  for (const auto* p : corpus.all()) texts.push_back(p->tgt.text());
  const auto names = language_names(c);
  std::vector<std::string> reserved{"Translate", "Summarize", "to", ":"};
  for (const auto& lang : src_langs) reserved.push_back(names.name(lang));
  reserved.push_back(names.name(tgt));
  const auto vocab = Vocabulary::build(
      texts, get_size(c, "vocab.min_freq", 1), get_size(c, "vocab.max_size", 100000),
      static_cast<int>(c.get_int("vocab.sentinels", kDefaultSentinels)), reserved);

  write_documents((dir / "mono.jsonl").string(), mono);
  write_corpus((dir / "corpus.jsonl").string(), corpus);
  write_corpus((dir / "test.jsonl").string(), test);
  vocab.save((dir / "vocab.tsv").string());
  log << "build-corpus: " << mono.size() << " monolingual docs, " << corpus.size()
      << " training pairs, " << test.size() << " test pairs, vocabulary " << vocab.size()
      << " -> " << dir.string() << "\n";
}

void make_examples(const Config& c, std::ostream& log) {
  check_config_keys(c);
  const auto vocab = load_vocab(c);
  const auto corpus = read_corpus((data_dir(c) / "corpus.jsonl").string());
  const auto objective = parse_objective(c.get_string("examples.objective", "DrMT"));
  const auto count = get_size(c, "examples.count", 10);
  ObjectiveStream stream(objective, corpus, vocab, stream_options(c));
  const auto path = resolve(run_dir(c), c.get_string("examples.output", "examples.jsonl"));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  for (std::size_t i = 0; i < count; ++i) write_example(out, stream.next());
  log << "make-examples: " << count << " " << objective_name(objective) << " examples -> "
      << path << "\n";
}

void pretrain(const Config& c, std::ostream& log) {
  check_config_keys(c);
  const auto vocab = load_vocab(c);
  const auto corpus = read_corpus((data_dir(c) / "corpus.jsonl").string());
  const fs::path run = run_dir(c);
  const auto schedule = schedule_from(c);

  Params params;
  std::optional<OptimState<float>> optim;
  bool resumed = false;
  if (c.has("train.resume")) {
    auto ckpt = load_checkpoint<float>(c.get_string("train.resume"));
    if (!ckpt.optim) throw ConfigError("train.resume checkpoint has no optimizer state");
    params = std::move(ckpt.params);
    optim = std::move(ckpt.optim);
    resumed = true;
  } else if (c.has("train.init")) {
    params = load_params(c.get_string("train.init"));
  } else {
    params = init_params<float>(model_config(c, static_cast<int>(vocab.size())));
  }
  check_vocab(params, vocab, "model");
  if (!optim) optim = OptimState<float>::create(params, lr_schedule(c), adam_config(c));

  BatchStream stream(schedule, corpus, vocab, stream_options(c), batching(c),
                     static_cast<std::uint64_t>(c.get_int("train.seed", static_cast<std::int64_t>(base_seed(c)))));
  stream.skip(optim->step);
  std::int64_t stop = schedule.total_steps();
  if (c.has("train.max_steps")) stop = std::min(stop, c.get_int("train.max_steps", stop));
  const std::int64_t remaining = stop - optim->step;
  if (remaining <= 0) {
    log << "pretrain: already at step " << optim->step << ", nothing to do\n";
    return;
  }
  auto opts = train_options(c, log, "pretrain", remaining);
  opts.checkpoint_every = c.get_int("train.checkpoint_every", 0);
  std::int64_t last_saved = -1;
  opts.on_checkpoint = [&](std::int64_t step, const Params& p, const OptimState<float>& o) {
    save_checkpoint((run / checkpoint_name(step)).string(), p, &o);
    last_saved = step;
  };
  log << "pretrain: " << params.num_parameters() << " parameters, steps " << optim->step + 1
      << ".." << stop << "\n";
  const auto points = train(params, stream, *optim, opts);
  if (last_saved != optim->step) {
    save_checkpoint((run / checkpoint_name(optim->step)).string(), params, &*optim);
  }
  write_loss_curve((run / "loss.tsv").string(), points, resumed);
  log << "pretrain: finished at step " << optim->step << " -> "
      << (run / checkpoint_name(optim->step)).string() << "\n";
}

void finetune(const Config& c, std::ostream& log) {
  check_config_keys(c);
  const auto vocab = load_vocab(c);
  const auto corpus = read_corpus((data_dir(c) / "corpus.jsonl").string());
  const fs::path run = run_dir(c);
  const std::string init = c.get_string("finetune.init");
  Params params = init == "none"
                      ? init_params<float>(model_config(c, static_cast<int>(vocab.size())))
                      : load_params(init);
  check_vocab(params, vocab, "model");
  const Task task = parse_task(c.get_string("finetune.task", "translate"));
  const auto objective = task == Task::Translate ? Objective::DocNMT : Objective::Summarize;
  const auto steps = c.get_int("finetune.steps", 500);
  auto optim = OptimState<float>::create(
      params, LrSchedule::constant(c.get_double("finetune.lr", 0.001)), adam_config(c));
  auto options = stream_options(c);
  options.translation_prefix = true;
  BatchStream stream(MixtureSchedule::single(objective, steps), corpus, vocab, options,
                     batching(c),
                     static_cast<std::uint64_t>(c.get_int(
                         "finetune.seed", static_cast<std::int64_t>(base_seed(c) + 1))));
  auto opts = train_options(c, log, "finetune", steps);
  opts.checkpoint_every = c.get_int("finetune.checkpoint_every", 0);
  opts.on_checkpoint = [&](std::int64_t step, const Params& p, const OptimState<float>& o) {
    save_checkpoint((run / ("finetune_" + checkpoint_name(step))).string(), p, &o);
  };
  const auto points = train(params, stream, optim, opts);
  const auto out = resolve(run, c.get_string("finetune.output", "finetuned.bin"));
  save_checkpoint(out, params, &optim);
  write_loss_curve((run / "finetune_loss.tsv").string(), points);
  log << "finetune: " << steps << " steps from " << init << " -> " << out << "\n";
}

void evaluate(const Config& c, std::ostream& log) {
  check_config_keys(c);
  const auto setup = eval_setup(c);
  const fs::path run = run_dir(c);
  std::vector<Document> hyps;
  if (c.has("eval.hyp")) {
    std::map<std::string, Document> by_id;
    for (auto& d : read_documents(c.get_string("eval.hyp"))) by_id[d.doc_id] = std::move(d);
    for (const auto& r : setup.refs) {
      auto it = by_id.find(r.target.doc_id);
      if (it == by_id.end()) {
        throw ValidationError("no hypothesis for " + r.target.doc_id);
      }
      hyps.push_back(it->second);
    }
  } else {
    const auto params = load_params(c.get_string("eval.checkpoint"));
    check_vocab(params, setup.vocab, "checkpoint");
    hyps = decode_all(params, setup.refs, setup.vocab, setup.names, setup.task,
                      setup.max_decode, setup.chunk);
    write_documents(resolve(run, c.get_string("eval.hyp_output", "hyp.jsonl")), hyps);
  }
  const auto reports = score(setup.task, hyps, setup.refs);
  const auto path = resolve(run, c.get_string("eval.output", "report.tsv"));
  write_report_tsv(path, reports);
  for (const auto& r : reports) {
    log << "evaluate: " << r.metric << " " << format_score(r.score) << " over "
        << r.n_segments << " documents -> " << path << "\n";
  }
}

void translate(const Config& c, std::ostream& log) {
  check_config_keys(c);
  const auto vocab = load_vocab(c);
  const auto params = load_params(c.get_string("translate.checkpoint"));
  check_vocab(params, vocab, "checkpoint");
  const auto docs = read_documents(c.get_string("translate.input"));
  const auto tgt = c.get_string("translate.tgt_lang", "yy");
  const auto names = language_names(c);
  const auto decoder = model_decoder(params, get_size(c, "translate.max_decode_len", 256));
  TranslateOptions opts{Task::Translate, get_size(c, "translate.chunk", 512)};
  std::vector<Document> out;
  std::size_t chunks = 0;
  for (const auto& d : docs) {
    auto r = translate_document(decoder, d, vocab, names, tgt, opts);
    chunks += r.chunks.size();
    out.push_back(std::move(r.document));
  }
  const auto path = resolve(run_dir(c), c.get_string("translate.output", "translations.jsonl"));
  write_documents(path, out);
  log << "translate: " << docs.size() << " documents in " << chunks << " chunks -> " << path
      << "\n";
}

void inspect(const Config& c, std::ostream& out) {
  check_config_keys(c);
  const auto vocab = load_vocab(c);
  const auto path = c.get_string("inspect.input");
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  const auto n = get_size(c, "inspect.n", 5);
  if (n == 0) return;
  std::vector<TrainingExample> examples;
  try {
    examples = read_examples(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.detail());
  }
  for (std::size_t i = 0; i < std::min(n, examples.size()); ++i) {
    const auto& ex = examples[i];
    out << "== example " << i << " [" << objective_name(ex.objective) << "] "
        << ex.source_id << " (" << ex.src_lang << " -> " << ex.tgt_lang << ")\n";
    std::vector<TokenId> body = ex.input_ids;
    const auto colon = std::find(body.begin(), body.end(), vocab.id(":"));
    const bool prefixed = !body.empty() && colon != body.end() &&
                          (vocab.token(body.front()) == "Translate" ||
                           vocab.token(body.front()) == "Summarize");
    if (prefixed) {
      out << "prefix: "
          << render_ids({body.begin(), colon + 1}, vocab) << "\n";
      body.erase(body.begin(), colon + 1);
    }
    if (ex.permutation) {
      out << "order:";
      for (std::size_t k = 0; k < ex.permutation->size(); ++k) {
        out << " " << k << "<-" << (*ex.permutation)[k];
      }
      out << "\n";
    }
    if (!is_corrupting(ex.objective)) {
      out << "corruption: none\n";
    } else {
      std::size_t masks = 0;
      for (TokenId t : body) masks += vocab.is_sentinel(t);
      out << "corruption: " << masks << " masked span" << (masks == 1 ? "" : "s") << "\n";
    }
    out << "input: " << render_ids(body, vocab) << "\n";
    out << "target: " << render_ids(ex.target_ids, vocab) << "\n";
  }
}

void curve(const Config& c, std::ostream& log) {
  check_config_keys(c);
  const fs::path run = run_dir(c);
  const fs::path dir = c.get_string("curve.dir", run.string());
  const std::regex pattern("ckpt_([0-9]+)\\.bin");
  std::vector<std::pair<std::int64_t, fs::path>> ckpts;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) ckpts.emplace_back(std::stoll(m[1]), entry.path());
  }
  if (ckpts.empty()) throw ValidationError("no checkpoints in " + dir.string());
  std::sort(ckpts.begin(), ckpts.end());
  const auto setup = eval_setup(c);
  const auto path = resolve(run, c.get_string("curve.output", "curve.tsv"));
  std::ostringstream tsv;
  tsv << "step\tscore\n";
  for (const auto& [step, file] : ckpts) {
    const auto params = load_params(file.string());
    check_vocab(params, setup.vocab, file.string());
    const auto hyps = decode_all(params, setup.refs, setup.vocab, setup.names, setup.task,
                                 setup.max_decode, setup.chunk);
    const auto r = score(setup.task, hyps, setup.refs);
    const double s = r.back().score;
    tsv << step << "\t" << format_score(s) << "\n";
    log << "curve: step " << step << " " << r.back().metric << " " << format_score(s) << "\n";
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << tsv.str();
  log << "curve: " << ckpts.size() << " checkpoints -> " << path << "\n";
}

void run_command(const std::string& command, const Config& config, std::ostream& out,
                 std::ostream& log) {
  if (command == "build-corpus") return build_corpus(config, log);
  if (command == "make-examples") return make_examples(config, log);
  if (command == "pretrain") return pretrain(config, log);
  if (command == "finetune") return finetune(config, log);
  if (command == "evaluate") return evaluate(config, log);
  if (command == "translate") return translate(config, log);
  if (command == "inspect") return inspect(config, out);
  if (command == "curve") return curve(config, log);
  throw ConfigError("unknown command '" + command + "'");
}

}  // namespace docforge
