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

#ifndef DOCFORGE_EXPERIMENT_HPP_
#define DOCFORGE_EXPERIMENT_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "docforge/config.hpp"
#include "docforge/model.hpp"
#include "docforge/optim.hpp"
#include "docforge/pipeline.hpp"

namespace docforge {

// Subcommands understood by run_command, in CLI order.
const std::vector<std::string>& command_names();

// Throws ConfigError on keys no subcommand reads (any "lang." key is allowed).
void check_config_keys(const Config& config);

// Dispatches one subcommand. Progress goes to `log`; rendered output
// (inspect) goes to `out`. Errors propagate as docforge::Error.
void run_command(const std::string& command, const Config& config,
                 std::ostream& out, std::ostream& log);

// Synthesizes monolingual documents, cipher keys, the parallel training
// corpus, a held-out test corpus and the vocabulary under paths.data.
void build_corpus(const Config& config, std::ostream& log);

// Dumps examples of one objective as line-delimited records.
void make_examples(const Config& config, std::ostream& log);

// Trains from scratch, from train.init (parameters only) or resumes from
// train.resume (parameters and optimizer). Writes ckpt_<step>.bin every
// train.checkpoint_every steps and at the end, plus loss.tsv.
void pretrain(const Config& config, std::ostream& log);

// Task finetuning with a constant rate; finetune.init = "none" starts from
// freshly initialized parameters.
void finetune(const Config& config, std::ostream& log);

// Decodes the test set (or reads eval.hyp) and writes a metric report.
void evaluate(const Config& config, std::ostream& log);

// Translates a document file with chunked greedy decoding.
void translate(const Config& config, std::ostream& log);

// Human-readable rendering of dumped examples.
void inspect(const Config& config, std::ostream& out);

// Zero-finetune evaluation of every ckpt_<step>.bin in curve.dir.
void curve(const Config& config, std::ostream& log);

// Shared config readers, exposed for tests.
ModelConfig model_config(const Config& config, int vocab_size);
MixtureSchedule schedule_from(const Config& config);
LrSchedule lr_schedule(const Config& config);
LanguageNames language_names(const Config& config);
std::string checkpoint_name(std::int64_t step);

}  // namespace docforge

#endif  // DOCFORGE_EXPERIMENT_HPP_
