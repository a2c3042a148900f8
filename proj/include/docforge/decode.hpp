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

#ifndef DOCFORGE_DECODE_HPP_
#define DOCFORGE_DECODE_HPP_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "docforge/corpus.hpp"
#include "docforge/model.hpp"
#include "docforge/pipeline.hpp"

namespace docforge {

// Maps one encoded model input (prefix + chunk + EOS) to output ids.
using ChunkDecoder = std::function<std::vector<TokenId>(std::span<const TokenId>)>;

template <typename Scalar>
ChunkDecoder model_decoder(const ModelParams<Scalar>& params, std::size_t max_len);

// Reference decoder that applies `key` word by word after skipping
// `prefix_len` prefix tokens. Used to exercise the chunking contract with a
// translator whose output is known exactly.
ChunkDecoder cipher_decoder(const CipherKey& key, const Vocabulary& vocab,
                            std::size_t prefix_len);

struct TranslateOptions {
  Task task = Task::Translate;
  std::size_t max_chunk = 512;
};

struct TranslationResult {
  Document document;
  std::vector<Chunk> chunks;
  std::vector<std::string> chunk_outputs;
};

// Chunks `doc`, prefixes each chunk with the task prefix, decodes chunks
// independently and concatenates the outputs in order. The output document
// is re-segmented and may have no sentences if every chunk decoded empty.
TranslationResult translate_document(const ChunkDecoder& decoder,
                                     const Document& doc, const Vocabulary& vocab,
                                     const LanguageNames& names,
                                     const std::string& tgt_lang,
                                     const TranslateOptions& options = {});

}  // namespace docforge

#endif  // DOCFORGE_DECODE_HPP_
