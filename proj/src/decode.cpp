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

#include "docforge/decode.hpp"

#include "docforge/errors.hpp"

namespace docforge {

template <typename S>
ChunkDecoder model_decoder(const ModelParams<S>& params, std::size_t max_len) {
  return [&params, max_len](std::span<const TokenId> input) {
    return greedy_decode(params, input, max_len);
  };
}

ChunkDecoder cipher_decoder(const CipherKey& key, const Vocabulary& vocab,
                            std::size_t prefix_len) {
  return [&key, &vocab, prefix_len](std::span<const TokenId> input) {
    std::vector<TokenId> out;
    for (std::size_t i = prefix_len; i < input.size(); ++i) {
      if (input[i] == kEosId) break;
      out.push_back(vocab.id(key.translate_word(vocab.token(input[i]))));
    }
    out.push_back(kEosId);
    return out;
  };
}

TranslationResult translate_document(const ChunkDecoder& decoder,
                                     const Document& doc, const Vocabulary& vocab,
                                     const LanguageNames& names,
                                     const std::string& tgt_lang,
                                     const TranslateOptions& options) {
  validate(doc);
  const auto prefix = vocab.encode_words(
      make_prefix(options.task, names.name(doc.lang), names.name(tgt_lang)));
  TranslationResult result;
  result.chunks = chunk_document(doc, vocab, options.max_chunk, prefix.size());
  std::string text;
  for (std::size_t i = 0; i < result.chunks.size(); ++i) {
    std::vector<TokenId> input = prefix;
    for (const auto& s : result.chunks[i].sentences) {
      const auto ids = vocab.encode_words(s);
      input.insert(input.end(), ids.begin(), ids.end());
    }
    input.push_back(kEosId);
    std::string decoded;
    try {
      decoded = vocab.decode(decoder(input));
    } catch (const std::exception& e) {
      throw Error("chunk " + std::to_string(i) + " of " + doc.doc_id + ": " + e.what());
    }
    if (!decoded.empty()) {
      if (!text.empty()) text += ' ';
      text += decoded;
    }
    result.chunk_outputs.push_back(std::move(decoded));
  }
  result.document.doc_id = doc.doc_id + "." + tgt_lang;
  result.document.lang = tgt_lang;
  if (!text.empty()) result.document.sentences = segment_sentences(text);
  return result;
}

template ChunkDecoder model_decoder<float>(const ModelParams<float>&, std::size_t);
template ChunkDecoder model_decoder<double>(const ModelParams<double>&, std::size_t);

}  // namespace docforge
