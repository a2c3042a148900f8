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

#ifndef DOCFORGE_MODEL_HPP_
#define DOCFORGE_MODEL_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "docforge/pipeline.hpp"
#include "docforge/tokenizer.hpp"

namespace docforge {

struct ModelConfig {
  int d_model = 64;
  int n_heads = 4;
  int n_enc_layers = 2;
  int n_dec_layers = 2;
  int d_ff = 256;
  int vocab_size = 0;
  int max_positions = 512;
  double dropout_rate = 0.1;
  std::uint64_t seed = 0;
  // Share the embedding table with the output projection.
  bool tie_embeddings = true;

  // Throws ConfigError.
  void validate() const;
  int head_dim() const { return d_model / n_heads; }

  bool operator==(const ModelConfig&) const = default;
};

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

// Projections act on row-vector activations: y = x * W.
template <typename Scalar>
struct AttentionWeights {
  Matrix<Scalar> wq, wk, wv, wo;
};

template <typename Scalar>
struct EncoderLayerParams {
  RowVector<Scalar> attn_norm, ffn_norm;
  AttentionWeights<Scalar> self_attn;
  Matrix<Scalar> ff_in, ff_out;
};

template <typename Scalar>
struct DecoderLayerParams {
  RowVector<Scalar> self_norm, cross_norm, ffn_norm;
  AttentionWeights<Scalar> self_attn, cross_attn;
  Matrix<Scalar> ff_in, ff_out;
};

// Flat view of one parameter tensor.
template <typename Scalar>
struct TensorRef {
  std::string name;
  Scalar* data;
  Eigen::Index size;
};

template <typename Scalar>
struct ConstTensorRef {
  std::string name;
  const Scalar* data;
  Eigen::Index size;
};

// Pre-norm transformer encoder-decoder (RMS norm with gains, GELU feed
// forward, sinusoidal positions). The embedding table feeds both encoder and
// decoder inputs and, when tied, also the output projection.
template <typename Scalar>
struct ModelParams {
  ModelConfig config;
  Matrix<Scalar> embedding;  // vocab_size x d_model
  Matrix<Scalar> output;     // vocab_size x d_model; empty when tied
  std::vector<EncoderLayerParams<Scalar>> encoder;
  std::vector<DecoderLayerParams<Scalar>> decoder;
  RowVector<Scalar> encoder_norm, decoder_norm;

  // Every tensor in a fixed order; the order defines the checkpoint layout.
  std::vector<TensorRef<Scalar>> tensors();
  std::vector<ConstTensorRef<Scalar>> tensors() const;

  ModelParams zeros_like() const;
  Eigen::Index num_parameters() const;
  bool all_finite() const;
};

// Deterministic from config.seed. Embeddings ~ N(0, 1/d_model), projections
// ~ N(0, 1/fan_in), norm gains 1. Logits are scaled by 1/sqrt(d_model), so
// an untrained model predicts a near-uniform distribution.
template <typename Scalar>
ModelParams<Scalar> init_params(const ModelConfig& config);

struct ForwardOptions {
  double dropout_rate = 0.0;
  std::uint64_t dropout_seed = 0;
};

template <typename Scalar>
struct LossOutput {
  // Mean negative log-likelihood over all non-pad target tokens.
  Scalar loss = 0;
  std::size_t num_tokens = 0;
  // Per example: log P(target_t | input, target_<t) for each target token.
  std::vector<std::vector<Scalar>> token_log_probs;
};

// Teacher forcing: the decoder reads PAD followed by target[0..n-2].
template <typename Scalar>
LossOutput<Scalar> forward_loss(const ModelParams<Scalar>& params,
                                const Batch& batch,
                                const ForwardOptions& options = {});

// Loss plus its exact gradient, written into `grads` (resized as needed).
template <typename Scalar>
LossOutput<Scalar> loss_and_grad(const ModelParams<Scalar>& params,
                                 const Batch& batch, ModelParams<Scalar>& grads,
                                 const ForwardOptions& options = {});

template <typename Scalar>
ModelParams<Scalar> grad(const ModelParams<Scalar>& params, const Batch& batch,
                         const ForwardOptions& options = {});

// Teacher-forced decoder logits, one row per target position.
template <typename Scalar>
Matrix<Scalar> decoder_logits(const ModelParams<Scalar>& params,
                              std::span<const TokenId> input,
                              std::span<const TokenId> target);

// Argmax decoding with cached keys/values. Ties go to the lowest id. Stops
// after emitting EOS (included) or max_len tokens.
template <typename Scalar>
std::vector<TokenId> greedy_decode(const ModelParams<Scalar>& params,
                                   std::span<const TokenId> input,
                                   std::size_t max_len);

}  // namespace docforge

#endif  // DOCFORGE_MODEL_HPP_
