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

#include "docforge/model.hpp"

#include <cmath>
#include <limits>

#include "docforge/errors.hpp"
#include "docforge/rng.hpp"

namespace docforge {
namespace {

using Eigen::Index;

template <typename S>
using Mat = Matrix<S>;
template <typename S>
using RowVec = RowVector<S>;
template <typename S>
using ColVec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

constexpr double kNormEps = 1e-6;

// Visits every tensor as (name, Eigen object) in checkpoint order.
template <typename P, typename Fn>
void visit_tensors(P& p, Fn&& fn) {
  fn(std::string("embedding"), p.embedding);
  if (!p.config.tie_embeddings) fn(std::string("output"), p.output);
  for (std::size_t l = 0; l < p.encoder.size(); ++l) {
    auto& e = p.encoder[l];
    const std::string pre = "encoder." + std::to_string(l) + ".";
    fn(pre + "attn_norm", e.attn_norm);
    fn(pre + "self_attn.wq", e.self_attn.wq);
    fn(pre + "self_attn.wk", e.self_attn.wk);
    fn(pre + "self_attn.wv", e.self_attn.wv);
    fn(pre + "self_attn.wo", e.self_attn.wo);
    fn(pre + "ffn_norm", e.ffn_norm);
    fn(pre + "ff_in", e.ff_in);
    fn(pre + "ff_out", e.ff_out);
  }
  for (std::size_t l = 0; l < p.decoder.size(); ++l) {
    auto& d = p.decoder[l];
    const std::string pre = "decoder." + std::to_string(l) + ".";
    fn(pre + "self_norm", d.self_norm);
    fn(pre + "self_attn.wq", d.self_attn.wq);
    fn(pre + "self_attn.wk", d.self_attn.wk);
    fn(pre + "self_attn.wv", d.self_attn.wv);
    fn(pre + "self_attn.wo", d.self_attn.wo);
    fn(pre + "cross_norm", d.cross_norm);
    fn(pre + "cross_attn.wq", d.cross_attn.wq);
    fn(pre + "cross_attn.wk", d.cross_attn.wk);
    fn(pre + "cross_attn.wv", d.cross_attn.wv);
    fn(pre + "cross_attn.wo", d.cross_attn.wo);
    fn(pre + "ffn_norm", d.ffn_norm);
    fn(pre + "ff_in", d.ff_in);
    fn(pre + "ff_out", d.ff_out);
  }
  fn(std::string("encoder_norm"), p.encoder_norm);
  fn(std::string("decoder_norm"), p.decoder_norm);
}

template <typename S>
void shape_attention(AttentionWeights<S>& a, int d) {
  a.wq.setZero(d, d);
  a.wk.setZero(d, d);
  a.wv.setZero(d, d);
  a.wo.setZero(d, d);
}

template <typename S>
ModelParams<S> shaped_zeros(const ModelConfig& c) {
  ModelParams<S> p;
  p.config = c;
  const int d = c.d_model;
  p.embedding.setZero(c.vocab_size, d);
  if (!c.tie_embeddings) p.output.setZero(c.vocab_size, d);
  p.encoder.resize(static_cast<std::size_t>(c.n_enc_layers));
  for (auto& e : p.encoder) {
    e.attn_norm.setZero(d);
    e.ffn_norm.setZero(d);
    shape_attention(e.self_attn, d);
    e.ff_in.setZero(d, c.d_ff);
    e.ff_out.setZero(c.d_ff, d);
  }
  p.decoder.resize(static_cast<std::size_t>(c.n_dec_layers));
  for (auto& l : p.decoder) {
    l.self_norm.setZero(d);
    l.cross_norm.setZero(d);
    l.ffn_norm.setZero(d);
    shape_attention(l.self_attn, d);
    shape_attention(l.cross_attn, d);
    l.ff_in.setZero(d, c.d_ff);
    l.ff_out.setZero(c.d_ff, d);
  }
  p.encoder_norm.setZero(d);
  p.decoder_norm.setZero(d);
  return p;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Sinusoidal positions; rows are positions.
template <typename S>
const Mat<S>& positions(int rows, int d) {
  thread_local Mat<S> table;
  if (table.rows() < rows || table.cols() != d) {
    const int n = std::max<int>(rows, static_cast<int>(table.rows()));
    table.resize(n, d);
    for (int pos = 0; pos < n; ++pos) {
      for (int i = 0; i < d; i += 2) {
        const double freq = std::pow(10000.0, -static_cast<double>(i) / d);
        table(pos, i) = static_cast<S>(std::sin(pos * freq));
        if (i + 1 < d) table(pos, i + 1) = static_cast<S>(std::cos(pos * freq));
      }
    }
  }
  return table;
}

template <typename S>
void check_finite(const Mat<S>& m, const std::string& where) {
  if (!m.allFinite()) throw NumericError(where, "non-finite activations");
}

// ---------------------------------------------------------------------------
// Building blocks. Each forward optionally records what its backward needs.

template <typename S>
struct NormCache {
  Mat<S> x_hat;
  ColVec<S> inv_rms;
};

template <typename S>
Mat<S> rms_norm(const Mat<S>& x, const RowVec<S>& gain, NormCache<S>* cache) {
  ColVec<S> inv = (x.array().square().rowwise().mean() + S(kNormEps)).rsqrt();
  Mat<S> x_hat = x.array().colwise() * inv.array();
  Mat<S> y = x_hat.array().rowwise() * gain.array();
  if (cache) {
    cache->x_hat = std::move(x_hat);
    cache->inv_rms = std::move(inv);
  }
  return y;
}

template <typename S>
Mat<S> rms_norm_backward(const Mat<S>& dy, const RowVec<S>& gain,
                         const NormCache<S>& c, RowVec<S>& dgain) {
  dgain += (dy.array() * c.x_hat.array()).colwise().sum().matrix();
  Mat<S> dx_hat = dy.array().rowwise() * gain.array();
  ColVec<S> dot = (dx_hat.array() * c.x_hat.array()).rowwise().mean();
  Mat<S> dx = (dx_hat.array() - c.x_hat.array().colwise() * dot.array()).colwise() *
              c.inv_rms.array();
  return dx;
}

// In-place row softmax. With `causal`, row i only sees columns 0..i.
template <typename S>
void softmax_rows(Mat<S>& s, bool causal) {
  for (Index i = 0; i < s.rows(); ++i) {
    const Index n = causal ? std::min<Index>(i + 1, s.cols()) : s.cols();
    auto row = s.row(i);
    const S m = row.head(n).maxCoeff();
    S sum = 0;
    for (Index j = 0; j < n; ++j) {
      row(j) = std::exp(row(j) - m);
      sum += row(j);
    }
    row.head(n) /= sum;
    if (n < s.cols()) row.tail(s.cols() - n).setZero();
  }
}

template <typename S>
struct AttnCache {
  Mat<S> q, k, v, context;
  std::vector<Mat<S>> probs;
};

template <typename S>
Mat<S> attention(const Mat<S>& xq, const Mat<S>& xkv, const AttentionWeights<S>& w,
                 int heads, bool causal, AttnCache<S>* cache) {
  const Index d = w.wq.cols();
  const Index dh = d / heads;
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));
  Mat<S> q = xq * w.wq;
  Mat<S> k = xkv * w.wk;
  Mat<S> v = xkv * w.wv;
  Mat<S> context(xq.rows(), d);
  if (cache) cache->probs.resize(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    Mat<S> p = (q.middleCols(h * dh, dh) * k.middleCols(h * dh, dh).transpose()) * scale;
    softmax_rows(p, causal);
    context.middleCols(h * dh, dh).noalias() = p * v.middleCols(h * dh, dh);
    if (cache) cache->probs[static_cast<std::size_t>(h)] = std::move(p);
  }
  Mat<S> out = context * w.wo;
  if (cache) {
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->context = std::move(context);
  }
  return out;
}

// Accumulates into dw, dxq and dxkv (which may alias for self-attention).
template <typename S>
void attention_backward(const Mat<S>& dout, const Mat<S>& xq, const Mat<S>& xkv,
                        const AttentionWeights<S>& w, const AttnCache<S>& c,
                        int heads, AttentionWeights<S>& dw, Mat<S>& dxq,
                        Mat<S>& dxkv) {
  const Index d = w.wq.cols();
  const Index dh = d / heads;
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));
  dw.wo.noalias() += c.context.transpose() * dout;
  Mat<S> dctx = dout * w.wo.transpose();
  Mat<S> dq(xq.rows(), d), dk(xkv.rows(), d), dv(xkv.rows(), d);
  for (int h = 0; h < heads; ++h) {
    const Mat<S>& p = c.probs[static_cast<std::size_t>(h)];
    auto dc = dctx.middleCols(h * dh, dh);
    dv.middleCols(h * dh, dh).noalias() = p.transpose() * dc;
    Mat<S> dp = dc * c.v.middleCols(h * dh, dh).transpose();
    ColVec<S> row_dot = (dp.array() * p.array()).rowwise().sum();
    Mat<S> ds = (p.array() * (dp.array().colwise() - row_dot.array())) * scale;
    dq.middleCols(h * dh, dh).noalias() = ds * c.k.middleCols(h * dh, dh);
    dk.middleCols(h * dh, dh).noalias() = ds.transpose() * c.q.middleCols(h * dh, dh);
  }
  dw.wq.noalias() += xq.transpose() * dq;
  dw.wk.noalias() += xkv.transpose() * dk;
  dw.wv.noalias() += xkv.transpose() * dv;
  dxq.noalias() += dq * w.wq.transpose();
  dxkv.noalias() += dk * w.wk.transpose();
  dxkv.noalias() += dv * w.wv.transpose();
}

template <typename S>
struct Dropout {
  double rate = 0.0;
  Rng* rng = nullptr;

  bool active() const { return rate > 0.0 && rng != nullptr; }

  // Inverted dropout; `mask` keeps the scaled keep pattern for backward.
  void apply(Mat<S>& x, Mat<S>& mask) const {
    if (!active()) return;
    mask.resize(x.rows(), x.cols());
    const S keep_scale = S(1.0 / (1.0 - rate));
    for (Index j = 0; j < x.cols(); ++j) {
      for (Index i = 0; i < x.rows(); ++i) {
        mask(i, j) = rng->uniform_real() < rate ? S(0) : keep_scale;
      }
    }
    x.array() *= mask.array();
  }
};

template <typename S>
struct FfnCache {
  Mat<S> pre, act;
};

// tanh approximation of GELU.
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;

template <typename S>
S gelu(S x) {
  const S u = S(kGeluC) * (x + S(kGeluA) * x * x * x);
  return S(0.5) * x * (S(1) + std::tanh(u));
}

template <typename S>
S gelu_grad(S x) {
  const S u = S(kGeluC) * (x + S(kGeluA) * x * x * x);
  const S t = std::tanh(u);
  return S(0.5) * (S(1) + t) +
         S(0.5) * x * (S(1) - t * t) * S(kGeluC) * (S(1) + S(3 * kGeluA) * x * x);
}

template <typename S>
Mat<S> feed_forward(const Mat<S>& x, const Mat<S>& w_in, const Mat<S>& w_out,
                    FfnCache<S>* cache) {
  Mat<S> pre = x * w_in;
  Mat<S> act = pre.unaryExpr([](S v) { return gelu(v); });
  Mat<S> out = act * w_out;
  if (cache) {
    cache->pre = std::move(pre);
    cache->act = std::move(act);
  }
  return out;
}

template <typename S>
Mat<S> feed_forward_backward(const Mat<S>& dout, const Mat<S>& x,
                             const Mat<S>& w_in, const Mat<S>& w_out,
                             const FfnCache<S>& c, Mat<S>& dw_in, Mat<S>& dw_out) {
  dw_out.noalias() += c.act.transpose() * dout;
  Mat<S> dpre = dout * w_out.transpose();
  dpre.array() *= c.pre.unaryExpr([](S v) { return gelu_grad(v); }).array();
  dw_in.noalias() += x.transpose() * dpre;
  return dpre * w_in.transpose();
}

// ---------------------------------------------------------------------------
// Layers.

template <typename S>
struct EncoderLayerCache {
  NormCache<S> attn_norm, ffn_norm;
  Mat<S> attn_in, ffn_in, attn_drop, ffn_drop;
  AttnCache<S> attn;
  FfnCache<S> ffn;
};

template <typename S>
void encoder_layer(Mat<S>& x, const EncoderLayerParams<S>& p, int heads,
                   const Dropout<S>& drop, EncoderLayerCache<S>* c) {
  Mat<S> h = rms_norm(x, p.attn_norm, c ? &c->attn_norm : nullptr);
  Mat<S> a = attention(h, h, p.self_attn, heads, false, c ? &c->attn : nullptr);
  Mat<S> mask;
  drop.apply(a, mask);
  x += a;
  if (c) {
    c->attn_in = std::move(h);
    c->attn_drop = std::move(mask);
  }
  Mat<S> h2 = rms_norm(x, p.ffn_norm, c ? &c->ffn_norm : nullptr);
  Mat<S> f = feed_forward(h2, p.ff_in, p.ff_out, c ? &c->ffn : nullptr);
  Mat<S> mask2;
  drop.apply(f, mask2);
  x += f;
  if (c) {
    c->ffn_in = std::move(h2);
    c->ffn_drop = std::move(mask2);
  }
}

template <typename S>
void encoder_layer_backward(Mat<S>& dx, const EncoderLayerParams<S>& p, int heads,
                            const EncoderLayerCache<S>& c, bool dropout,
                            EncoderLayerParams<S>& g) {
  Mat<S> df = dx;
  if (dropout) df.array() *= c.ffn_drop.array();
  Mat<S> dh2 = feed_forward_backward(df, c.ffn_in, p.ff_in, p.ff_out, c.ffn,
                                     g.ff_in, g.ff_out);
  dx += rms_norm_backward(dh2, p.ffn_norm, c.ffn_norm, g.ffn_norm);
  Mat<S> da = dx;
  if (dropout) da.array() *= c.attn_drop.array();
  Mat<S> dh = Mat<S>::Zero(dx.rows(), dx.cols());
  attention_backward(da, c.attn_in, c.attn_in, p.self_attn, c.attn, heads,
                     g.self_attn, dh, dh);
  dx += rms_norm_backward(dh, p.attn_norm, c.attn_norm, g.attn_norm);
}

template <typename S>
struct DecoderLayerCache {
  NormCache<S> self_norm, cross_norm, ffn_norm;
  Mat<S> self_in, cross_in, ffn_in, self_drop, cross_drop, ffn_drop;
  AttnCache<S> self_attn, cross_attn;
  FfnCache<S> ffn;
};

template <typename S>
void decoder_layer(Mat<S>& y, const Mat<S>& memory, const DecoderLayerParams<S>& p,
                   int heads, const Dropout<S>& drop, DecoderLayerCache<S>* c) {
  Mat<S> h = rms_norm(y, p.self_norm, c ? &c->self_norm : nullptr);
  Mat<S> a = attention(h, h, p.self_attn, heads, true, c ? &c->self_attn : nullptr);
  Mat<S> m1;
  drop.apply(a, m1);
  y += a;
  Mat<S> h2 = rms_norm(y, p.cross_norm, c ? &c->cross_norm : nullptr);
  Mat<S> b = attention(h2, memory, p.cross_attn, heads, false,
                       c ? &c->cross_attn : nullptr);
  Mat<S> m2;
  drop.apply(b, m2);
  y += b;
  Mat<S> h3 = rms_norm(y, p.ffn_norm, c ? &c->ffn_norm : nullptr);
  Mat<S> f = feed_forward(h3, p.ff_in, p.ff_out, c ? &c->ffn : nullptr);
  Mat<S> m3;
  drop.apply(f, m3);
  y += f;
  if (c) {
    c->self_in = std::move(h);
    c->cross_in = std::move(h2);
    c->ffn_in = std::move(h3);
    c->self_drop = std::move(m1);
    c->cross_drop = std::move(m2);
    c->ffn_drop = std::move(m3);
  }
}

template <typename S>
void decoder_layer_backward(Mat<S>& dy, const Mat<S>& memory,
                            const DecoderLayerParams<S>& p, int heads,
                            const DecoderLayerCache<S>& c, bool dropout,
                            DecoderLayerParams<S>& g, Mat<S>& dmemory) {
  Mat<S> df = dy;
  if (dropout) df.array() *= c.ffn_drop.array();
  Mat<S> dh3 = feed_forward_backward(df, c.ffn_in, p.ff_in, p.ff_out, c.ffn,
                                     g.ff_in, g.ff_out);
  dy += rms_norm_backward(dh3, p.ffn_norm, c.ffn_norm, g.ffn_norm);

  Mat<S> db = dy;
  if (dropout) db.array() *= c.cross_drop.array();
  Mat<S> dh2 = Mat<S>::Zero(dy.rows(), dy.cols());
  attention_backward(db, c.cross_in, memory, p.cross_attn, c.cross_attn, heads,
                     g.cross_attn, dh2, dmemory);
  dy += rms_norm_backward(dh2, p.cross_norm, c.cross_norm, g.cross_norm);

  Mat<S> da = dy;
  if (dropout) da.array() *= c.self_drop.array();
  Mat<S> dh = Mat<S>::Zero(dy.rows(), dy.cols());
  attention_backward(da, c.self_in, c.self_in, p.self_attn, c.self_attn, heads,
                     g.self_attn, dh, dh);
  dy += rms_norm_backward(dh, p.self_norm, c.self_norm, g.self_norm);
}

// ---------------------------------------------------------------------------
// Whole-sequence forward/backward for one example.

template <typename S>
Mat<S> embed(const ModelParams<S>& p, std::span<const TokenId> ids) {
  const int d = p.config.d_model;
  if (static_cast<int>(ids.size()) > p.config.max_positions) {
    throw ContractError("sequence of " + std::to_string(ids.size()) +
                        " tokens exceeds max_positions " +
                        std::to_string(p.config.max_positions));
  }
  const S scale = std::sqrt(static_cast<S>(d));
  const auto& pe = positions<S>(static_cast<int>(ids.size()), d);
  Mat<S> x(static_cast<Index>(ids.size()), d);
  for (std::size_t t = 0; t < ids.size(); ++t) {
    const TokenId id = ids[t];
    if (id < 0 || id >= p.config.vocab_size) {
      throw ContractError("token id " + std::to_string(id) + " outside vocabulary");
    }
    x.row(static_cast<Index>(t)) =
        p.embedding.row(id) * scale + pe.row(static_cast<Index>(t));
  }
  return x;
}

template <typename S>
void embed_backward(const ModelParams<S>& p, std::span<const TokenId> ids,
                    const Mat<S>& dx, Mat<S>& dembedding) {
  const S scale = std::sqrt(static_cast<S>(p.config.d_model));
  for (std::size_t t = 0; t < ids.size(); ++t) {
    dembedding.row(ids[t]) += dx.row(static_cast<Index>(t)) * scale;
  }
}

template <typename S>
struct ExampleCache {
  Mat<S> enc_drop, dec_drop;
  std::vector<EncoderLayerCache<S>> enc;
  std::vector<DecoderLayerCache<S>> dec;
  NormCache<S> enc_norm, dec_norm;
  Mat<S> memory, dec_out, probs;
};

std::vector<TokenId> shift_right(std::span<const TokenId> target) {
  std::vector<TokenId> dec_in;
  dec_in.reserve(target.size());
  if (target.empty()) return dec_in;
  dec_in.push_back(kPadId);
  dec_in.insert(dec_in.end(), target.begin(), target.end() - 1);
  return dec_in;
}

// Returns logits (T_tgt x V). With a cache, also records activations.
template <typename S>
Mat<S> run_forward(const ModelParams<S>& p, std::span<const TokenId> input,
                   std::span<const TokenId> dec_in, const Dropout<S>& drop,
                   ExampleCache<S>* c) {
  const int heads = p.config.n_heads;
  Mat<S> x = embed(p, input);
  Mat<S> mask;
  drop.apply(x, mask);
  if (c) {
    c->enc_drop = std::move(mask);
    c->enc.resize(p.encoder.size());
    c->dec.resize(p.decoder.size());
  }
  for (std::size_t l = 0; l < p.encoder.size(); ++l) {
    encoder_layer(x, p.encoder[l], heads, drop, c ? &c->enc[l] : nullptr);
    check_finite(x, "encoder layer " + std::to_string(l));
  }
  Mat<S> memory = rms_norm(x, p.encoder_norm, c ? &c->enc_norm : nullptr);

  Mat<S> y = embed(p, dec_in);
  Mat<S> mask2;
  drop.apply(y, mask2);
  if (c) c->dec_drop = std::move(mask2);
  for (std::size_t l = 0; l < p.decoder.size(); ++l) {
    decoder_layer(y, memory, p.decoder[l], heads, drop, c ? &c->dec[l] : nullptr);
    check_finite(y, "decoder layer " + std::to_string(l));
  }
  Mat<S> out = rms_norm(y, p.decoder_norm, c ? &c->dec_norm : nullptr);
  const S logit_scale = S(1) / std::sqrt(static_cast<S>(p.config.d_model));
  const Mat<S>& proj = p.config.tie_embeddings ? p.embedding : p.output;
  Mat<S> logits = (out * proj.transpose()) * logit_scale;
  check_finite(logits, "output projection");
  if (c) {
    c->memory = std::move(memory);
    c->dec_out = std::move(out);
  }
  return logits;
}

// Log-softmax in place; returns per-token log-probabilities of `target`.
template <typename S>
std::vector<S> log_probs(Mat<S>& logits, std::span<const TokenId> target) {
  std::vector<S> out(target.size());
  for (Index t = 0; t < logits.rows(); ++t) {
    auto row = logits.row(t);
    const S m = row.maxCoeff();
    const S lse = m + std::log((row.array() - m).exp().sum());
    row.array() -= lse;
    out[static_cast<std::size_t>(t)] = row(target[static_cast<std::size_t>(t)]);
  }
  return out;
}

template <typename S>
void run_backward(const ModelParams<S>& p, std::span<const TokenId> input,
                  std::span<const TokenId> dec_in, const ExampleCache<S>& c,
                  const Mat<S>& dlogits, bool dropout, ModelParams<S>& g) {
  const int heads = p.config.n_heads;
  const S logit_scale = S(1) / std::sqrt(static_cast<S>(p.config.d_model));
  const bool tied = p.config.tie_embeddings;
  Mat<S>& dproj = tied ? g.embedding : g.output;
  dproj.noalias() += (dlogits.transpose() * c.dec_out) * logit_scale;
  Mat<S> dout = (dlogits * (tied ? p.embedding : p.output)) * logit_scale;
  Mat<S> dy = rms_norm_backward(dout, p.decoder_norm, c.dec_norm, g.decoder_norm);
  Mat<S> dmemory = Mat<S>::Zero(c.memory.rows(), c.memory.cols());
  for (std::size_t l = p.decoder.size(); l-- > 0;) {
    decoder_layer_backward(dy, c.memory, p.decoder[l], heads, c.dec[l], dropout,
                           g.decoder[l], dmemory);
  }
  if (dropout) dy.array() *= c.dec_drop.array();
  embed_backward(p, dec_in, dy, g.embedding);

  Mat<S> dx = rms_norm_backward(dmemory, p.encoder_norm, c.enc_norm, g.encoder_norm);
  for (std::size_t l = p.encoder.size(); l-- > 0;) {
    encoder_layer_backward(dx, p.encoder[l], heads, c.enc[l], dropout, g.encoder[l]);
  }
  if (dropout) dx.array() *= c.enc_drop.array();
  embed_backward(p, input, dx, g.embedding);
}

template <typename S>
LossOutput<S> batch_loss(const ModelParams<S>& params, const Batch& batch,
                         const ForwardOptions& options, ModelParams<S>* grads) {
  LossOutput<S> out;
  out.token_log_probs.resize(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) out.num_tokens += batch.target_lengths[i];
  if (grads) *grads = params.zeros_like();
  if (out.num_tokens == 0) return out;
  const S inv_n = S(1) / static_cast<S>(out.num_tokens);
  S total = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto target = batch.target(i);
    if (target.empty()) continue;
    const auto input = batch.input(i);
    const auto dec_in = shift_right(target);
    Rng rng(derive_seed(options.dropout_seed, i));
    Dropout<S> drop{options.dropout_rate, &rng};
    ExampleCache<S> cache;
    Mat<S> logits = run_forward(params, input, dec_in, drop, grads ? &cache : nullptr);
    out.token_log_probs[i] = log_probs(logits, target);
    for (S lp : out.token_log_probs[i]) total -= lp;
    if (grads) {
      // logits now hold log-probabilities.
      Mat<S> dlogits = logits.array().exp();
      for (std::size_t t = 0; t < target.size(); ++t) {
        dlogits(static_cast<Index>(t), target[t]) -= S(1);
      }
      dlogits *= inv_n;
      run_backward(params, input, dec_in, cache, dlogits, drop.active(), *grads);
    }
  }
  out.loss = total * inv_n;
  if (!std::isfinite(static_cast<double>(out.loss))) {
    throw NumericError("loss", "non-finite loss");
  }
  return out;
}

template <typename S>
TokenId argmax_lowest(const RowVec<S>& logits) {
  Index best = 0;
  for (Index v = 1; v < logits.size(); ++v) {
    if (logits(v) > logits(best)) best = v;
  }
  return static_cast<TokenId>(best);
}

}  // namespace

void ModelConfig::validate() const {
  if (d_model <= 0 || n_heads <= 0 || n_enc_layers <= 0 || n_dec_layers <= 0 ||
      d_ff <= 0 || vocab_size <= 0 || max_positions <= 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (d_model % n_heads != 0) {
    throw ConfigError("d_model " + std::to_string(d_model) +
                      " is not divisible by n_heads " + std::to_string(n_heads));
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("dropout_rate must lie in [0, 1)");
  }
}

template <typename S>
std::vector<TensorRef<S>> ModelParams<S>::tensors() {
  std::vector<TensorRef<S>> out;
  visit_tensors(*this, [&](std::string name, auto& t) {
    out.push_back({std::move(name), t.data(), t.size()});
  });
  return out;
}

template <typename S>
std::vector<ConstTensorRef<S>> ModelParams<S>::tensors() const {
  std::vector<ConstTensorRef<S>> out;
  visit_tensors(*this, [&](std::string name, const auto& t) {
    out.push_back({std::move(name), t.data(), t.size()});
  });
  return out;
}

template <typename S>
ModelParams<S> ModelParams<S>::zeros_like() const {
  return shaped_zeros<S>(config);
}

template <typename S>
Eigen::Index ModelParams<S>::num_parameters() const {
  Eigen::Index n = 0;
  for (const auto& t : tensors()) n += t.size;
  return n;
}

template <typename S>
bool ModelParams<S>::all_finite() const {
  bool ok = true;
  visit_tensors(*this, [&](const std::string&, const auto& t) {
    ok = ok && t.allFinite();
  });
  return ok;
}

template <typename S>
ModelParams<S> init_params(const ModelConfig& config) {
  config.validate();
  ModelParams<S> p = shaped_zeros<S>(config);
  Rng rng(derive_seed(config.seed, 0x1417ULL));
  const double d = config.d_model;
  visit_tensors(p, [&](const std::string& name, auto& t) {
    if (ends_with(name, "norm")) {
      t.setOnes();
      return;
    }
    double std_dev = 1.0 / std::sqrt(d);
    if (ends_with(name, "ff_out")) std_dev = 1.0 / std::sqrt(config.d_ff);
    for (Index j = 0; j < t.cols(); ++j) {
      for (Index i = 0; i < t.rows(); ++i) {
        t(i, j) = static_cast<S>(rng.normal() * std_dev);
      }
    }
  });
  return p;
}

template <typename S>
LossOutput<S> forward_loss(const ModelParams<S>& params, const Batch& batch,
                           const ForwardOptions& options) {
  return batch_loss<S>(params, batch, options, nullptr);
}

template <typename S>
LossOutput<S> loss_and_grad(const ModelParams<S>& params, const Batch& batch,
                            ModelParams<S>& grads, const ForwardOptions& options) {
  return batch_loss<S>(params, batch, options, &grads);
}

template <typename S>
ModelParams<S> grad(const ModelParams<S>& params, const Batch& batch,
                    const ForwardOptions& options) {
  ModelParams<S> g;
  loss_and_grad(params, batch, g, options);
  return g;
}

template <typename S>
Matrix<S> decoder_logits(const ModelParams<S>& params,
                         std::span<const TokenId> input,
                         std::span<const TokenId> target) {
  const auto dec_in = shift_right(target);
  Dropout<S> none;
  return run_forward<S>(params, input, dec_in, none, nullptr);
}

template <typename S>
std::vector<TokenId> greedy_decode(const ModelParams<S>& p,
                                   std::span<const TokenId> input,
                                   std::size_t max_len) {
  const auto& cfg = p.config;
  const int d = cfg.d_model;
  const int heads = cfg.n_heads;
  const Index dh = d / heads;
  const S attn_scale = S(1) / std::sqrt(static_cast<S>(dh));
  const S emb_scale = std::sqrt(static_cast<S>(d));
  const S logit_scale = S(1) / emb_scale;
  max_len = std::min<std::size_t>(max_len, static_cast<std::size_t>(cfg.max_positions));
  std::vector<TokenId> out;
  if (max_len == 0) return out;

  Dropout<S> none;
  Mat<S> x = embed(p, input);
  for (const auto& layer : p.encoder) encoder_layer<S>(x, layer, heads, none, nullptr);
  const Mat<S> memory = rms_norm<S>(x, p.encoder_norm, nullptr);

  const std::size_t L = p.decoder.size();
  std::vector<Mat<S>> cross_k(L), cross_v(L), self_k(L), self_v(L);
  for (std::size_t l = 0; l < L; ++l) {
    cross_k[l] = memory * p.decoder[l].cross_attn.wk;
    cross_v[l] = memory * p.decoder[l].cross_attn.wv;
    self_k[l].resize(static_cast<Index>(max_len), d);
    self_v[l].resize(static_cast<Index>(max_len), d);
  }
  const auto& pe = positions<S>(static_cast<int>(max_len), d);

  // Attention of a single query row over the first n rows of (k, v).
  auto attend = [&](const RowVec<S>& q, const Mat<S>& k, const Mat<S>& v, Index n) {
    RowVec<S> ctx(d);
    for (int h = 0; h < heads; ++h) {
      RowVec<S> s = (q.segment(h * dh, dh) *
                     k.topRows(n).middleCols(h * dh, dh).transpose()) * attn_scale;
      const S m = s.maxCoeff();
      s = (s.array() - m).exp();
      s /= s.sum();
      ctx.segment(h * dh, dh).noalias() = s * v.topRows(n).middleCols(h * dh, dh);
    }
    return ctx;
  };

  const Mat<S>& proj = cfg.tie_embeddings ? p.embedding : p.output;
  TokenId token = kPadId;
  for (std::size_t t = 0; t < max_len; ++t) {
    const auto ti = static_cast<Index>(t);
    Mat<S> y = p.embedding.row(token) * emb_scale + pe.row(ti);
    for (std::size_t l = 0; l < L; ++l) {
      const auto& dl = p.decoder[l];
      Mat<S> h = rms_norm<S>(y, dl.self_norm, nullptr);
      RowVec<S> q = h * dl.self_attn.wq;
      self_k[l].row(ti) = h * dl.self_attn.wk;
      self_v[l].row(ti) = h * dl.self_attn.wv;
      y += attend(q, self_k[l], self_v[l], ti + 1) * dl.self_attn.wo;
      h = rms_norm<S>(y, dl.cross_norm, nullptr);
      RowVec<S> qc = h * dl.cross_attn.wq;
      y += attend(qc, cross_k[l], cross_v[l], memory.rows()) * dl.cross_attn.wo;
      h = rms_norm<S>(y, dl.ffn_norm, nullptr);
      y += feed_forward<S>(h, dl.ff_in, dl.ff_out, nullptr);
    }
    Mat<S> o = rms_norm<S>(y, p.decoder_norm, nullptr);
    RowVec<S> logits = (o * proj.transpose()) * logit_scale;
    token = argmax_lowest<S>(logits);
    out.push_back(token);
    if (token == kEosId) break;
  }
  return out;
}

#define DOCFORGE_INSTANTIATE(S)                                                \
  template struct ModelParams<S>;                                              \
  template ModelParams<S> init_params<S>(const ModelConfig&);                  \
  template LossOutput<S> forward_loss<S>(const ModelParams<S>&, const Batch&,  \
                                         const ForwardOptions&);               \
  template LossOutput<S> loss_and_grad<S>(const ModelParams<S>&, const Batch&, \
                                          ModelParams<S>&,                     \
                                          const ForwardOptions&);              \
  template ModelParams<S> grad<S>(const ModelParams<S>&, const Batch&,         \
                                  const ForwardOptions&);                      \
  template Matrix<S> decoder_logits<S>(const ModelParams<S>&,                  \
                                       std::span<const TokenId>,               \
                                       std::span<const TokenId>);              \
  template std::vector<TokenId> greedy_decode<S>(                              \
      const ModelParams<S>&, std::span<const TokenId>, std::size_t);

DOCFORGE_INSTANTIATE(float)
DOCFORGE_INSTANTIATE(double)

#undef DOCFORGE_INSTANTIATE

}  // namespace docforge
