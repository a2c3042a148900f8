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

#include "docforge/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "docforge/errors.hpp"

namespace docforge {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'D', 'F', 'C', 'K', 'P', 'T', 0, 0};

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot write " + path);
  }
  template <typename T>
  void put(T value) {
    out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }
  void bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }
  void finish(const std::string& path) {
    out_.flush();
    if (!out_) throw Error("write failed for " + path);
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw Error("cannot open checkpoint " + path);
  }
  template <typename T>
  T get() {
    T value{};
    bytes(&value, sizeof(T));
    return value;
  }
  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw ParseError(0, path_ + ": truncated checkpoint");
    }
  }
  const std::string& path() const { return path_; }

 private:
  std::ifstream in_;
  std::string path_;
};

template <typename S>
void write_tensors(Writer& w, const ModelParams<S>& p) {
  const auto ts = p.tensors();
  w.put<std::uint64_t>(ts.size());
  for (const auto& t : ts) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.name.size()));
    w.bytes(t.name.data(), t.name.size());
    w.put<std::uint64_t>(static_cast<std::uint64_t>(t.size));
    w.bytes(t.data, sizeof(S) * static_cast<std::size_t>(t.size));
  }
}

template <typename S>
void read_tensors(Reader& r, ModelParams<S>& p) {
  auto ts = p.tensors();
  const auto count = r.get<std::uint64_t>();
  if (count != ts.size()) {
    throw ParseError(0, r.path() + ": expected " + std::to_string(ts.size()) +
                            " tensors, found " + std::to_string(count));
  }
  for (auto& t : ts) {
    const auto len = r.get<std::uint32_t>();
    if (len > 4096) throw ParseError(0, r.path() + ": corrupt tensor name");
    std::string name(len, '\0');
    r.bytes(name.data(), len);
    const auto size = r.get<std::uint64_t>();
    if (name != t.name || size != static_cast<std::uint64_t>(t.size)) {
      throw ParseError(0, r.path() + ": tensor " + name + " does not match " + t.name);
    }
    r.bytes(t.data, sizeof(S) * static_cast<std::size_t>(size));
  }
}

}  // namespace

template <typename S>
void save_checkpoint(const std::string& path, const ModelParams<S>& params,
                     const OptimState<S>* optim) {
  Writer w(path);
  w.bytes(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint32_t>(sizeof(S));
  const auto& c = params.config;
  for (int v : {c.d_model, c.n_heads, c.n_enc_layers, c.n_dec_layers, c.d_ff,
                c.vocab_size, c.max_positions}) {
    w.put<std::int32_t>(v);
  }
  w.put<double>(c.dropout_rate);
  w.put<std::uint64_t>(c.seed);
  w.put<std::uint32_t>(c.tie_embeddings ? 1 : 0);
  const OptimState<S> none{};
  const OptimState<S>& o = optim ? *optim : none;
  w.put<std::int64_t>(o.step);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(o.schedule.kind));
  w.put<double>(o.schedule.value);
  w.put<std::int64_t>(o.schedule.warmup_steps);
  w.put<double>(o.adam.beta1);
  w.put<double>(o.adam.beta2);
  w.put<double>(o.adam.epsilon);
  w.put<double>(o.adam.clip_norm);
  w.put<std::uint32_t>(optim ? 1 : 0);
  write_tensors(w, params);
  if (optim) {
    write_tensors(w, optim->first_moment);
    write_tensors(w, optim->second_moment);
  }
  w.finish(path);
}

template <typename S>
Checkpoint<S> load_checkpoint(const std::string& path) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError(0, path + ": not a checkpoint file");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw ParseError(0, path + ": unsupported checkpoint version " +
                            std::to_string(version));
  }
  const auto scalar_bytes = r.get<std::uint32_t>();
  if (scalar_bytes != sizeof(S)) {
    throw ParseError(0, path + ": checkpoint stores " + std::to_string(scalar_bytes) +
                            "-byte scalars, expected " + std::to_string(sizeof(S)));
  }
  ModelConfig c;
  c.d_model = r.get<std::int32_t>();
  c.n_heads = r.get<std::int32_t>();
  c.n_enc_layers = r.get<std::int32_t>();
  c.n_dec_layers = r.get<std::int32_t>();
  c.d_ff = r.get<std::int32_t>();
  c.vocab_size = r.get<std::int32_t>();
  c.max_positions = r.get<std::int32_t>();
  c.dropout_rate = r.get<double>();
  c.seed = r.get<std::uint64_t>();
  c.tie_embeddings = r.get<std::uint32_t>() != 0;
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ParseError(0, path + ": " + e.what());
  }
  OptimState<S> o;
  o.step = r.get<std::int64_t>();
  const auto kind = r.get<std::uint32_t>();
  if (kind > 1) throw ParseError(0, path + ": bad schedule kind");
  o.schedule.kind = static_cast<LrSchedule::Kind>(kind);
  o.schedule.value = r.get<double>();
  o.schedule.warmup_steps = r.get<std::int64_t>();
  o.adam.beta1 = r.get<double>();
  o.adam.beta2 = r.get<double>();
  o.adam.epsilon = r.get<double>();
  o.adam.clip_norm = r.get<double>();
  const bool has_optim = r.get<std::uint32_t>() != 0;

  Checkpoint<S> ck;
  ModelParams<S> shell;
  shell.config = c;
  ck.params = shell.zeros_like();
  read_tensors(r, ck.params);
  if (has_optim) {
    o.first_moment = ck.params.zeros_like();
    o.second_moment = ck.params.zeros_like();
    read_tensors(r, o.first_moment);
    read_tensors(r, o.second_moment);
    ck.optim = std::move(o);
  }
  return ck;
}

template void save_checkpoint<float>(const std::string&, const ModelParams<float>&,
                                     const OptimState<float>*);
template void save_checkpoint<double>(const std::string&, const ModelParams<double>&,
                                      const OptimState<double>*);
template Checkpoint<float> load_checkpoint<float>(const std::string&);
template Checkpoint<double> load_checkpoint<double>(const std::string&);

}  // namespace docforge
