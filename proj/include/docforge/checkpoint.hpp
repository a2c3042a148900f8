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

#ifndef DOCFORGE_CHECKPOINT_HPP_
#define DOCFORGE_CHECKPOINT_HPP_

#include <optional>
#include <string>

#include "docforge/model.hpp"
#include "docforge/optim.hpp"

namespace docforge {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary layout (little endian):
//   "DFCKPT\0\0", u32 version, u32 scalar bytes,
//   config (7 x i32, f64 dropout, u64 seed, u32 tied),
//   i64 step, u32 schedule kind, f64 value, i64 warmup,
//   4 x f64 adam settings, u32 has_optimizer,
//   u64 tensor count, then per tensor: u32 name length, name, u64 size, data;
//   the two moment tensor lists follow in the same form when present.
template <typename Scalar>
struct Checkpoint {
  ModelParams<Scalar> params;
  std::optional<OptimState<Scalar>> optim;
};

template <typename Scalar>
void save_checkpoint(const std::string& path, const ModelParams<Scalar>& params,
                     const OptimState<Scalar>* optim);

// Throws ParseError on a malformed or mismatched file.
template <typename Scalar>
Checkpoint<Scalar> load_checkpoint(const std::string& path);

}  // namespace docforge

#endif  // DOCFORGE_CHECKPOINT_HPP_
