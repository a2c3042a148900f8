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

#ifndef DOCFORGE_OPTIM_HPP_
#define DOCFORGE_OPTIM_HPP_

#include <cstdint>
#include <string>
#include <string_view>

#include "docforge/model.hpp"

namespace docforge {

struct LrSchedule {
  enum class Kind { InverseSqrt, Constant };

  Kind kind = Kind::InverseSqrt;
  // Base rate for InverseSqrt, the rate itself for Constant.
  double value = 1.0;
  // InverseSqrt holds base/sqrt(warmup) for n < warmup; 0 disables.
  std::int64_t warmup_steps = 0;

  static LrSchedule inverse_sqrt(double base, std::int64_t warmup = 0) {
    return {Kind::InverseSqrt, base, warmup};
  }
  static LrSchedule constant(double rate) { return {Kind::Constant, rate, 0}; }

  // n is clamped to >= 1.
  double rate(std::int64_t n) const;

  bool operator==(const LrSchedule&) const = default;
};

std::string_view schedule_kind_name(LrSchedule::Kind kind);
LrSchedule::Kind parse_schedule_kind(std::string_view name);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-9;
  // Global gradient-norm clip; 0 disables.
  double clip_norm = 1.0;

  bool operator==(const AdamConfig&) const = default;
};

// Adam moments live in tensors congruent with the parameters.
template <typename Scalar>
struct OptimState {
  std::int64_t step = 0;
  LrSchedule schedule;
  AdamConfig adam;
  ModelParams<Scalar> first_moment;
  ModelParams<Scalar> second_moment;

  static OptimState create(const ModelParams<Scalar>& params, LrSchedule schedule,
                           AdamConfig adam = {});
};

// Advances state.step and applies one update; returns the rate used.
template <typename Scalar>
double apply_update(ModelParams<Scalar>& params, const ModelParams<Scalar>& grads,
                    OptimState<Scalar>& state);

template <typename Scalar>
double global_norm(const ModelParams<Scalar>& tensors);

}  // namespace docforge

#endif  // DOCFORGE_OPTIM_HPP_
