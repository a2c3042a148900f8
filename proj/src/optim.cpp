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

#include "docforge/optim.hpp"

#include <algorithm>
#include <cmath>

#include "docforge/errors.hpp"

namespace docforge {

double LrSchedule::rate(std::int64_t n) const {
  if (kind == Kind::Constant) return value;
  n = std::max<std::int64_t>({n, 1, warmup_steps});
  return value / std::sqrt(static_cast<double>(n));
}

std::string_view schedule_kind_name(LrSchedule::Kind kind) {
  return kind == LrSchedule::Kind::Constant ? "constant" : "inverse_sqrt";
}

LrSchedule::Kind parse_schedule_kind(std::string_view name) {
  if (name == "constant") return LrSchedule::Kind::Constant;
  if (name == "inverse_sqrt") return LrSchedule::Kind::InverseSqrt;
  throw ConfigError("unknown schedule '" + std::string(name) +
                    "' (expected inverse_sqrt or constant)");
}

template <typename S>
OptimState<S> OptimState<S>::create(const ModelParams<S>& params,
                                    LrSchedule schedule, AdamConfig adam) {
  OptimState<S> st;
  st.schedule = schedule;
  st.adam = adam;
  st.first_moment = params.zeros_like();
  st.second_moment = params.zeros_like();
  return st;
}

template <typename S>
double global_norm(const ModelParams<S>& tensors) {
  double sum = 0.0;
  for (const auto& t : tensors.tensors()) {
    for (Eigen::Index i = 0; i < t.size; ++i) {
      sum += static_cast<double>(t.data[i]) * static_cast<double>(t.data[i]);
    }
  }
  return std::sqrt(sum);
}

template <typename S>
double apply_update(ModelParams<S>& params, const ModelParams<S>& grads,
                    OptimState<S>& state) {
  ++state.step;
  const double lr = state.schedule.rate(state.step);
  const auto& a = state.adam;
  double clip = 1.0;
  if (a.clip_norm > 0.0) {
    const double norm = global_norm(grads);
    if (norm > a.clip_norm) clip = a.clip_norm / norm;
  }
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(a.beta1, t);
  const double bias2 = 1.0 - std::pow(a.beta2, t);
  auto p = params.tensors();
  auto g = grads.tensors();
  auto m = state.first_moment.tensors();
  auto v = state.second_moment.tensors();
  if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size()) {
    throw ContractError("optimizer state does not match parameters");
  }
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k].size != g[k].size) throw ContractError("gradient shape mismatch: " + p[k].name);
    for (Eigen::Index i = 0; i < p[k].size; ++i) {
      const double gi = static_cast<double>(g[k].data[i]) * clip;
      const double mi = a.beta1 * m[k].data[i] + (1.0 - a.beta1) * gi;
      const double vi = a.beta2 * v[k].data[i] + (1.0 - a.beta2) * gi * gi;
      m[k].data[i] = static_cast<S>(mi);
      v[k].data[i] = static_cast<S>(vi);
      const double update = lr * (mi / bias1) / (std::sqrt(vi / bias2) + a.epsilon);
      p[k].data[i] = static_cast<S>(p[k].data[i] - update);
    }
  }
  return lr;
}

template struct OptimState<float>;
template struct OptimState<double>;
template double apply_update<float>(ModelParams<float>&, const ModelParams<float>&,
                                    OptimState<float>&);
template double apply_update<double>(ModelParams<double>&, const ModelParams<double>&,
                                     OptimState<double>&);
template double global_norm<float>(const ModelParams<float>&);
template double global_norm<double>(const ModelParams<double>&);

}  // namespace docforge
