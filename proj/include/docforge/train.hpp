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

#ifndef DOCFORGE_TRAIN_HPP_
#define DOCFORGE_TRAIN_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "docforge/model.hpp"
#include "docforge/optim.hpp"
#include "docforge/pipeline.hpp"

namespace docforge {

struct LossPoint {
  std::int64_t step = 0;
  double lr = 0.0;
  double loss = 0.0;

  bool operator==(const LossPoint&) const = default;
};

template <typename Scalar>
struct TrainOptions {
  std::int64_t total_steps = 1;
  std::int64_t log_every = 10;
  std::int64_t checkpoint_every = 0;
  // Called after every checkpoint_every-th step (global step numbering).
  std::function<void(std::int64_t, const ModelParams<Scalar>&,
                     const OptimState<Scalar>&)>
      on_checkpoint;
  // Called for every recorded loss point.
  std::function<void(const LossPoint&)> on_log;
  double divergence_factor = 10.0;
  std::int64_t divergence_patience = 100;
};

// Runs total_steps updates continuing from optim.step. Dropout masks are
// seeded per global step. Throws DivergenceError when the loss stays above
// divergence_factor x the first loss for divergence_patience steps.
template <typename Scalar>
std::vector<LossPoint> train(ModelParams<Scalar>& params, BatchStream& stream,
                             OptimState<Scalar>& optim,
                             const TrainOptions<Scalar>& options);

// "step\tlr\tloss" with a header row.
void write_loss_curve(const std::string& path, const std::vector<LossPoint>& curve,
                      bool append = false);

}  // namespace docforge

#endif  // DOCFORGE_TRAIN_HPP_
