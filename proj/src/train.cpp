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

#include "docforge/train.hpp"

#include <cstdio>
#include <fstream>

#include "docforge/errors.hpp"
#include "docforge/rng.hpp"

namespace docforge {

template <typename S>
std::vector<LossPoint> train(ModelParams<S>& params, BatchStream& stream,
                             OptimState<S>& optim, const TrainOptions<S>& options) {
  if (options.total_steps < 1) throw ContractError("train: total_steps must be >= 1");
  if (stream.next_step() != optim.step + 1) {
    throw ContractError("train: batch stream is at step " +
                        std::to_string(stream.next_step()) +
                        " but the optimizer expects step " +
                        std::to_string(optim.step + 1));
  }
  std::vector<LossPoint> curve;
  ModelParams<S> grads = params.zeros_like();
  double initial = -1.0;
  std::int64_t above = 0;
  for (std::int64_t i = 0; i < options.total_steps; ++i) {
    const std::int64_t step = optim.step + 1;
    const Batch batch = stream.next();
    ForwardOptions fwd{params.config.dropout_rate,
                       derive_seed(params.config.seed, static_cast<std::uint64_t>(step),
                                   0xd80ULL)};
    const auto out = loss_and_grad(params, batch, grads, fwd);
    const double loss = static_cast<double>(out.loss);
    const double lr = apply_update(params, grads, optim);
    if (initial < 0.0) initial = loss;
    if (loss > options.divergence_factor * initial) {
      if (++above >= options.divergence_patience) {
        throw DivergenceError("loss " + std::to_string(loss) + " at step " +
                              std::to_string(step) + " has exceeded " +
                              std::to_string(options.divergence_factor) +
                              "x the initial loss " + std::to_string(initial) +
                              " for " + std::to_string(above) + " steps");
      }
    } else {
      above = 0;
    }
    if (options.log_every > 0 && step % options.log_every == 0) {
      curve.push_back({step, lr, loss});
      if (options.on_log) options.on_log(curve.back());
    }
    if (options.checkpoint_every > 0 && step % options.checkpoint_every == 0 &&
        options.on_checkpoint) {
      options.on_checkpoint(step, params, optim);
    }
  }
  return curve;
}

void write_loss_curve(const std::string& path, const std::vector<LossPoint>& curve,
                      bool append) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  if (!append) out << "step\tlr\tloss\n";
  char buf[96];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof(buf), "%lld\t%.9g\t%.6f\n",
                  static_cast<long long>(p.step), p.lr, p.loss);
    out << buf;
  }
}

template std::vector<LossPoint> train<float>(ModelParams<float>&, BatchStream&,
                                             OptimState<float>&,
                                             const TrainOptions<float>&);
template std::vector<LossPoint> train<double>(ModelParams<double>&, BatchStream&,
                                              OptimState<double>&,
                                              const TrainOptions<double>&);

}  // namespace docforge
