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

#include <cmath>

#include "docforge/errors.hpp"
#include "docforge/optim.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace docforge;

TEST_SUITE("optim") {

TEST_CASE("inverse square root schedule") {
  const auto unit = LrSchedule::inverse_sqrt(1.0);
  CHECK(unit.rate(1) == 1.0);
  CHECK(unit.rate(4) == 0.5);
  CHECK(unit.rate(100) == doctest::Approx(0.1));
  const auto s = LrSchedule::inverse_sqrt(0.01);
  CHECK(s.rate(1) == doctest::Approx(0.01));
  CHECK(s.rate(4) == doctest::Approx(0.005));
  CHECK(s.rate(100) == doctest::Approx(0.001));
  CHECK(s.rate(0) == doctest::Approx(0.01));
  for (std::int64_t n = 1; n < 500; ++n) CHECK(s.rate(n + 1) <= s.rate(n));
}

TEST_CASE("warmup holds the rate flat") {
  const auto s = LrSchedule::inverse_sqrt(1.0, 16);
  CHECK(s.rate(1) == doctest::Approx(0.25));
  CHECK(s.rate(16) == doctest::Approx(0.25));
  CHECK(s.rate(64) == doctest::Approx(0.125));
}

TEST_CASE("constant schedule") {
  const auto s = LrSchedule::constant(0.001);
  CHECK(s.rate(1) == 0.001);
  CHECK(s.rate(123456) == 0.001);
}

TEST_CASE("schedule names round trip") {
  for (auto k : {LrSchedule::Kind::InverseSqrt, LrSchedule::Kind::Constant}) {
    CHECK(parse_schedule_kind(schedule_kind_name(k)) == k);
  }
  CHECK_THROWS_AS(parse_schedule_kind("cosine"), ConfigError);
}

TEST_CASE("first Adam step moves each weight by the learning rate") {
  auto params = init_params<double>(testing::tiny_config());
  const auto before = params;
  auto g = params.zeros_like();
  g.embedding(5, 3) = 1e-3;
  g.embedding(6, 2) = -2e-3;
  AdamConfig adam;
  adam.clip_norm = 0.0;
  auto state = OptimState<double>::create(params, LrSchedule::constant(0.01), adam);
  const double lr = apply_update(params, g, state);
  CHECK(lr == 0.01);
  CHECK(state.step == 1);
  // Bias-corrected first step: m/sqrt(v) = sign(g).
  CHECK(params.embedding(5, 3) == doctest::Approx(before.embedding(5, 3) - 0.01));
  CHECK(params.embedding(6, 2) == doctest::Approx(before.embedding(6, 2) + 0.01));
  CHECK(params.embedding(7, 1) == before.embedding(7, 1));
}

TEST_CASE("clipping bounds the global norm") {
  auto params = init_params<double>(testing::tiny_config());
  auto g = params.zeros_like();
  g.embedding(4, 0) = 30.0;
  g.embedding(4, 1) = 40.0;
  CHECK(global_norm(g) == doctest::Approx(50.0));
  auto state = OptimState<double>::create(params, LrSchedule::constant(0.1));
  apply_update(params, g, state);
  // After clipping the gradient is (0.6, 0.8); the moment keeps 0.1 of it.
  CHECK(state.first_moment.embedding(4, 0) == doctest::Approx(0.06));
  CHECK(state.first_moment.embedding(4, 1) == doctest::Approx(0.08));
}

}  // TEST_SUITE
