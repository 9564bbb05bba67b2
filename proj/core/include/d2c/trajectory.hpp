/*
 Copyright 2026 The d2c Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <cstdint>
#include <optional>

#include "d2c/cost.hpp"
#include "d2c/environment.hpp"
#include "d2c/noise.hpp"

namespace d2c {

// Nominal state/control sequence: states has N+1 entries, controls N.
struct Trajectory {
  VectorSeq states;
  VectorSeq controls;
  double cost = 0.0;
  // states[t+1] == step(states[t], controls[t]) for every t.
  bool consistent = false;

  int horizon() const { return static_cast<int>(controls.size()); }
};

// Total cost sum_t c(x_t, u_t) + c_T(x_N) of a given state/control pair.
double trajectory_cost(const CostModel& cost, const VectorSeq& states, const VectorSeq& controls);

// Simulates controls from x0. Without noise the result is flagged
// consistent. Throws NumericalError naming the timestep if a state becomes
// non-finite.
Trajectory rollout(const Environment& env, const Vector& x0, const VectorSeq& controls,
                   const CostModel& cost);
Trajectory rollout(const Environment& env, const Vector& x0, const VectorSeq& controls,
                   const CostModel& cost, const NoiseModel& noise, std::uint64_t sample);

}  // namespace d2c
