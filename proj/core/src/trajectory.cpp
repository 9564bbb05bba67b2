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

#include "d2c/trajectory.hpp"

#include <cmath>

namespace d2c {

std::string to_string(NoiseMode mode) {
  return mode == NoiseMode::kStateAdditive ? "state_additive" : "control_channel";
}

NoiseMode parse_noise_mode(const std::string& s) {
  if (s == "state_additive") return NoiseMode::kStateAdditive;
  if (s == "control_channel") return NoiseMode::kControlChannel;
  throw InvalidArgument("unknown noise mode '" + s + "' (expected state_additive or control_channel)");
}

Vector step_noisy(const Environment& env, const Vector& x, const Vector& u,
                  const NoiseModel& noise, std::uint64_t t, std::uint64_t sample,
                  Fnv1a* digest) {
  if (noise.epsilon < 0.0) throw InvalidArgument("noise epsilon must be non-negative");
  if (noise.epsilon == 0.0) return env.step(x, u);

  NormalStream stream(noise.key(sample, t));
  if (noise.mode == NoiseMode::kStateAdditive) {
    const Vector w = stream.normal_vector(env.n_x());
    if (digest) digest->update(w);
    Vector next = env.step(x, u);
    next += (noise.epsilon * std::sqrt(env.dt())) * w;
    return next;
  }
  const Vector w = stream.normal_vector(env.n_u());
  if (digest) digest->update(w);
  const Vector u_noisy = u + noise.epsilon * env.u_max().cwiseProduct(w);
  return env.step(x, u_noisy);
}

double trajectory_cost(const CostModel& cost, const VectorSeq& states, const VectorSeq& controls) {
  double total = 0.0;
  for (std::size_t t = 0; t < controls.size(); ++t) total += cost.stage(states[t], controls[t]);
  total += cost.terminal(states.back());
  return total;
}

namespace {

Trajectory rollout_impl(const Environment& env, const Vector& x0, const VectorSeq& controls,
                        const CostModel& cost, const NoiseModel* noise, std::uint64_t sample) {
  if (controls.empty()) throw InvalidArgument("rollout: need at least one control");
  if (x0.size() != env.n_x()) throw InvalidArgument("rollout: x0 has wrong dimension");
  Trajectory traj;
  traj.controls = controls;
  traj.states.reserve(controls.size() + 1);
  traj.states.push_back(x0);
  double total = 0.0;
  for (std::size_t t = 0; t < controls.size(); ++t) {
    const Vector& x = traj.states.back();
    total += cost.stage(x, controls[t]);
    Vector next = noise ? step_noisy(env, x, controls[t], *noise, t, sample)
                        : env.step(x, controls[t]);
    if (!next.allFinite())
      throw NumericalError("rollout: non-finite state at timestep " + std::to_string(t + 1));
    traj.states.push_back(std::move(next));
  }
  total += cost.terminal(traj.states.back());
  traj.cost = total;
  traj.consistent = noise == nullptr || noise->epsilon == 0.0;
  return traj;
}

}  // namespace

Trajectory rollout(const Environment& env, const Vector& x0, const VectorSeq& controls,
                   const CostModel& cost) {
  return rollout_impl(env, x0, controls, cost, nullptr, 0);
}

Trajectory rollout(const Environment& env, const Vector& x0, const VectorSeq& controls,
                   const CostModel& cost, const NoiseModel& noise, std::uint64_t sample) {
  return rollout_impl(env, x0, controls, cost, &noise, sample);
}

}  // namespace d2c
