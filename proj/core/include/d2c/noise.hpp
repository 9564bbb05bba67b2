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
#include <string>

#include "d2c/environment.hpp"
#include "d2c/random.hpp"

namespace d2c {

enum class NoiseMode {
  // x' = step(x, u) + eps * sqrt(dt) * w
  kStateAdditive,
  // x' = step(x, u + eps * diag(u_max) * w)
  kControlChannel,
};

std::string to_string(NoiseMode mode);
NoiseMode parse_noise_mode(const std::string& s);

struct NoiseModel {
  double epsilon = 0.0;
  NoiseMode mode = NoiseMode::kStateAdditive;
  std::uint64_t seed = 0;

  // Draws for (sample, t) come from this key, so two policies evaluated on
  // the same sample see identical noise.
  StreamKey key(std::uint64_t sample, std::uint64_t t) const {
    return {seed, StreamDomain::kProcessNoise, sample, t, 0};
  }
};

// One noisy transition. With epsilon == 0 this is exactly env.step(x, u) and
// no draws are made. When `digest` is given, the drawn normals are hashed
// into it.
Vector step_noisy(const Environment& env, const Vector& x, const Vector& u,
                  const NoiseModel& noise, std::uint64_t t, std::uint64_t sample,
                  Fnv1a* digest = nullptr);

}  // namespace d2c
