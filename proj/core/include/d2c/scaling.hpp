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
#include <string>
#include <vector>

#include "d2c/closed_loop.hpp"

namespace d2c {

enum class Verdict { kConsistent, kInconsistent, kInconclusive, kDegenerate };

std::string to_string(Verdict v);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int n_points = 0;
};

// Ordinary least squares of log(value) on log(eps). With standard errors
// given, the confidence interval comes from a parametric bootstrap that
// redraws every value from N(value, stderr^2); without them it collapses to
// the point estimate.
SlopeFit loglog_slope_fit(const std::vector<double>& eps, const std::vector<double>& values,
                          const std::vector<double>& stderrs = {}, int bootstrap = 1000,
                          std::uint64_t seed = 0, double confidence = 0.95);

struct ScalingPoint {
  double epsilon = 0.0;
  double quantity = 0.0;
  double stderr_ = 0.0;
  bool included = false;
};

struct ScalingStudy {
  std::string name;
  double expected_slope = 0.0;
  // Fit is consistent when |slope - expected| <= tolerance * expected.
  double tolerance = 0.25;
  double baseline_cost = 0.0;  // exact eps = 0 cost of the policy
  std::vector<ScalingPoint> points;
  std::optional<SlopeFit> fit;
  Verdict verdict = Verdict::kInconclusive;
  std::string note;
  std::vector<RolloutStats> stats;
  // Std study with a linearization: predicted Std(J) / eps as eps -> 0.
  std::optional<double> first_order_coefficient;
};

struct ScalingOptions {
  int n_samples = 2000;
  int workers = 1;
  std::uint64_t seed = 0;
  int bootstrap = 1000;
  double tolerance = 0.25;
  // Points with |quantity| < floor_sigmas * stderr are excluded from the fit.
  double floor_sigmas = 3.0;
};

// |E[J] - J(eps = 0)| against eps in state-additive noise; expected slope 2.
ScalingStudy mean_cost_scaling(const Environment& env, const CostModel& cost, const Policy& policy,
                               const std::vector<double>& epsilons, const ScalingOptions& options);

// Std(J) against eps; expected slope 1, or 2 when the first-order cost
// sensitivity of the closed loop vanishes along the nominal (reported as
// degenerate). With a linearization of the nominal the test uses the
// closed-loop costate; otherwise the per-step gradients C_t.
ScalingStudy variance_scaling(const Environment& env, const CostModel& cost, const Policy& policy,
                              const std::vector<double>& epsilons, const ScalingOptions& options,
                              const LinearizationSchedule* lin = nullptr);

// |E[J(nonlinear)] - E[J(linear truncation)]| from paired samples sharing
// noise streams; expected slope 4. Throws if any pair drew different noise.
ScalingStudy linear_truncation_gap(const Environment& env, const CostModel& cost,
                                   const Policy& policy_nl, const std::vector<double>& epsilons,
                                   const ScalingOptions& options);

}  // namespace d2c
