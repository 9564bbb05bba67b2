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
#include <limits>
#include <optional>
#include <vector>

#include "d2c/cost.hpp"
#include "d2c/environment.hpp"
#include "d2c/feedback.hpp"
#include "d2c/ilqr.hpp"
#include "d2c/noise.hpp"
#include "d2c/trajectory.hpp"

namespace d2c {

// u_t(x) = u_t + K_t dx [+ (dx' M_t[j] dx)_j], dx = x - x_t.
struct Policy {
  Trajectory nominal;
  GainSchedule gains;
  // Optional quadratic term: M[t][j] is n_x x n_x for control channel j.
  std::vector<MatrixSeq> M;
  // Optional deterministic offset added to the nominal initial state.
  Vector initial_offset;

  int horizon() const { return nominal.horizon(); }
  bool has_quadratic_term() const { return !M.empty(); }
  Vector control(int t, const Vector& x) const;
  // Same policy with the quadratic term removed.
  Policy linear_truncation() const;
  void validate(const Environment& env) const;
};

struct EpisodeResult {
  double cost = 0.0;
  double terminal_error = 0.0;
  bool diverged = false;
  bool success = false;
  int replans = 0;
  bool replan_failed = false;
  std::uint64_t extra_evals = 0;
  // FNV-1a digest of every normal drawn during the episode.
  std::uint64_t noise_digest = 0;
  std::optional<Trajectory> trajectory;
};

// |x_N - goal| inside `box` componentwise. Always true without a box.
bool within_box(const Vector& x, const Vector& goal, const std::optional<Vector>& box);

// States with any |x_i| above this are treated as a blown-up simulation.
inline constexpr double kDivergenceBound = 1e6;

// One noisy closed-loop episode. A non-finite state, or one beyond
// kDivergenceBound, marks the episode diverged with cost +inf.
EpisodeResult closed_loop_rollout(const Environment& env, const CostModel& cost,
                                  const Policy& policy, const NoiseModel& noise,
                                  std::uint64_t sample_id, bool keep_trajectory = false);

struct RolloutStats {
  double epsilon = 0.0;
  int n_samples = 0;
  int n_diverged = 0;
  double mean_cost = 0.0;
  double var_cost = 0.0;  // unbiased
  double mean_terminal_error = 0.0;
  double std_terminal_error = 0.0;
  double success_rate = 0.0;
  double divergence_rate = 0.0;
  // Replanning only (NaN otherwise).
  double replan_mean = std::numeric_limits<double>::quiet_NaN();
  int replan_failures = 0;
  std::uint64_t extra_evals = 0;
  std::vector<EpisodeResult> samples;  // filled when requested

  double cost_stderr() const;
  double terminal_error_stderr() const;
};

// Aggregates episodes in sample order: the result is independent of the
// worker count. Diverged samples are excluded from the moments. success_rate
// is NaN unless `success_defined`; replan_mean is set when `replanning`.
RolloutStats summarize(double epsilon, std::vector<EpisodeResult> episodes, bool keep_samples,
                       bool success_defined, bool replanning);

RolloutStats monte_carlo_eval(const Environment& env, const CostModel& cost, const Policy& policy,
                              const NoiseModel& noise, int n_samples, int workers = 1,
                              bool keep_samples = false);

// One RolloutStats per epsilon (ascending), all with `noise`'s mode and seed.
std::vector<RolloutStats> noise_sweep(const Environment& env, const CostModel& cost,
                                      const Policy& policy, const NoiseModel& noise,
                                      const std::vector<double>& epsilons, int n_samples,
                                      int workers = 1);

struct ReplanSettings {
  double trigger_threshold = 1.0;
  int max_replans = 10;
  // Optional per-component weights for the trigger norm ||W (x - x_t)||.
  std::optional<Vector> weights;
  IlqrSettings ilqr;
  FeedbackSettings feedback;
  std::uint64_t seed = 0;

  void validate() const;
};

// Closed loop with shrinking-horizon replanning: when the deviation from the
// current nominal exceeds the threshold, iLQR is re-solved from the current
// state over the remaining steps, warm-started from the controls of the
// current closed loop simulated noise-free from that state.
EpisodeResult replan_rollout(const Environment& env, const CostModel& cost, const Policy& policy,
                             const NoiseModel& noise, const ReplanSettings& replan,
                             std::uint64_t sample_id);

RolloutStats replan_eval(const Environment& env, const CostModel& cost, const Policy& policy,
                         const NoiseModel& noise, const ReplanSettings& replan, int n_samples,
                         int workers = 1, bool keep_samples = false);

}  // namespace d2c
