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
#include <vector>

#include "d2c/cost.hpp"
#include "d2c/environment.hpp"
#include "d2c/estimation.hpp"
#include "d2c/trajectory.hpp"

namespace d2c {

// Feedforward k_t and feedback K_t for t = 0..N-1.
struct GainSchedule {
  VectorSeq k;
  MatrixSeq K;

  int horizon() const { return static_cast<int>(K.size()); }
  static GainSchedule zeros(int N, int n_x, int n_u);
};

struct IlqrSettings {
  // The first trial is a full Newton step; see README for why the line
  // search does not start below 1.
  double alpha0 = 1.0;
  double alpha_decay = 0.5;
  double alpha_min = 1e-4;
  double mu0 = 1e-6;
  double mu_grow = 10.0;
  double mu_shrink = 0.5;
  double mu_min = 1e-9;
  double mu_max = 1e10;
  double conv_eps = 1e-3;
  int max_iters = 100;
  int max_backtracks = 14;
  // Optional sufficient-decrease test: accept only if the actual reduction
  // is at least armijo_c times the predicted one.
  bool armijo = false;
  double armijo_c = 1e-4;
  LinearizationOptions linearization;

  void validate() const;
};

// Result of one backward sweep. On failure `failed_t` names the timestep
// whose Q_uu was not positive definite.
struct BackwardPassResult {
  bool success = false;
  int failed_t = -1;
  GainSchedule gains;
  VectorSeq Vx;   // N + 1 entries
  MatrixSeq Vxx;  // N + 1 entries
  // Predicted change for step alpha is alpha dV1 + alpha^2 dV2.
  double dV1 = 0.0;
  double dV2 = 0.0;

  double expected_change(double alpha) const { return alpha * dV1 + alpha * alpha * dV2; }
};

// Regularized iLQR backward pass. mu enters as J_xx' + mu I in Q_ux and
// Q_uu only.
BackwardPassResult backward_pass(const LinearizationSchedule& lin, const Trajectory& traj,
                                 const CostModel& cost, double mu);

// u_t = u_prev_t + alpha k_t + K_t (x_t - x_prev_t) through the noiseless
// environment. A non-finite state yields cost = +inf and a partial,
// inconsistent trajectory.
Trajectory forward_pass(const Environment& env, const CostModel& cost, const Trajectory& prev,
                        const GainSchedule& gains, double alpha);

struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;
  std::uint64_t env_evals = 0;  // cumulative
  double alpha = 0.0;           // 0 when no step was taken
  double mu = 0.0;
  bool accepted = false;
};

struct IlqrReport {
  int iterations = 0;
  bool converged = false;
  std::string message;
  // Entry 0 is the initial rollout.
  std::vector<IterationRecord> history;
  std::uint64_t env_eval_count = 0;
  Trajectory trajectory;
  // Gains from a final unregularized backward pass at the returned nominal.
  GainSchedule gains;
  BackwardPassResult value;
  LinearizationSchedule linearization;
  double final_mu = 0.0;

  std::vector<double> cost_history() const;
};

IlqrReport ilqr_solve(const Environment& env, const CostModel& cost, const Vector& x0,
                      const VectorSeq& u_init, const IlqrSettings& settings);

}  // namespace d2c
