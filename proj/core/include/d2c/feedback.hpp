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
#include "d2c/estimation.hpp"
#include "d2c/ilqr.hpp"
#include "d2c/trajectory.hpp"

namespace d2c {

enum class GainMode { kIlqr, kProp2, kSurrogateLqr };

std::string to_string(GainMode mode);
GainMode parse_gain_mode(const std::string& s);

// Cost-to-go expansion about the nominal: gradient rows G_t and Hessians P_t,
// t = 0..N.
struct ValueExpansion {
  std::vector<RowVector> G;
  MatrixSeq P;
};

struct Prop2Result {
  GainSchedule gains;  // k is zero; only K is defined
  ValueExpansion value;
  // ||R u_t dt + B_t' G_{t+1}'|| for each t, and whether every residual is
  // within tolerance.
  std::vector<double> stationarity_residual;
  bool stationary = true;
  // Multiple of I added to S_t (0 when none was needed).
  std::vector<double> regularization;
  // Largest |P - P'| seen before symmetrization, relative to max(1, |P|).
  double max_asymmetry = 0.0;
  std::vector<std::string> warnings;
};

// Second-order feedback recursion about a converged nominal:
//
//   S_t = R dt + B' P_{t+1} B
//   K_t = -S_t^-1 (B' P_{t+1} A + (sum_i G_{t+1}[i] Rxu_i)')
//   P_t = L^xx + A' P_{t+1} A - K_t' S_t K_t + sum_i G_{t+1}[i] Rxx_i
//   G_t = L^x + G_{t+1} A
//
// from G_N = grad c_T, P_N = hess c_T. Requires lin.second_order.
Prop2Result prop2_gains(const LinearizationSchedule& lin, const Trajectory& traj,
                        const CostModel& cost, double stationarity_tol = 1e-3);

// Zero second-order tensors with the shapes prop2_gains expects.
std::vector<SecondOrderTerms> zero_second_order(int N, int n_x, int n_u);

// Final backward-pass feedback of a solve; the feedforward is dropped.
GainSchedule ilqr_gain_extract(const IlqrReport& report);

// Time-varying LQR about the nominal linearization with user weights, in the
// same convention as CostModel (running weights multiplied by dt).
GainSchedule surrogate_lqr_gains(const LinearizationSchedule& lin, const Matrix& Q_s,
                                 const Matrix& R_s, const Matrix& Q_sT, double dt);

// First-order cost sensitivity of the closed loop along the nominal:
// C_t = L^x_t + u_t' R dt K_t for t < N and C_N = grad c_T. When all of these
// vanish the O(eps) cost fluctuation is identically zero.
std::vector<RowVector> linear_cost_gradient(const Trajectory& traj, const CostModel& cost,
                                            const GainSchedule& gains);

// Closed-loop cost-to-go gradient along the nominal:
// Gc_N = C_N, Gc_t = C_t + Gc_{t+1} (A_t + B_t K_t). Under state-additive
// noise the O(eps) cost fluctuation is sum_t eps sqrt(dt) Gc_{t+1} w_t.
std::vector<RowVector> closed_loop_costate(const LinearizationSchedule& lin, const Trajectory& traj,
                                           const CostModel& cost, const GainSchedule& gains);

// sqrt(dt sum_{t<N} |Gc_{t+1}|^2): Std(J) ~ coefficient * eps as eps -> 0.
double first_order_std_coefficient(const std::vector<RowVector>& costate, double dt);

struct FeedbackSettings {
  GainMode mode = GainMode::kIlqr;
  // Surrogate weights; empty matrices fall back to the cost's Q, R, Q_T.
  Matrix Q_s;
  Matrix R_s;
  Matrix Q_sT;
  HessianSettings hessian;
  double stationarity_tol = 1e-3;
};

struct FeedbackResult {
  GainMode mode = GainMode::kIlqr;
  GainSchedule gains;
  std::vector<double> stationarity_residual;
  std::vector<double> regularization;
  std::vector<std::string> warnings;
  std::uint64_t extra_evals = 0;
};

// Builds the closed-loop gains for a finished solve in the requested mode.
// prop2 estimates second-order tensors at the nominal with lls_cd_hessian.
FeedbackResult synthesize_feedback(const Environment& env, const CostModel& cost,
                                   const IlqrReport& report, const FeedbackSettings& settings,
                                   std::uint64_t seed, int workers);

}  // namespace d2c
