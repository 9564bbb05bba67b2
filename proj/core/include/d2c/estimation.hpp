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

#include "d2c/environment.hpp"
#include "d2c/random.hpp"
#include "d2c/trajectory.hpp"

namespace d2c {

// Paired perturbations for one central-difference regression. Column i of
// dY = [dX; dU] is sample i.
struct PerturbationBatch {
  double sigma = 0.0;
  int n_s = 0;
  Matrix dX;  // n_x x n_s
  Matrix dU;  // n_u x n_s
  Matrix dY;  // (n_x + n_u) x n_s
};

// i.i.d. zero-mean Gaussian perturbations with standard deviation sigma,
// optionally scaled per coordinate by `scale` (length n_x + n_u).
PerturbationBatch draw_perturbations(int n_x, int n_u, double sigma, int n_s, NormalStream& stream,
                                     const std::optional<Vector>& scale = std::nullopt);

// || dY dY' / (sigma^2 (n_s - 1)) - I ||_2, the covariance diagnostic.
double gram_identity_deviation(const PerturbationBatch& batch);

struct LlsCdSettings {
  double sigma = 1e-3;
  // 0 selects the default 2 (n_x + n_u).
  int n_s = 0;
  std::optional<Vector> scale;
  double max_condition = 1e12;

  int samples_for(int n_x, int n_u) const { return n_s > 0 ? n_s : 2 * (n_x + n_u); }
};

struct JacobianEstimate {
  Matrix A;
  Matrix B;
  double condition = 0.0;  // of the Gram matrix dY dY'
  int attempts = 1;
  std::uint64_t evaluations = 0;
};

// [A B] = H dY' (dY dY')^-1 with H(:, i) = (step(x+dx_i, u+du_i) -
// step(x-dx_i, u-du_i)) / 2. Uses exactly 2 n_s evaluations per attempt; an
// ill-conditioned Gram matrix triggers one resample before failing.
JacobianEstimate lls_cd_jacobian(const Environment& env, const Vector& x, const Vector& u,
                                 const LlsCdSettings& settings, const StreamKey& key);

// Second derivatives of each output component i of the step map:
// xx[i] (n_x x n_x), xu[i] (n_x x n_u), uu[i] (n_u x n_u).
struct SecondOrderTerms {
  MatrixSeq xx;
  MatrixSeq xu;
  MatrixSeq uu;
};

struct HessianSettings {
  double sigma = 1e-3;
  // 0 selects 2 m, m = (n_x + n_u)(n_x + n_u + 1) / 2.
  int n_s = 0;
  // Refuse systems whose monomial count exceeds this (n_x + n_u <= 12).
  int max_monomials = 78;
};

int hessian_monomial_count(int n_x, int n_u);

// Regresses z = step(+d) + step(-d) - 2 step(nominal) on the quadratic
// monomials [d_j^2, 2 d_j d_k]. Uses 2 n_s + 1 evaluations.
SecondOrderTerms lls_cd_hessian(const Environment& env, const Vector& x, const Vector& u,
                                const HessianSettings& settings, const StreamKey& key);

// Per-timestep linearization along a nominal trajectory.
struct LinearizationSchedule {
  MatrixSeq A;
  MatrixSeq B;
  // Empty unless second-order terms were requested.
  std::vector<SecondOrderTerms> second_order;

  int horizon() const { return static_cast<int>(A.size()); }
  bool has_second_order() const { return !second_order.empty(); }
};

enum class LinearizationMethod { kLlsCd, kAnalytic };

std::string to_string(LinearizationMethod m);
LinearizationMethod parse_linearization_method(const std::string& s);

struct LinearizationOptions {
  LinearizationMethod method = LinearizationMethod::kLlsCd;
  LlsCdSettings lls;
  bool second_order = false;
  HessianSettings hessian;
  int workers = 1;
  std::uint64_t seed = 0;
  // Distinguishes successive linearizations that share a seed.
  std::uint64_t round = 0;
};

// Second-order terms only, at every (x_t, u_t) of `traj`.
std::vector<SecondOrderTerms> estimate_second_order(const Environment& env, const Trajectory& traj,
                                                    const HessianSettings& settings,
                                                    std::uint64_t seed, std::uint64_t round,
                                                    int workers);

// Timesteps are estimated independently, each from its own stream, so the
// result does not depend on `workers`. Errors name the failing timestep.
LinearizationSchedule linearize_trajectory(const Environment& env, const Trajectory& traj,
                                           const LinearizationOptions& options);

}  // namespace d2c
