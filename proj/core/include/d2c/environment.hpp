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

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "d2c/types.hpp"

namespace d2c {

struct Jacobians {
  Matrix A;  // n_x x n_x
  Matrix B;  // n_x x n_u
};

using StepFn = std::function<Vector(const Vector& x, const Vector& u)>;
using JacobianFn = std::function<Jacobians(const Vector& x, const Vector& u)>;

// A black-box, deterministic, discrete-time system x' = step(x, u).
//
// Instances are immutable after construction and may be shared across
// threads. Every call to step() bumps a shared atomic evaluation counter so
// that callers can report exact simulation budgets.
class Environment {
 public:
  Environment(std::string name, int n_x, int n_u, double dt, Vector u_max,
              StepFn step, JacobianFn jacobians = {});

  const std::string& name() const { return name_; }
  int n_x() const { return n_x_; }
  int n_u() const { return n_u_; }
  double dt() const { return dt_; }
  const Vector& u_max() const { return u_max_; }

  Vector step(const Vector& x, const Vector& u) const;

  bool has_analytic_jacobians() const { return static_cast<bool>(jacobians_); }
  // Throws InvalidArgument when the environment ships no analytic Jacobians.
  Jacobians analytic_jacobians(const Vector& x, const Vector& u) const;

  std::uint64_t eval_count() const { return evals_->load(); }
  void reset_eval_count() const { evals_->store(0); }

  // Task defaults. Set by make_environment; callers may override.
  Vector default_x0;
  Vector default_goal;
  // Per-component bounds on |x_N - x_goal| for a terminal state to count as
  // a success. Empty when the task has no natural envelope.
  std::optional<Vector> success_box;
  // Resolved construction parameters, echoed into output metadata.
  std::map<std::string, double> params;

  // Same dynamics with a different per-channel control scale.
  Environment with_u_max(Vector u_max) const;

  // Copy with its own evaluation counter, for exact per-task budgets when
  // several tasks share one environment concurrently.
  Environment with_private_counter() const;

 private:
  std::string name_;
  int n_x_;
  int n_u_;
  double dt_;
  Vector u_max_;
  StepFn step_;
  JacobianFn jacobians_;
  std::shared_ptr<std::atomic<std::uint64_t>> evals_;
};

// Key/value overrides for make_environment. Arrays are flattened row-major.
struct EnvParams {
  std::map<std::string, double> scalars;
  std::map<std::string, std::vector<double>> arrays;
};

// Builds one of: pendulum, cartpole, linear, allen_cahn.
//
// pendulum   state (theta, theta_dot), theta from the downward position;
//            params m, l, g, b, dt, u_max, horizon-free.
// cartpole   state (x, theta, x_dot, theta_dot); params m_cart, m_pole, l,
//            g, dt, u_max.
// linear     x' = A x + B u; params n_x, n_u, dt, u_max, arrays A, B, x0,
//            goal.
// allen_cahn periodic grid, state phi row-major; params grid (or
//            grid_rows/grid_cols), patch, M, gamma, dx, dt, T, h, band,
//            u_max. Controls are [T per patch..., h per patch...].
Environment make_environment(const std::string& name, const EnvParams& params = {});

// Largest stable explicit-Euler step for the Allen-Cahn update.
double allen_cahn_stable_dt(double mobility, double gamma, double dx, double T_base);

// Banded target: alternating bands of `band` columns at phi = 0 and phi = 1.
Vector allen_cahn_banded_target(int grid, int band);

// Linear test system x' = A x + B u with exact Jacobians.
Environment make_linear_environment(const Matrix& A, const Matrix& B, double dt = 0.1,
                                    double u_max = 1.0);

}  // namespace d2c
