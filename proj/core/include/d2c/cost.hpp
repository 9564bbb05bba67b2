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

#include <functional>
#include <optional>

#include "d2c/types.hpp"

namespace d2c {

// Optional replacement for the quadratic state cost l(x). All three
// callables are required when the hook is installed.
struct StateCostHook {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
};

// Quadratic running and terminal cost
//
//   c(x, u) = 1/2 (x - g)' Q (x - g) dt + 1/2 u' R u dt
//   c_T(x)  = 1/2 (x - g)' Q_T (x - g)
//
// `dt` weights the running terms; it is normally the environment timestep.
struct CostModel {
  Matrix Q;
  Matrix R;
  Matrix Q_T;
  Vector x_goal;
  double dt = 1.0;
  std::optional<StateCostHook> state_cost;

  // Throws InvalidArgument unless R is symmetric positive definite and Q, Q_T
  // are symmetric positive semidefinite with consistent dimensions.
  void validate() const;

  int n_x() const { return static_cast<int>(Q.rows()); }
  int n_u() const { return static_cast<int>(R.rows()); }

  double stage(const Vector& x, const Vector& u) const;
  double terminal(const Vector& x) const;

  // Derivatives of the running cost (already dt-weighted).
  Vector stage_x(const Vector& x) const;
  Matrix stage_xx(const Vector& x) const;
  Vector stage_u(const Vector& u) const;
  Matrix stage_uu() const { return R * dt; }

  Vector terminal_x(const Vector& x) const;
  Matrix terminal_xx(const Vector& x) const;

  // Same cost with Q, R, Q_T multiplied by s > 0.
  CostModel scaled(double s) const;
};

}  // namespace d2c
