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

#include "d2c/environment.hpp"

#include <sstream>
#include <utility>

namespace d2c {

Environment::Environment(std::string name, int n_x, int n_u, double dt, Vector u_max,
                         StepFn step, JacobianFn jacobians)
    : name_(std::move(name)),
      n_x_(n_x),
      n_u_(n_u),
      dt_(dt),
      u_max_(std::move(u_max)),
      step_(std::move(step)),
      jacobians_(std::move(jacobians)),
      evals_(std::make_shared<std::atomic<std::uint64_t>>(0)) {
  if (n_x <= 0 || n_u <= 0) throw InvalidArgument("environment dimensions must be positive");
  if (!(dt > 0.0)) throw InvalidArgument("environment dt must be positive");
  if (u_max_.size() != n_u) throw InvalidArgument("u_max must have n_u entries");
  if (!step_) throw InvalidArgument("environment step function is empty");
  default_x0 = Vector::Zero(n_x);
  default_goal = Vector::Zero(n_x);
}

Vector Environment::step(const Vector& x, const Vector& u) const {
  if (x.size() != n_x_ || u.size() != n_u_) {
    std::ostringstream os;
    os << name_ << ": step expects x[" << n_x_ << "], u[" << n_u_ << "], got x[" << x.size()
       << "], u[" << u.size() << "]";
    throw InvalidArgument(os.str());
  }
  evals_->fetch_add(1, std::memory_order_relaxed);
  return step_(x, u);
}

Jacobians Environment::analytic_jacobians(const Vector& x, const Vector& u) const {
  if (!jacobians_) throw InvalidArgument(name_ + ": no analytic Jacobians available");
  if (x.size() != n_x_ || u.size() != n_u_)
    throw InvalidArgument(name_ + ": Jacobian query has wrong dimensions");
  return jacobians_(x, u);
}

Environment Environment::with_u_max(Vector u_max) const {
  if (u_max.size() != n_u_) throw InvalidArgument("u_max must have n_u entries");
  Environment copy = *this;
  copy.u_max_ = std::move(u_max);
  return copy;
}

Environment Environment::with_private_counter() const {
  Environment copy = *this;
  copy.evals_ = std::make_shared<std::atomic<std::uint64_t>>(0);
  return copy;
}

}  // namespace d2c
