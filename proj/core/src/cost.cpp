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

#include "d2c/cost.hpp"

#include <sstream>

namespace d2c {
namespace {

void check_symmetric_psd(const Matrix& m, const char* name, bool strict) {
  if (m.rows() != m.cols()) throw InvalidArgument(std::string("cost: ") + name + " must be square");
  if (!m.allFinite()) throw InvalidArgument(std::string("cost: ") + name + " has non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidArgument(std::string("cost: ") + name + " must be symmetric");
  if (m.rows() == 0) return;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  if (strict ? !(lo > 0.0) : lo < -1e-12 * scale) {
    std::ostringstream os;
    os << "cost: " << name << " must be " << (strict ? "positive definite" : "positive semidefinite")
       << " (min eigenvalue " << lo << ")";
    throw InvalidArgument(os.str());
  }
}

}  // namespace

void CostModel::validate() const {
  check_symmetric_psd(Q, "Q", false);
  check_symmetric_psd(Q_T, "Q_T", false);
  check_symmetric_psd(R, "R", true);
  if (Q_T.rows() != Q.rows() || x_goal.size() != Q.rows())
    throw InvalidArgument("cost: Q, Q_T and x_goal dimensions disagree");
  if (!(dt > 0.0)) throw InvalidArgument("cost: dt must be positive");
  if (state_cost && (!state_cost->value || !state_cost->gradient || !state_cost->hessian))
    throw InvalidArgument("cost: state cost hook needs value, gradient and hessian");
}

double CostModel::stage(const Vector& x, const Vector& u) const {
  const double ux = 0.5 * u.dot(R * u) * dt;
  if (state_cost) return state_cost->value(x) * dt + ux;
  const Vector e = x - x_goal;
  return 0.5 * e.dot(Q * e) * dt + ux;
}

double CostModel::terminal(const Vector& x) const {
  const Vector e = x - x_goal;
  return 0.5 * e.dot(Q_T * e);
}

Vector CostModel::stage_x(const Vector& x) const {
  if (state_cost) return state_cost->gradient(x) * dt;
  return Q * (x - x_goal) * dt;
}

Matrix CostModel::stage_xx(const Vector& x) const {
  if (state_cost) return state_cost->hessian(x) * dt;
  return Q * dt;
}

Vector CostModel::stage_u(const Vector& u) const { return R * u * dt; }

Vector CostModel::terminal_x(const Vector& x) const { return Q_T * (x - x_goal); }

Matrix CostModel::terminal_xx(const Vector&) const { return Q_T; }

CostModel CostModel::scaled(double s) const {
  if (!(s > 0.0)) throw InvalidArgument("cost: scale must be positive");
  CostModel c = *this;
  c.Q *= s;
  c.R *= s;
  c.Q_T *= s;
  if (state_cost) {
    auto hook = *state_cost;
    c.state_cost = StateCostHook{
        [hook, s](const Vector& x) { return s * hook.value(x); },
        [hook, s](const Vector& x) -> Vector { return s * hook.gradient(x); },
        [hook, s](const Vector& x) -> Matrix { return s * hook.hessian(x); }};
  }
  return c;
}

}  // namespace d2c
