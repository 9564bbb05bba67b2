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

#include "d2c/ilqr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace d2c {

GainSchedule GainSchedule::zeros(int N, int n_x, int n_u) {
  GainSchedule g;
  g.k.assign(static_cast<std::size_t>(N), Vector::Zero(n_u));
  g.K.assign(static_cast<std::size_t>(N), Matrix::Zero(n_u, n_x));
  return g;
}

void IlqrSettings::validate() const {
  if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw InvalidArgument("ilqr: alpha0 must lie in (0, 1]");
  if (!(alpha_decay > 0.0 && alpha_decay < 1.0))
    throw InvalidArgument("ilqr: alpha_decay must lie in (0, 1)");
  if (!(alpha_min > 0.0)) throw InvalidArgument("ilqr: alpha_min must be positive");
  if (!(mu0 >= 0.0)) throw InvalidArgument("ilqr: mu0 must be non-negative");
  if (!(mu_grow > 1.0)) throw InvalidArgument("ilqr: mu_grow must exceed 1");
  if (!(mu_shrink > 0.0 && mu_shrink < 1.0)) throw InvalidArgument("ilqr: mu_shrink must lie in (0, 1)");
  if (!(mu_max > mu_min && mu_min >= 0.0)) throw InvalidArgument("ilqr: need 0 <= mu_min < mu_max");
  if (!(conv_eps > 0.0)) throw InvalidArgument("ilqr: conv_eps must be positive");
  if (max_iters < 1) throw InvalidArgument("ilqr: max_iters must be at least 1");
  if (max_backtracks < 0) throw InvalidArgument("ilqr: max_backtracks must be non-negative");
}

std::vector<double> IlqrReport::cost_history() const {
  std::vector<double> out;
  out.reserve(history.size());
  for (const auto& r : history) out.push_back(r.cost);
  return out;
}

BackwardPassResult backward_pass(const LinearizationSchedule& lin, const Trajectory& traj,
                                 const CostModel& cost, double mu) {
  const int N = traj.horizon();
  if (lin.horizon() != N) throw InvalidArgument("backward_pass: linearization horizon mismatch");
  const int n_x = cost.n_x();
  const int n_u = cost.n_u();

  BackwardPassResult out;
  out.gains = GainSchedule::zeros(N, n_x, n_u);
  out.Vx.resize(static_cast<std::size_t>(N + 1));
  out.Vxx.resize(static_cast<std::size_t>(N + 1));

  Vector Vx = cost.terminal_x(traj.states.back());
  Matrix Vxx = cost.terminal_xx(traj.states.back());
  out.Vx[N] = Vx;
  out.Vxx[N] = Vxx;
  const Matrix muI = mu * Matrix::Identity(n_x, n_x);

  for (int t = N - 1; t >= 0; --t) {
    const Matrix& A = lin.A[t];
    const Matrix& B = lin.B[t];
    const Vector& x = traj.states[t];
    const Vector& u = traj.controls[t];

    const Vector Qx = cost.stage_x(x) + A.transpose() * Vx;
    const Vector Qu = cost.stage_u(u) + B.transpose() * Vx;
    const Matrix Qxx = cost.stage_xx(x) + A.transpose() * Vxx * A;
    const Matrix Vreg = Vxx + muI;
    const Matrix Qux = B.transpose() * Vreg * A;
    Matrix Quu = cost.stage_uu() + B.transpose() * Vreg * B;
    Quu = 0.5 * (Quu + Quu.transpose()).eval();

    Eigen::LLT<Matrix> llt(Quu);
    if (llt.info() != Eigen::Success) {
      out.success = false;
      out.failed_t = t;
      return out;
    }
    const Vector k = -llt.solve(Qu);
    const Matrix K = -llt.solve(Qux);
    if (!k.allFinite() || !K.allFinite())
      throw NumericalError("backward_pass: non-finite gain at timestep " + std::to_string(t));

    // The value update uses the unregularized blocks so mu never leaks into V.
    const Matrix Qux0 = B.transpose() * Vxx * A;
    const Matrix Quu0 = cost.stage_uu() + B.transpose() * Vxx * B;
    Vx = Qx + K.transpose() * Quu0 * k + K.transpose() * Qu + Qux0.transpose() * k;
    Vxx = Qxx + K.transpose() * Quu0 * K + K.transpose() * Qux0 + Qux0.transpose() * K;
    Vxx = 0.5 * (Vxx + Vxx.transpose()).eval();

    out.dV1 += k.dot(Qu);
    out.dV2 += 0.5 * k.dot(Quu0 * k);
    out.gains.k[t] = k;
    out.gains.K[t] = K;
    out.Vx[t] = Vx;
    out.Vxx[t] = Vxx;
  }
  out.success = true;
  return out;
}

Trajectory forward_pass(const Environment& env, const CostModel& cost, const Trajectory& prev,
                        const GainSchedule& gains, double alpha) {
  const int N = prev.horizon();
  if (gains.horizon() != N) throw InvalidArgument("forward_pass: gain horizon mismatch");
  Trajectory next;
  next.states.reserve(static_cast<std::size_t>(N + 1));
  next.controls.reserve(static_cast<std::size_t>(N));
  next.states.push_back(prev.states[0]);
  double total = 0.0;
  for (int t = 0; t < N; ++t) {
    const Vector& x = next.states.back();
    Vector u = prev.controls[t] + alpha * gains.k[t] + gains.K[t] * (x - prev.states[t]);
    total += cost.stage(x, u);
    Vector x_next = env.step(x, u);
    next.controls.push_back(std::move(u));
    if (!x_next.allFinite()) {
      next.cost = std::numeric_limits<double>::infinity();
      next.consistent = false;
      return next;
    }
    next.states.push_back(std::move(x_next));
  }
  total += cost.terminal(next.states.back());
  next.cost = std::isfinite(total) ? total : std::numeric_limits<double>::infinity();
  next.consistent = true;
  return next;
}

namespace {

bool improvement_small(double before, double after, double eps) {
  const double change = before - after;
  if (std::abs(before) < 1e-12) return std::abs(change) < 1e-12;
  return change / std::abs(before) < eps;
}

// Unregularized gains at the final nominal; mu escalates only if Q_uu is not
// positive definite at mu = 0.
BackwardPassResult final_gains(const LinearizationSchedule& lin, const Trajectory& traj,
                               const CostModel& cost, const IlqrSettings& s, double& mu_used) {
  mu_used = 0.0;
  BackwardPassResult bp = backward_pass(lin, traj, cost, 0.0);
  double mu = std::max(s.mu_min, 1e-9);
  while (!bp.success && mu <= s.mu_max) {
    mu_used = mu;
    bp = backward_pass(lin, traj, cost, mu);
    mu *= s.mu_grow;
  }
  if (!bp.success)
    throw NumericalError("ilqr: Q_uu not positive definite at timestep " +
                         std::to_string(bp.failed_t) + " even at maximum regularization");
  return bp;
}

}  // namespace

IlqrReport ilqr_solve(const Environment& env, const CostModel& cost, const Vector& x0,
                      const VectorSeq& u_init, const IlqrSettings& settings) {
  settings.validate();
  cost.validate();
  if (cost.n_x() != env.n_x() || cost.n_u() != env.n_u())
    throw InvalidArgument("ilqr: cost dimensions do not match the environment");
  if (u_init.empty()) throw InvalidArgument("ilqr: u_init must contain at least one control");
  for (const auto& u : u_init)
    if (u.size() != env.n_u()) throw InvalidArgument("ilqr: u_init entry has wrong dimension");

  const std::uint64_t evals_start = env.eval_count();
  auto evals = [&] { return env.eval_count() - evals_start; };

  IlqrReport report;
  Trajectory traj = rollout(env, x0, u_init, cost);
  report.history.push_back({0, traj.cost, evals(), 0.0, settings.mu0, true});

  double mu = settings.mu0;
  LinearizationSchedule lin;
  bool lin_current = false;  // lin was computed at traj
  LinearizationOptions lopt = settings.linearization;

  for (int iter = 1; iter <= settings.max_iters; ++iter) {
    report.iterations = iter;
    if (!lin_current) {
      lopt.round = static_cast<std::uint64_t>(iter);
      lin = linearize_trajectory(env, traj, lopt);
      lin_current = true;
    }

    BackwardPassResult bp = backward_pass(lin, traj, cost, mu);
    while (!bp.success) {
      mu = std::max(mu * settings.mu_grow, settings.mu_min);
      if (mu > settings.mu_max) break;
      bp = backward_pass(lin, traj, cost, mu);
    }
    if (!bp.success) {
      report.message = "regularization exceeded mu_max; Q_uu not positive definite at timestep " +
                       std::to_string(bp.failed_t);
      report.history.push_back({iter, traj.cost, evals(), 0.0, mu, false});
      break;
    }

    // The quadratic model predicts no meaningful descent: the nominal is a
    // fixed point, so stop without moving it.
    const double predicted = -bp.expected_change(1.0);
    if (improvement_small(traj.cost, traj.cost - std::max(predicted, 0.0), settings.conv_eps)) {
      report.converged = true;
      report.message = "predicted improvement below tolerance";
      report.history.push_back({iter, traj.cost, evals(), 0.0, mu, false});
      break;
    }

    double alpha = settings.alpha0;
    bool accepted = false;
    Trajectory candidate;
    for (int b = 0; b <= settings.max_backtracks && alpha >= settings.alpha_min; ++b) {
      candidate = forward_pass(env, cost, traj, bp.gains, alpha);
      if (std::isfinite(candidate.cost) && candidate.cost < traj.cost) {
        const double actual = traj.cost - candidate.cost;
        const double expected = -bp.expected_change(alpha);
        if (!settings.armijo || actual >= settings.armijo_c * expected) {
          accepted = true;
          break;
        }
      }
      alpha *= settings.alpha_decay;
    }

    if (!accepted) {
      mu = std::max(mu * settings.mu_grow, settings.mu_min);
      report.history.push_back({iter, traj.cost, evals(), 0.0, mu, false});
      if (mu > settings.mu_max) {
        report.message = "line search failed at maximum regularization";
        break;
      }
      continue;
    }

    const double before = traj.cost;
    traj = std::move(candidate);
    lin_current = false;
    mu = std::max(mu * settings.mu_shrink, settings.mu_min);
    report.history.push_back({iter, traj.cost, evals(), alpha, mu, true});
    if (improvement_small(before, traj.cost, settings.conv_eps)) {
      report.converged = true;
      report.message = "relative improvement below tolerance";
      break;
    }
  }
  if (!report.converged && report.message.empty())
    report.message = "maximum iterations reached";

  if (!lin_current) {
    lopt.round = static_cast<std::uint64_t>(report.iterations + 1);
    lin = linearize_trajectory(env, traj, lopt);
  }
  report.value = final_gains(lin, traj, cost, settings, report.final_mu);
  report.gains = report.value.gains;
  report.linearization = std::move(lin);
  report.trajectory = std::move(traj);
  report.env_eval_count = evals();
  return report;
}

}  // namespace d2c
