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

#include "d2c/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace d2c {

std::string to_string(GainMode mode) {
  switch (mode) {
    case GainMode::kIlqr: return "ilqr";
    case GainMode::kProp2: return "prop2";
    case GainMode::kSurrogateLqr: return "surrogate_lqr";
  }
  return "unknown";
}

GainMode parse_gain_mode(const std::string& s) {
  if (s == "ilqr") return GainMode::kIlqr;
  if (s == "prop2") return GainMode::kProp2;
  if (s == "surrogate_lqr") return GainMode::kSurrogateLqr;
  throw InvalidArgument("unknown feedback mode '" + s + "' (expected ilqr, prop2 or surrogate_lqr)");
}

namespace {

// Factor S, adding an escalating multiple of I if it is not positive
// definite. Returns the shift used.
double factor_regularized(Matrix S, Eigen::LLT<Matrix>& llt, int t) {
  S = 0.5 * (S + S.transpose()).eval();
  llt.compute(S);
  if (llt.info() == Eigen::Success) return 0.0;
  const Eigen::Index n = S.rows();
  for (double shift = 1e-9; shift <= 1e10; shift *= 10.0) {
    llt.compute(S + shift * Matrix::Identity(n, n));
    if (llt.info() == Eigen::Success) return shift;
  }
  throw NumericalError("feedback: S_t is not positive definite at timestep " + std::to_string(t) +
                       " even after regularization");
}

}  // namespace

std::vector<SecondOrderTerms> zero_second_order(int N, int n_x, int n_u) {
  SecondOrderTerms z;
  z.xx.assign(static_cast<std::size_t>(n_x), Matrix::Zero(n_x, n_x));
  z.xu.assign(static_cast<std::size_t>(n_x), Matrix::Zero(n_x, n_u));
  z.uu.assign(static_cast<std::size_t>(n_x), Matrix::Zero(n_u, n_u));
  return std::vector<SecondOrderTerms>(static_cast<std::size_t>(N), z);
}

Prop2Result prop2_gains(const LinearizationSchedule& lin, const Trajectory& traj,
                        const CostModel& cost, double stationarity_tol) {
  const int N = traj.horizon();
  const int n_x = cost.n_x();
  const int n_u = cost.n_u();
  if (lin.horizon() != N) throw InvalidArgument("prop2: linearization horizon mismatch");
  if (!lin.has_second_order())
    throw InvalidArgument("prop2: second-order dynamics terms are required");

  Prop2Result out;
  out.gains = GainSchedule::zeros(N, n_x, n_u);
  out.value.G.resize(static_cast<std::size_t>(N + 1));
  out.value.P.resize(static_cast<std::size_t>(N + 1));
  out.stationarity_residual.assign(static_cast<std::size_t>(N), 0.0);
  out.regularization.assign(static_cast<std::size_t>(N), 0.0);

  RowVector G = cost.terminal_x(traj.states.back()).transpose();
  Matrix P = cost.terminal_xx(traj.states.back());
  out.value.G[N] = G;
  out.value.P[N] = P;

  for (int t = N - 1; t >= 0; --t) {
    const Matrix& A = lin.A[t];
    const Matrix& B = lin.B[t];
    const SecondOrderTerms& so = lin.second_order[t];
    const Vector& x = traj.states[t];
    const Vector& u = traj.controls[t];

    Matrix GRxx = Matrix::Zero(n_x, n_x);
    Matrix GRxu = Matrix::Zero(n_x, n_u);
    for (int i = 0; i < n_x; ++i) {
      GRxx += G[i] * so.xx[i];
      GRxu += G[i] * so.xu[i];
    }

    const Vector Ru = cost.stage_u(u);
    const double residual = (Ru + B.transpose() * G.transpose()).norm();
    out.stationarity_residual[t] = residual;
    if (residual > stationarity_tol * (1.0 + Ru.norm())) out.stationary = false;

    const Matrix S = cost.stage_uu() + B.transpose() * P * B;
    Eigen::LLT<Matrix> llt;
    out.regularization[t] = factor_regularized(S, llt, t);
    const Matrix K = -llt.solve(B.transpose() * P * A + GRxu.transpose());
    // S_eff is what was actually factored (S plus any shift).
    const Matrix S_eff = S + out.regularization[t] * Matrix::Identity(n_u, n_u);

    Matrix P_next = cost.stage_xx(x) + A.transpose() * P * A - K.transpose() * S_eff * K + GRxx;
    const double scale = std::max(1.0, P_next.cwiseAbs().maxCoeff());
    out.max_asymmetry =
        std::max(out.max_asymmetry, (P_next - P_next.transpose()).cwiseAbs().maxCoeff() / scale);
    P = 0.5 * (P_next + P_next.transpose());
    G = cost.stage_x(x).transpose() + G * A;

    if (!K.allFinite() || !P.allFinite())
      throw NumericalError("prop2: non-finite recursion at timestep " + std::to_string(t));
    out.gains.K[t] = K;
    out.value.P[t] = P;
    out.value.G[t] = G;
  }

  if (!out.stationary) {
    const auto worst = std::max_element(out.stationarity_residual.begin(),
                                        out.stationarity_residual.end());
    std::ostringstream os;
    os << "nominal is not stationary: largest residual " << *worst << " at timestep "
       << (worst - out.stationarity_residual.begin());
    out.warnings.push_back(os.str());
  }
  for (int t = 0; t < N; ++t) {
    if (out.regularization[t] > 0.0) {
      std::ostringstream os;
      os << "S_t regularized by " << out.regularization[t] << " I at timestep " << t;
      out.warnings.push_back(os.str());
    }
  }
  return out;
}

GainSchedule ilqr_gain_extract(const IlqrReport& report) {
  GainSchedule g = report.gains;
  for (auto& k : g.k) k.setZero();
  return g;
}

GainSchedule surrogate_lqr_gains(const LinearizationSchedule& lin, const Matrix& Q_s,
                                 const Matrix& R_s, const Matrix& Q_sT, double dt) {
  const int N = lin.horizon();
  if (N < 1) throw InvalidArgument("surrogate_lqr: empty linearization");
  const Eigen::Index n_x = lin.A[0].rows();
  const Eigen::Index n_u = lin.B[0].cols();
  if (Q_s.rows() != n_x || Q_s.cols() != n_x || Q_sT.rows() != n_x || Q_sT.cols() != n_x ||
      R_s.rows() != n_u || R_s.cols() != n_u)
    throw InvalidArgument("surrogate_lqr: weight dimensions do not match the linearization");
  if (!(dt > 0.0)) throw InvalidArgument("surrogate_lqr: dt must be positive");
  Eigen::LLT<Matrix> r_llt(0.5 * (R_s + R_s.transpose()));
  if (r_llt.info() != Eigen::Success)
    throw InvalidArgument("surrogate_lqr: R_s must be positive definite");

  GainSchedule g = GainSchedule::zeros(N, static_cast<int>(n_x), static_cast<int>(n_u));
  Matrix P = Q_sT;
  for (int t = N - 1; t >= 0; --t) {
    const Matrix& A = lin.A[t];
    const Matrix& B = lin.B[t];
    const Matrix S = R_s * dt + B.transpose() * P * B;
    Eigen::LLT<Matrix> llt(0.5 * (S + S.transpose()));
    if (llt.info() != Eigen::Success)
      throw NumericalError("surrogate_lqr: S_t not positive definite at timestep " +
                           std::to_string(t));
    const Matrix K = -llt.solve(B.transpose() * P * A);
    const Matrix Pn = Q_s * dt + A.transpose() * P * A - K.transpose() * S * K;
    P = 0.5 * (Pn + Pn.transpose());
    g.K[t] = K;
  }
  return g;
}

std::vector<RowVector> linear_cost_gradient(const Trajectory& traj, const CostModel& cost,
                                            const GainSchedule& gains) {
  const int N = traj.horizon();
  std::vector<RowVector> C(static_cast<std::size_t>(N + 1));
  for (int t = 0; t < N; ++t)
    C[t] = cost.stage_x(traj.states[t]).transpose() +
           cost.stage_u(traj.controls[t]).transpose() * gains.K[t];
  C[N] = cost.terminal_x(traj.states.back()).transpose();
  return C;
}

std::vector<RowVector> closed_loop_costate(const LinearizationSchedule& lin, const Trajectory& traj,
                                           const CostModel& cost, const GainSchedule& gains) {
  const int N = traj.horizon();
  if (lin.horizon() != N || gains.horizon() != N)
    throw InvalidArgument("closed_loop_costate: horizon mismatch");
  const auto C = linear_cost_gradient(traj, cost, gains);
  std::vector<RowVector> G(static_cast<std::size_t>(N + 1));
  G[N] = C[N];
  for (int t = N - 1; t >= 0; --t) G[t] = C[t] + G[t + 1] * (lin.A[t] + lin.B[t] * gains.K[t]);
  return G;
}

double first_order_std_coefficient(const std::vector<RowVector>& costate, double dt) {
  double sum = 0.0;
  for (std::size_t t = 1; t < costate.size(); ++t) sum += costate[t].squaredNorm();
  return std::sqrt(dt * sum);
}

FeedbackResult synthesize_feedback(const Environment& env, const CostModel& cost,
                                   const IlqrReport& report, const FeedbackSettings& settings,
                                   std::uint64_t seed, int workers) {
  FeedbackResult out;
  out.mode = settings.mode;
  const int N = report.trajectory.horizon();
  switch (settings.mode) {
    case GainMode::kIlqr:
      out.gains = ilqr_gain_extract(report);
      break;
    case GainMode::kSurrogateLqr: {
      const Matrix& Q = settings.Q_s.size() ? settings.Q_s : cost.Q;
      const Matrix& R = settings.R_s.size() ? settings.R_s : cost.R;
      const Matrix& QT = settings.Q_sT.size() ? settings.Q_sT : cost.Q_T;
      out.gains = surrogate_lqr_gains(report.linearization, Q, R, QT, cost.dt);
      break;
    }
    case GainMode::kProp2: {
      LinearizationSchedule lin = report.linearization;
      if (!lin.has_second_order()) {
        const std::uint64_t before = env.eval_count();
        // Round index far from those used by the solver's own linearizations.
        lin.second_order = estimate_second_order(env, report.trajectory, settings.hessian, seed,
                                                 std::uint64_t{1} << 40, workers);
        out.extra_evals = env.eval_count() - before;
      }
      Prop2Result p = prop2_gains(lin, report.trajectory, cost, settings.stationarity_tol);
      out.gains = std::move(p.gains);
      out.stationarity_residual = std::move(p.stationarity_residual);
      out.regularization = std::move(p.regularization);
      out.warnings = std::move(p.warnings);
      break;
    }
  }
  if (out.gains.horizon() != N) throw NumericalError("feedback: gain horizon mismatch");
  return out;
}

}  // namespace d2c
