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

#include "d2c/estimation.hpp"

#include <cmath>
#include <sstream>

#include "d2c/parallel.hpp"

namespace d2c {

PerturbationBatch draw_perturbations(int n_x, int n_u, double sigma, int n_s, NormalStream& stream,
                                     const std::optional<Vector>& scale) {
  const int n = n_x + n_u;
  if (scale && scale->size() != n)
    throw InvalidArgument("perturbation scale must have n_x + n_u entries");
  PerturbationBatch batch;
  batch.sigma = sigma;
  batch.n_s = n_s;
  batch.dY = sigma * stream.normal_matrix(n, n_s);
  if (scale) batch.dY = scale->asDiagonal() * batch.dY;
  batch.dX = batch.dY.topRows(n_x);
  batch.dU = batch.dY.bottomRows(n_u);
  return batch;
}

double gram_identity_deviation(const PerturbationBatch& batch) {
  const Eigen::Index n = batch.dY.rows();
  const Matrix cov = batch.dY * batch.dY.transpose() /
                     (batch.sigma * batch.sigma * static_cast<double>(batch.n_s - 1));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov - Matrix::Identity(n, n), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

double condition_number(const Matrix& gram) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

Vector checked_step(const Environment& env, const Vector& x, const Vector& u) {
  Vector y = env.step(x, u);
  if (!y.allFinite()) throw NumericalError("non-finite environment output during estimation");
  return y;
}

}  // namespace

JacobianEstimate lls_cd_jacobian(const Environment& env, const Vector& x, const Vector& u,
                                 const LlsCdSettings& settings, const StreamKey& key) {
  const int n_x = env.n_x();
  const int n_u = env.n_u();
  const int n = n_x + n_u;
  const int n_s = settings.samples_for(n_x, n_u);
  if (!(settings.sigma > 0.0)) throw InvalidArgument("lls_cd: sigma must be positive");
  if (n_s < n) {
    std::ostringstream os;
    os << "lls_cd: n_s=" << n_s << " is below n_x + n_u = " << n;
    throw InvalidArgument(os.str());
  }

  JacobianEstimate est;
  for (int attempt = 0; attempt < 2; ++attempt) {
    StreamKey k = key;
    k.c = static_cast<std::uint64_t>(attempt);
    NormalStream stream(k);
    const PerturbationBatch batch = draw_perturbations(n_x, n_u, settings.sigma, n_s, stream,
                                                       settings.scale);
    Matrix H(n_x, n_s);
    for (int i = 0; i < n_s; ++i) {
      const Vector plus = checked_step(env, x + batch.dX.col(i), u + batch.dU.col(i));
      const Vector minus = checked_step(env, x - batch.dX.col(i), u - batch.dU.col(i));
      H.col(i) = 0.5 * (plus - minus);
    }
    est.evaluations += 2 * static_cast<std::uint64_t>(n_s);
    est.attempts = attempt + 1;

    const Matrix gram = batch.dY * batch.dY.transpose();
    est.condition = condition_number(gram);
    if (!(est.condition <= settings.max_condition)) continue;

    // gram is symmetric, so [A B]' = gram^-1 (dY H').
    const Matrix AB = gram.ldlt().solve(batch.dY * H.transpose()).transpose();
    est.A = AB.leftCols(n_x);
    est.B = AB.rightCols(n_u);
    if (!AB.allFinite()) throw NumericalError("lls_cd: non-finite Jacobian estimate");
    return est;
  }
  std::ostringstream os;
  os << "lls_cd: Gram matrix singular (condition " << est.condition << " > "
     << settings.max_condition << ") after resampling";
  throw NumericalError(os.str());
}

int hessian_monomial_count(int n_x, int n_u) {
  const int n = n_x + n_u;
  return n * (n + 1) / 2;
}

SecondOrderTerms lls_cd_hessian(const Environment& env, const Vector& x, const Vector& u,
                                const HessianSettings& settings, const StreamKey& key) {
  const int n_x = env.n_x();
  const int n_u = env.n_u();
  const int n = n_x + n_u;
  const int m = hessian_monomial_count(n_x, n_u);
  if (m > settings.max_monomials) {
    std::ostringstream os;
    os << "lls_cd_hessian: " << m << " quadratic monomials exceed the budget of "
       << settings.max_monomials
       << "; second-order estimation is opt-in for small systems, use the ilqr or "
          "surrogate_lqr gain modes instead";
    throw InvalidArgument(os.str());
  }
  const int n_s = settings.n_s > 0 ? settings.n_s : 2 * m;
  if (!(settings.sigma > 0.0)) throw InvalidArgument("lls_cd_hessian: sigma must be positive");
  if (n_s < m) {
    std::ostringstream os;
    os << "lls_cd_hessian: n_s=" << n_s << " is below the monomial count " << m;
    throw InvalidArgument(os.str());
  }

  NormalStream stream(key);
  const PerturbationBatch batch = draw_perturbations(n_x, n_u, settings.sigma, n_s, stream);
  const Vector nominal = checked_step(env, x, u);

  Matrix design(n_s, m);
  Matrix Z(n_s, n_x);
  for (int s = 0; s < n_s; ++s) {
    const auto d = batch.dY.col(s);
    int col = 0;
    for (int j = 0; j < n; ++j) {
      design(s, col++) = d[j] * d[j];
      for (int k = j + 1; k < n; ++k) design(s, col++) = 2.0 * d[j] * d[k];
    }
    const Vector plus = checked_step(env, x + batch.dX.col(s), u + batch.dU.col(s));
    const Vector minus = checked_step(env, x - batch.dX.col(s), u - batch.dU.col(s));
    Z.row(s) = (plus + minus - 2.0 * nominal).transpose();
  }

  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < m) throw NumericalError("lls_cd_hessian: singular design matrix");
  const Matrix coeffs = qr.solve(Z);  // m x n_x

  SecondOrderTerms out;
  out.xx.reserve(static_cast<std::size_t>(n_x));
  for (int i = 0; i < n_x; ++i) {
    Matrix full(n, n);
    int col = 0;
    for (int j = 0; j < n; ++j) {
      full(j, j) = coeffs(col++, i);
      for (int k = j + 1; k < n; ++k) {
        full(j, k) = coeffs(col, i);
        full(k, j) = coeffs(col, i);
        ++col;
      }
    }
    out.xx.push_back(full.topLeftCorner(n_x, n_x));
    out.xu.push_back(full.topRightCorner(n_x, n_u));
    out.uu.push_back(full.bottomRightCorner(n_u, n_u));
  }
  return out;
}

std::string to_string(LinearizationMethod m) {
  return m == LinearizationMethod::kLlsCd ? "lls_cd" : "analytic";
}

LinearizationMethod parse_linearization_method(const std::string& s) {
  if (s == "lls_cd") return LinearizationMethod::kLlsCd;
  if (s == "analytic") return LinearizationMethod::kAnalytic;
  throw InvalidArgument("unknown linearization method '" + s + "' (expected lls_cd or analytic)");
}

std::vector<SecondOrderTerms> estimate_second_order(const Environment& env, const Trajectory& traj,
                                                    const HessianSettings& settings,
                                                    std::uint64_t seed, std::uint64_t round,
                                                    int workers) {
  const int N = traj.horizon();
  std::vector<SecondOrderTerms> out(static_cast<std::size_t>(N));
  parallel_for(static_cast<std::size_t>(N), workers, [&](std::size_t t) {
    const StreamKey key{seed, StreamDomain::kHessian, round, t, 0};
    try {
      out[t] = lls_cd_hessian(env, traj.states[t], traj.controls[t], settings, key);
    } catch (const InvalidArgument&) {
      throw;
    } catch (const Error& e) {
      throw NumericalError("estimate_second_order: timestep " + std::to_string(t) + ": " + e.what());
    }
  });
  return out;
}

LinearizationSchedule linearize_trajectory(const Environment& env, const Trajectory& traj,
                                           const LinearizationOptions& options) {
  const int N = traj.horizon();
  if (N < 1 || static_cast<int>(traj.states.size()) != N + 1)
    throw InvalidArgument("linearize_trajectory: malformed trajectory");
  if (!traj.consistent)
    throw InvalidArgument("linearize_trajectory: trajectory is not dynamically consistent");
  if (options.method == LinearizationMethod::kAnalytic && !env.has_analytic_jacobians())
    throw InvalidArgument("linearize_trajectory: " + env.name() +
                          " has no analytic Jacobians; use lls_cd");

  LinearizationSchedule lin;
  lin.A.resize(static_cast<std::size_t>(N));
  lin.B.resize(static_cast<std::size_t>(N));
  if (options.second_order) lin.second_order.resize(static_cast<std::size_t>(N));

  parallel_for(static_cast<std::size_t>(N), options.workers, [&](std::size_t t) {
    const Vector& x = traj.states[t];
    const Vector& u = traj.controls[t];
    try {
      if (options.method == LinearizationMethod::kAnalytic) {
        Jacobians J = env.analytic_jacobians(x, u);
        lin.A[t] = std::move(J.A);
        lin.B[t] = std::move(J.B);
      } else {
        const StreamKey key{options.seed, StreamDomain::kEstimation, options.round, t, 0};
        JacobianEstimate est = lls_cd_jacobian(env, x, u, options.lls, key);
        lin.A[t] = std::move(est.A);
        lin.B[t] = std::move(est.B);
      }
      if (options.second_order) {
        const StreamKey key{options.seed, StreamDomain::kHessian, options.round, t, 0};
        lin.second_order[t] = lls_cd_hessian(env, x, u, options.hessian, key);
      }
    } catch (const InvalidArgument&) {
      throw;
    } catch (const Error& e) {
      throw NumericalError("linearize_trajectory: timestep " + std::to_string(t) + ": " + e.what());
    }
  });
  return lin;
}

}  // namespace d2c
