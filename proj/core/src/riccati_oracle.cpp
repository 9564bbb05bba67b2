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

#include "d2c/riccati_oracle.hpp"

namespace d2c {

RiccatiSolution riccati_lqr_oracle(const MatrixSeq& A, const MatrixSeq& B, const Matrix& Q,
                                   const Matrix& R, const Matrix& Q_T, const Vector& x0) {
  const std::size_t N = A.size();
  if (N == 0 || B.size() != N) throw InvalidArgument("riccati: need matching non-empty A, B");
  Eigen::FullPivLU<Matrix> r_lu(R);
  if (!r_lu.isInvertible()) throw InvalidArgument("riccati: R is singular");

  RiccatiSolution sol;
  sol.P.resize(N + 1);
  sol.K.resize(N);
  sol.P[N] = Q_T;
  for (std::size_t i = N; i-- > 0;) {
    const Matrix& P = sol.P[i + 1];
    const Matrix BtP = B[i].transpose() * P;
    const Matrix S = R + BtP * B[i];
    // K = -(R + B'PB)^-1 B'PA
    sol.K[i] = -S.fullPivLu().solve(BtP * A[i]);
    // P = Q + A'PA - A'PB (R + B'PB)^-1 B'PA
    Matrix Pn = Q + A[i].transpose() * P * A[i] + (BtP * A[i]).transpose() * sol.K[i];
    sol.P[i] = 0.5 * (Pn + Pn.transpose());
  }

  sol.states.push_back(x0);
  for (std::size_t i = 0; i < N; ++i) {
    sol.controls.push_back(sol.K[i] * sol.states.back());
    sol.states.push_back(A[i] * sol.states.back() + B[i] * sol.controls.back());
  }
  sol.cost = 0.5 * x0.dot(sol.P[0] * x0);
  return sol;
}

RiccatiSolution riccati_lqr_oracle(const Matrix& A, const Matrix& B, const Matrix& Q,
                                   const Matrix& R, const Matrix& Q_T, int N, const Vector& x0) {
  if (N < 1) throw InvalidArgument("riccati: horizon must be at least 1");
  return riccati_lqr_oracle(MatrixSeq(static_cast<std::size_t>(N), A),
                            MatrixSeq(static_cast<std::size_t>(N), B), Q, R, Q_T, x0);
}

}  // namespace d2c
