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

#include "d2c/types.hpp"

namespace d2c {

// Textbook finite-horizon discrete LQR:
//
//   minimize  sum_t 1/2 (x_t' Q x_t + u_t' R u_t) + 1/2 x_N' Q_T x_N
//   subject to x_{t+1} = A x_t + B u_t
//
// Q and R are used as given (callers fold in any timestep weighting). Kept
// deliberately separate from the iLQR code so it can serve as an oracle.
struct RiccatiSolution {
  MatrixSeq K;  // u_t = K_t x_t, N entries
  MatrixSeq P;  // N + 1 entries, P[N] = Q_T
  VectorSeq states;
  VectorSeq controls;
  double cost = 0.0;  // 1/2 x0' P_0 x0
};

RiccatiSolution riccati_lqr_oracle(const Matrix& A, const Matrix& B, const Matrix& Q,
                                   const Matrix& R, const Matrix& Q_T, int N, const Vector& x0);

// Time-varying variant (A_t, B_t given per step).
RiccatiSolution riccati_lqr_oracle(const MatrixSeq& A, const MatrixSeq& B, const Matrix& Q,
                                   const Matrix& R, const Matrix& Q_T, const Vector& x0);

}  // namespace d2c
