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

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

namespace d2c {
namespace {

constexpr double kPi = 3.14159265358979323846;

struct LqInstance {
  Environment env;
  CostModel cost;
  Vector x0;
  int N;
};

LqInstance make_lq(std::uint64_t seed, int n_x, int n_u, int N) {
  NormalStream rng(StreamKey{seed, StreamDomain::kUser, 0, 0, 0});
  const auto sys = testing::random_stable_system(rng, n_x, n_u);
  Environment env = make_linear_environment(sys.A, sys.B, 0.1);
  CostModel cost = testing::quadratic_cost(testing::random_spd(rng, n_x, 0.5, 2.0),
                                           testing::random_spd(rng, n_u, 0.5, 2.0),
                                           testing::random_spd(rng, n_x, 1.0, 5.0), env.dt());
  return {std::move(env), std::move(cost), rng.normal_vector(n_x), N};
}

RiccatiSolution oracle(const LqInstance& p) {
  const Jacobians J = p.env.analytic_jacobians(p.x0, Vector::Zero(p.env.n_u()));
  return riccati_lqr_oracle(J.A, J.B, p.cost.Q * p.cost.dt, p.cost.R * p.cost.dt, p.cost.Q_T, p.N,
                            p.x0);
}

LinearizationSchedule constant_schedule(const Environment& env, int N) {
  const Jacobians J = env.analytic_jacobians(Vector::Zero(env.n_x()), Vector::Zero(env.n_u()));
  return {MatrixSeq(N, J.A), MatrixSeq(N, J.B), {}};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

TEST(RiccatiOracle, ScalarHandRecursion) {
  const Matrix one = Matrix::Ones(1, 1);
  const RiccatiSolution s = riccati_lqr_oracle(one, one, one, one, one, 2, Vector::Ones(1));
  ASSERT_EQ(s.P.size(), 3u);
  EXPECT_DOUBLE_EQ(s.P[2](0, 0), 1.0);
  EXPECT_DOUBLE_EQ(s.P[1](0, 0), 1.5);
  EXPECT_NEAR(s.P[0](0, 0), 1.6, 1e-15);
  EXPECT_NEAR(s.cost, 0.8, 1e-15);
}

TEST(RiccatiOracle, ZeroDynamicsOneStep) {
  const Matrix I = Matrix::Identity(2, 2);
  const Vector e1 = Vector::Unit(2, 0);
  const RiccatiSolution s = riccati_lqr_oracle(Matrix::Zero(2, 2), I, I, I, I, 1, e1);
  EXPECT_TRUE(s.P[0].isApprox(I));
  EXPECT_TRUE(s.K[0].isZero(0.0));
  EXPECT_DOUBLE_EQ(s.cost, 0.5);
}

TEST(RiccatiOracle, CostMatchesSimulatedControls) {
  const LqInstance p = make_lq(4, 3, 2, 25);
  const RiccatiSolution s = oracle(p);
  const Trajectory tr = rollout(p.env, p.x0, s.controls, p.cost);
  EXPECT_LT(rel(tr.cost, s.cost), 1e-8);
}

TEST(RiccatiOracle, BeatsRandomControlSequences) {
  const LqInstance p = make_lq(5, 3, 1, 20);
  const RiccatiSolution s = oracle(p);
  NormalStream rng(StreamKey{6, StreamDomain::kUser, 0, 0, 0});
  for (int trial = 0; trial < 100; ++trial) {
    VectorSeq u;
    for (int t = 0; t < p.N; ++t) u.push_back(s.controls[t] + 0.1 * rng.normal_vector(1));
    EXPECT_GE(rollout(p.env, p.x0, u, p.cost).cost, s.cost);
  }
}

TEST(BackwardPass, EqualsRiccatiGainsOnLq) {
  const LqInstance p = make_lq(7, 4, 2, 15);
  const Trajectory zero = rollout(p.env, Vector::Zero(4), VectorSeq(p.N, Vector::Zero(2)), p.cost);
  const BackwardPassResult bp = backward_pass(constant_schedule(p.env, p.N), zero, p.cost, 0.0);
  ASSERT_TRUE(bp.success);
  const RiccatiSolution s = oracle(p);
  for (int t = 0; t < p.N; ++t) {
    EXPECT_LT((bp.gains.K[t] - s.K[t]).cwiseAbs().maxCoeff(), 1e-10) << "t=" << t;
    EXPECT_TRUE(bp.gains.k[t].isZero(0.0));
    EXPECT_LT((bp.Vxx[t] - s.P[t]).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(BackwardPass, ZeroCostGivesZeroGains) {
  const Environment env = make_environment("pendulum");
  const CostModel cost = testing::quadratic_cost(Matrix::Zero(2, 2), Matrix::Identity(1, 1),
                                                 Matrix::Zero(2, 2), env.dt());
  const Trajectory tr = rollout(env, Vector::Constant(2, 0.3), VectorSeq(10, Vector::Zero(1)), cost);
  LinearizationOptions o;
  o.method = LinearizationMethod::kAnalytic;
  const BackwardPassResult bp = backward_pass(linearize_trajectory(env, tr, o), tr, cost, 0.0);
  ASSERT_TRUE(bp.success);
  for (int t = 0; t < 10; ++t) {
    EXPECT_TRUE(bp.gains.k[t].isZero(0.0));
    EXPECT_TRUE(bp.gains.K[t].isZero(0.0));
  }
}

TEST(BackwardPass, HugeRegularizationApproachesDeadbeat) {
  // With mu I added to V_xx, K tends to -(B'B)^-1 B'A and k to zero.
  const LqInstance p = make_lq(8, 3, 1, 10);
  const Trajectory tr = rollout(p.env, p.x0, VectorSeq(p.N, Vector::Zero(1)), p.cost);
  const LinearizationSchedule lin = constant_schedule(p.env, p.N);
  const BackwardPassResult bp = backward_pass(lin, tr, p.cost, 1e9);
  ASSERT_TRUE(bp.success);
  const Matrix& A = lin.A[0];
  const Matrix& B = lin.B[0];
  const Matrix K_limit = -(B.transpose() * B).ldlt().solve(B.transpose() * A);
  const BackwardPassResult plain = backward_pass(lin, tr, p.cost, 0.0);
  for (int t = 0; t < p.N; ++t) {
    EXPECT_LT((bp.gains.K[t] - K_limit).norm(), 1e-6) << "t=" << t;
    EXPECT_LT(bp.gains.k[t].norm(), 1e-6 * std::max(1.0, plain.gains.k[t].norm()));
  }
}

TEST(ForwardPass, IdentityUpdates) {
  const Environment env = make_environment("cartpole");
  CostModel cost = testing::quadratic_cost(Matrix::Identity(4, 4), Matrix::Identity(1, 1),
                                           Matrix::Identity(4, 4), env.dt());
  cost.x_goal = env.default_goal;
  VectorSeq u;
  for (int t = 0; t < 12; ++t) u.push_back(Vector::Constant(1, std::cos(t)));
  const Trajectory prev = rollout(env, env.default_x0, u, cost);
  GainSchedule g = GainSchedule::zeros(12, 4, 1);
  for (auto& k : g.k) k.setOnes();
  const Trajectory same = forward_pass(env, cost, prev, g, 0.0);
  EXPECT_EQ(same.states, prev.states);
  EXPECT_EQ(same.cost, prev.cost);
  const Trajectory again = forward_pass(env, cost, prev, GainSchedule::zeros(12, 4, 1), 1.0);
  EXPECT_EQ(again.cost, prev.cost);
}

TEST(ForwardPass, OneNewtonStepIsOptimalOnLq) {
  const LqInstance p = make_lq(9, 3, 2, 30);
  const Trajectory start = rollout(p.env, p.x0, VectorSeq(p.N, Vector::Zero(2)), p.cost);
  const BackwardPassResult bp = backward_pass(constant_schedule(p.env, p.N), start, p.cost, 0.0);
  const Trajectory step = forward_pass(p.env, p.cost, start, bp.gains, 1.0);
  EXPECT_LT(rel(step.cost, oracle(p).cost), 1e-8);
  EXPECT_NEAR(step.cost - start.cost, bp.expected_change(1.0), 1e-8 * std::abs(start.cost));
}

TEST(ForwardPass, NonFiniteRolloutHasInfiniteCost) {
  const Environment env = make_linear_environment(Matrix::Constant(1, 1, 1e200),
                                                  Matrix::Identity(1, 1));
  const CostModel cost = testing::quadratic_cost(Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                                                 Matrix::Identity(1, 1), env.dt());
  Trajectory prev;
  prev.states = VectorSeq(4, Vector::Zero(1));
  prev.controls = VectorSeq(3, Vector::Zero(1));
  prev.consistent = true;
  GainSchedule g = GainSchedule::zeros(3, 1, 1);
  for (auto& k : g.k) k.setConstant(1e200);
  const Trajectory tr = forward_pass(env, cost, prev, g, 1.0);
  EXPECT_TRUE(std::isinf(tr.cost));
  EXPECT_FALSE(tr.consistent);
}

TEST(Ilqr, LqConvergesInTwoIterations) {
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    const LqInstance p = make_lq(seed, 2 + static_cast<int>(seed % 3), 1, 40);
    IlqrSettings s;
    s.linearization.method = LinearizationMethod::kAnalytic;
    const IlqrReport r = ilqr_solve(p.env, p.cost, p.x0, VectorSeq(p.N, Vector::Zero(1)), s);
    EXPECT_TRUE(r.converged) << r.message;
    EXPECT_LE(r.iterations, 2);
    EXPECT_LT(rel(r.trajectory.cost, oracle(p).cost), 1e-8);
  }
}

TEST(Ilqr, OptimalWarmStartIsAFixedPoint) {
  const LqInstance p = make_lq(16, 3, 1, 20);
  const RiccatiSolution s = oracle(p);
  IlqrSettings st;
  st.linearization.method = LinearizationMethod::kAnalytic;
  const IlqrReport r = ilqr_solve(p.env, p.cost, p.x0, s.controls, st);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_LT(rel(r.trajectory.cost, r.history.front().cost), 1e-12);
  for (int t = 0; t < p.N; ++t)
    EXPECT_LT((r.trajectory.controls[t] - s.controls[t]).norm(), 1e-9);
}

TEST(Ilqr, HistoryIsMonotoneAndCountsEvaluations) {
  const Environment env = make_environment("pendulum");
  CostModel cost = testing::quadratic_cost(Matrix::Zero(2, 2), 0.01 * Matrix::Identity(1, 1),
                                           900.0 * Matrix::Identity(2, 2), env.dt());
  cost.x_goal = env.default_goal;
  IlqrSettings s;
  s.max_iters = 200;
  env.reset_eval_count();
  const IlqrReport r = ilqr_solve(env, cost, env.default_x0, VectorSeq(30, Vector::Zero(1)), s);
  ASSERT_GE(r.history.size(), 2u);
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    EXPECT_LE(r.history[i].cost, r.history[i - 1].cost);
    EXPECT_GE(r.history[i].env_evals, r.history[i - 1].env_evals);
  }
  EXPECT_EQ(r.env_eval_count, env.eval_count());
  const std::vector<double> costs = r.cost_history();
  EXPECT_EQ(costs.size(), r.history.size());
}

TEST(Ilqr, PendulumSwingUp) {
  const Environment env = make_environment("pendulum");
  CostModel cost = testing::quadratic_cost(Matrix::Zero(2, 2), 0.01 * Matrix::Identity(1, 1),
                                           900.0 * Matrix::Identity(2, 2), env.dt());
  cost.x_goal = env.default_goal;
  IlqrSettings s;
  s.max_iters = 200;
  s.linearization.lls.sigma = 5e-4;
  const IlqrReport r = ilqr_solve(env, cost, env.default_x0, VectorSeq(30, Vector::Zero(1)), s);
  EXPECT_TRUE(r.converged) << r.message;
  const Vector& xN = r.trajectory.states.back();
  EXPECT_LT(std::abs(xN[0] - kPi), 0.1);
  EXPECT_LT(std::abs(xN[1]), 0.5);
  EXPECT_LT(r.trajectory.cost, 1e-3 * r.history.front().cost);
}

TEST(Ilqr, SettingsValidation) {
  IlqrSettings s;
  s.alpha0 = 1.5;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = IlqrSettings{};
  s.mu_grow = 1.0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = IlqrSettings{};
  s.max_iters = 0;
  EXPECT_THROW(s.validate(), InvalidArgument);
}

TEST(Ilqr, RejectsMismatchedInputs) {
  const Environment env = make_environment("pendulum");
  const CostModel cost = testing::quadratic_cost(Matrix::Identity(2, 2), Matrix::Identity(1, 1),
                                                 Matrix::Identity(2, 2), env.dt());
  EXPECT_THROW(ilqr_solve(env, cost, Vector::Zero(3), VectorSeq(5, Vector::Zero(1)), IlqrSettings{}),
               InvalidArgument);
  EXPECT_THROW(ilqr_solve(env, cost, Vector::Zero(2), VectorSeq{}, IlqrSettings{}), InvalidArgument);
}

}  // namespace
}  // namespace d2c
