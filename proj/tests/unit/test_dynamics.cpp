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
#include <set>

#include "oracles.hpp"

namespace d2c {
namespace {

constexpr double kPi = 3.14159265358979323846;

TEST(Environment, PendulumShapes) {
  const Environment env = make_environment("pendulum");
  EXPECT_EQ(env.n_x(), 2);
  EXPECT_EQ(env.n_u(), 1);
  EXPECT_TRUE(env.has_analytic_jacobians());
  EXPECT_NEAR(env.default_goal[0], kPi, 1e-15);
}

TEST(Environment, AllenCahnChannelCounts) {
  EnvParams p;
  p.scalars = {{"grid", 20}, {"patch", 2}};
  const Environment env = make_environment("allen_cahn", p);
  EXPECT_EQ(env.n_x(), 400);
  EXPECT_EQ(env.n_u(), 200);  // 100 temperature + 100 field channels
}

TEST(Environment, AllenCahnConstantFieldStep) {
  EnvParams p;
  p.scalars = {{"grid", 8}, {"patch", 2}, {"T", 0.0}, {"h", 0.0}};
  const Environment env = make_environment("allen_cahn", p);
  const Vector phi = Vector::Constant(64, -1.0);
  const Vector next = env.step(phi, Vector::Zero(env.n_u()));
  // F'(-1) = 4(-1)^3 = -4 and the Laplacian of a constant field is zero.
  const double M = env.params.at("M");
  for (Eigen::Index i = 0; i < next.size(); ++i)
    EXPECT_DOUBLE_EQ(next[i], -1.0 + env.dt() * M * 4.0);
}

TEST(Environment, AllenCahnRejectsUnstableStep) {
  EnvParams p;
  p.scalars = {{"grid", 8}, {"dt", 1.0}};
  EXPECT_THROW(make_environment("allen_cahn", p), InvalidArgument);
  p.scalars = {{"grid", 9}, {"patch", 2}};
  EXPECT_THROW(make_environment("allen_cahn", p), InvalidArgument);
}

TEST(Environment, UnknownNamesAndParameters) {
  EXPECT_THROW(make_environment("acrobot"), InvalidArgument);
  EnvParams p;
  p.scalars = {{"mass", 2.0}};
  EXPECT_THROW(make_environment("pendulum", p), InvalidArgument);
  p.scalars = {{"m", -1.0}};
  EXPECT_THROW(make_environment("pendulum", p), InvalidArgument);
}

TEST(Environment, StepIsDeterministicAndCounted) {
  const Environment env = make_environment("cartpole");
  const Vector x = (Vector(4) << 0.1, 0.2, -0.3, 0.4).finished();
  const Vector u = Vector::Constant(1, 1.5);
  env.reset_eval_count();
  const Vector a = env.step(x, u);
  const Vector b = env.step(x, u);
  EXPECT_EQ(a, b);
  EXPECT_EQ(env.eval_count(), 2u);
  const Environment own = env.with_private_counter();
  own.step(x, u);
  EXPECT_EQ(env.eval_count(), 2u);
  EXPECT_EQ(own.eval_count(), 1u);
}

TEST(Environment, PendulumEquilibriumIsFixed) {
  const Environment env = make_environment("pendulum");
  const Vector x = Vector::Zero(2);
  EXPECT_EQ(env.step(x, Vector::Zero(1)), x);
}

TEST(Environment, StepRejectsWrongDimensions) {
  const Environment env = make_environment("pendulum");
  EXPECT_THROW(env.step(Vector::Zero(3), Vector::Zero(1)), InvalidArgument);
  EXPECT_THROW(env.step(Vector::Zero(2), Vector::Zero(2)), InvalidArgument);
}

// Analytic Jacobians against central differences of the step map: the error
// should fall roughly fourfold when h halves.
class JacobianConsistency : public ::testing::TestWithParam<std::string> {};

TEST_P(JacobianConsistency, MatchesCentralDifferences) {
  EnvParams p;
  if (GetParam() == "allen_cahn") p.scalars = {{"grid", 4}, {"patch", 2}};
  const Environment env = make_environment(GetParam(), p);
  NormalStream rng(StreamKey{5, StreamDomain::kUser, 1, 0, 0});
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = 0.5 * rng.normal_vector(env.n_x());
    const Vector u = 0.5 * rng.normal_vector(env.n_u());
    const Jacobians J = env.analytic_jacobians(x, u);
    const double h = 1e-5;
    Matrix A(env.n_x(), env.n_x()), B(env.n_x(), env.n_u());
    for (int j = 0; j < env.n_x(); ++j) {
      Vector e = Vector::Zero(env.n_x());
      e[j] = h;
      A.col(j) = (env.step(x + e, u) - env.step(x - e, u)) / (2 * h);
    }
    for (int j = 0; j < env.n_u(); ++j) {
      Vector e = Vector::Zero(env.n_u());
      e[j] = h;
      B.col(j) = (env.step(x, u + e) - env.step(x, u - e)) / (2 * h);
    }
    EXPECT_LT((A - J.A).norm(), 1e-7);
    EXPECT_LT((B - J.B).norm(), 1e-7);
  }
}

INSTANTIATE_TEST_SUITE_P(AllFamilies, JacobianConsistency,
                         ::testing::Values("pendulum", "cartpole", "linear", "allen_cahn"));

TEST(Environment, LinearFromParameters) {
  EnvParams p;
  p.arrays = {{"A", {0.5, 0.1, 0.0, 0.9}}, {"B", {0.0, 1.0}}, {"x0", {2.0, -1.0}}};
  const Environment env = make_environment("linear", p);
  const Jacobians J = env.analytic_jacobians(Vector::Zero(2), Vector::Zero(1));
  EXPECT_DOUBLE_EQ(J.A(0, 1), 0.1);
  EXPECT_DOUBLE_EQ(J.B(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(env.default_x0[0], 2.0);
  p.arrays["A"] = {1.0, 2.0, 3.0};
  EXPECT_THROW(make_environment("linear", p), InvalidArgument);
}

TEST(Cost, ValuesAndDerivatives) {
  CostModel c;
  c.Q = (Matrix(2, 2) << 2.0, 0.5, 0.5, 1.0).finished();
  c.R = Matrix::Constant(1, 1, 0.3);
  c.Q_T = 4.0 * Matrix::Identity(2, 2);
  c.x_goal = (Vector(2) << 1.0, -1.0).finished();
  c.dt = 0.1;
  c.validate();
  const Vector x = (Vector(2) << 0.5, 0.25).finished();
  const Vector u = Vector::Constant(1, 2.0);
  const Vector d = x - c.x_goal;
  EXPECT_NEAR(c.stage(x, u), 0.5 * d.dot(c.Q * d) * 0.1 + 0.5 * 0.3 * 4.0 * 0.1, 1e-15);
  EXPECT_NEAR(c.terminal(x), 2.0 * d.squaredNorm(), 1e-15);
  EXPECT_TRUE(c.stage_x(x).isApprox(c.Q * d * 0.1));
  EXPECT_TRUE(c.stage_u(u).isApprox(c.R * u * 0.1));
  EXPECT_TRUE(c.terminal_x(x).isApprox(c.Q_T * d));
}

TEST(Cost, ValidationRejectsBadWeights) {
  CostModel c;
  c.Q = Matrix::Identity(2, 2);
  c.R = Matrix::Zero(1, 1);
  c.Q_T = Matrix::Identity(2, 2);
  c.x_goal = Vector::Zero(2);
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.R = Matrix::Identity(1, 1);
  c.Q(0, 1) = 0.5;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.Q = -Matrix::Identity(2, 2);
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.Q = Matrix::Identity(2, 2);
  c.x_goal = Vector::Zero(3);
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Rollout, ZeroControlsOnIdentitySystemStayAtZero) {
  const Environment env = make_linear_environment(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  const CostModel cost = testing::quadratic_cost(Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                                                 Matrix::Identity(2, 2), env.dt());
  const Trajectory tr = rollout(env, Vector::Zero(2), VectorSeq(5, Vector::Zero(2)), cost);
  EXPECT_TRUE(tr.consistent);
  for (const auto& x : tr.states) EXPECT_TRUE(x.isZero(0.0));
  EXPECT_EQ(tr.cost, 0.0);
}

TEST(Rollout, PendulumAtRestStaysAtRest) {
  const Environment env = make_environment("pendulum");
  const CostModel cost = testing::quadratic_cost(Matrix::Identity(2, 2), Matrix::Identity(1, 1),
                                                 Matrix::Identity(2, 2), env.dt());
  const Trajectory tr = rollout(env, Vector::Zero(2), VectorSeq(10, Vector::Zero(1)), cost);
  for (const auto& x : tr.states) EXPECT_EQ(x, Vector::Zero(2));
}

TEST(Rollout, CostMatchesTrajectoryCost) {
  const Environment env = make_environment("cartpole");
  CostModel cost = testing::quadratic_cost(Matrix::Identity(4, 4), 0.1 * Matrix::Identity(1, 1),
                                           10.0 * Matrix::Identity(4, 4), env.dt());
  cost.x_goal = env.default_goal;
  VectorSeq u;
  for (int t = 0; t < 20; ++t) u.push_back(Vector::Constant(1, std::sin(0.3 * t)));
  const Trajectory tr = rollout(env, env.default_x0, u, cost);
  EXPECT_DOUBLE_EQ(tr.cost, trajectory_cost(cost, tr.states, tr.controls));
}

TEST(Rollout, NonFiniteStateNamesTimestep) {
  const Environment env = make_linear_environment(Matrix::Constant(1, 1, 1e200),
                                                  Matrix::Identity(1, 1));
  const CostModel cost = testing::quadratic_cost(Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                                                 Matrix::Identity(1, 1), env.dt());
  try {
    rollout(env, Vector::Ones(1), VectorSeq(5, Vector::Zero(1)), cost);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("timestep"), std::string::npos);
  }
}

TEST(Noise, ZeroEpsilonIsPlainStep) {
  const Environment env = make_environment("pendulum");
  const Vector x = (Vector(2) << 0.3, -0.2).finished();
  const Vector u = Vector::Constant(1, 0.7);
  for (NoiseMode mode : {NoiseMode::kStateAdditive, NoiseMode::kControlChannel}) {
    const NoiseModel nm{0.0, mode, 9};
    Fnv1a digest;
    const Fnv1a untouched;
    EXPECT_EQ(step_noisy(env, x, u, nm, 3, 4, &digest), env.step(x, u));
    EXPECT_EQ(digest.value(), untouched.value());
  }
}

TEST(Noise, StateAdditiveScale) {
  const Environment env = make_linear_environment(Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                                                  0.04);
  const NoiseModel nm{0.5, NoiseMode::kStateAdditive, 3};
  NormalStream w(nm.key(7, 2));
  const double expected = 0.5 * std::sqrt(0.04) * w.next_normal();
  const Vector next = step_noisy(env, Vector::Zero(1), Vector::Zero(1), nm, 2, 7);
  EXPECT_DOUBLE_EQ(next[0], expected);
}

TEST(Noise, ControlChannelScale) {
  const Environment env = make_linear_environment(Matrix::Zero(1, 1), Matrix::Identity(1, 1),
                                                  0.1, 3.0);
  const NoiseModel nm{0.4, NoiseMode::kControlChannel, 3};
  NormalStream w(nm.key(1, 0));
  const double expected = 1.0 + 0.4 * 3.0 * w.next_normal();
  const Vector next = step_noisy(env, Vector::Zero(1), Vector::Ones(1), nm, 0, 1);
  EXPECT_DOUBLE_EQ(next[0], expected);
}

TEST(Noise, ParseNames) {
  EXPECT_EQ(parse_noise_mode("state_additive"), NoiseMode::kStateAdditive);
  EXPECT_EQ(parse_noise_mode(to_string(NoiseMode::kControlChannel)), NoiseMode::kControlChannel);
  EXPECT_THROW(parse_noise_mode("brownian"), InvalidArgument);
}

TEST(Random, StreamsAreReproducibleAndDistinct) {
  const StreamKey k{42, StreamDomain::kProcessNoise, 1, 2, 3};
  NormalStream a(k), b(k), c(k.with(1, 2, 4));
  std::set<double> seen;
  for (int i = 0; i < 100; ++i) {
    const double va = a.next_normal();
    EXPECT_EQ(va, b.next_normal());
    EXPECT_NE(va, c.next_normal());
    seen.insert(va);
  }
  EXPECT_EQ(seen.size(), 100u);
}

TEST(Random, NormalMoments) {
  NormalStream s(StreamKey{1, StreamDomain::kUser, 0, 0, 0});
  const int n = 200000;
  double m = 0.0, v = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.next_normal();
    m += z;
    v += z * z;
  }
  m /= n;
  v = v / n - m * m;
  EXPECT_NEAR(m, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(v, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(Random, UniformIsOpenInterval) {
  NormalStream s(StreamKey{2, StreamDomain::kUser, 0, 0, 0});
  for (int i = 0; i < 10000; ++i) {
    const double u = s.next_uniform();
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Parallel, ResultIndependentOfWorkers) {
  std::vector<double> one(1000), many(1000);
  auto fill = [](std::vector<double>& out) {
    return [&out](std::size_t i) {
      NormalStream s(StreamKey{7, StreamDomain::kUser, i, 0, 0});
      out[i] = s.next_normal();
    };
  };
  parallel_for(one.size(), 1, fill(one));
  parallel_for(many.size(), 8, fill(many));
  EXPECT_EQ(one, many);
}

TEST(Parallel, RethrowsLowestFailingIndex) {
  try {
    parallel_for(100, 4, [](std::size_t i) {
      if (i == 30 || i == 80) throw InvalidArgument("index " + std::to_string(i));
    });
    FAIL() << "expected an exception";
  } catch (const InvalidArgument& e) {
    EXPECT_STREQ(e.what(), "index 30");
  }
}

}  // namespace
}  // namespace d2c
