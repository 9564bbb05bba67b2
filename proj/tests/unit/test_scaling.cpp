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

TEST(SlopeFit, ExactPowerLaws) {
  const std::vector<double> eps{0.01, 0.03, 0.1, 0.3};
  std::vector<double> quartic, quadratic;
  for (double e : eps) {
    quartic.push_back(3.0 * std::pow(e, 4));
    quadratic.push_back(0.5 * e * e);
  }
  const SlopeFit f4 = loglog_slope_fit(eps, quartic);
  EXPECT_NEAR(f4.slope, 4.0, 1e-12);
  EXPECT_NEAR(f4.intercept, std::log(3.0), 1e-11);
  EXPECT_EQ(f4.ci_low, f4.slope);
  EXPECT_EQ(f4.ci_high, f4.slope);
  EXPECT_EQ(f4.n_points, 4);
  EXPECT_NEAR(loglog_slope_fit(eps, quadratic).slope, 2.0, 1e-12);
}

TEST(SlopeFit, RejectsDegenerateInput) {
  EXPECT_THROW(loglog_slope_fit({0.1}, {1.0}), InvalidArgument);
  EXPECT_THROW(loglog_slope_fit({0.1, 0.1}, {1.0, 2.0}), InvalidArgument);
  EXPECT_THROW(loglog_slope_fit({0.1, 0.2}, {1.0}), InvalidArgument);
  EXPECT_THROW(loglog_slope_fit({0.1, 0.2}, {1.0, -2.0}), InvalidArgument);
  EXPECT_THROW(loglog_slope_fit({0.1, 0.2}, {1.0, 2.0}, {0.1}), InvalidArgument);
}

TEST(SlopeFit, BootstrapIntervalIsCalibrated) {
  // Synthetic studies with a known slope of 2 and 5% relative noise: the 95%
  // interval should cover the truth in at least 90% of repetitions.
  const std::vector<double> eps{0.01, 0.02, 0.04, 0.08, 0.16};
  int covered = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    NormalStream rng(StreamKey{40, StreamDomain::kUser, static_cast<std::uint64_t>(r), 0, 0});
    std::vector<double> v, se;
    for (double e : eps) {
      const double truth = 7.0 * e * e;
      se.push_back(0.05 * truth);
      v.push_back(truth + se.back() * rng.next_normal());
    }
    const SlopeFit f = loglog_slope_fit(eps, v, se, 500, static_cast<std::uint64_t>(r));
    EXPECT_LE(f.ci_low, f.slope);
    EXPECT_GE(f.ci_high, f.slope);
    if (f.ci_low <= 2.0 && 2.0 <= f.ci_high) ++covered;
  }
  EXPECT_GE(covered, static_cast<int>(0.9 * reps));
}

TEST(SlopeFit, BootstrapIsSeedDeterministic) {
  const std::vector<double> eps{0.1, 0.2, 0.4};
  const std::vector<double> v{1.0, 4.1, 15.8}, se{0.1, 0.3, 1.0};
  const SlopeFit a = loglog_slope_fit(eps, v, se, 300, 9);
  const SlopeFit b = loglog_slope_fit(eps, v, se, 300, 9);
  EXPECT_EQ(a.ci_low, b.ci_low);
  EXPECT_EQ(a.ci_high, b.ci_high);
}

TEST(Verdict, Names) {
  EXPECT_EQ(to_string(Verdict::kConsistent), "consistent");
  EXPECT_EQ(to_string(Verdict::kDegenerate), "degenerate");
}

struct LqLoop {
  Environment env;
  CostModel cost;
  Policy policy;
  LinearizationSchedule lin;
};

// Optimal LQR closed loop of a random stable system started at x0.
LqLoop lq_loop(std::uint64_t seed, const Vector& x0, int N) {
  NormalStream rng(StreamKey{seed, StreamDomain::kUser, 0, 0, 0});
  const int n_x = static_cast<int>(x0.size());
  const auto sys = testing::random_stable_system(rng, n_x, 1);
  Environment env = make_linear_environment(sys.A, sys.B, 0.1);
  CostModel cost = testing::quadratic_cost(testing::random_spd(rng, n_x, 0.5, 2.0),
                                           testing::random_spd(rng, 1, 0.5, 2.0),
                                           testing::random_spd(rng, n_x, 1.0, 5.0), env.dt());
  const RiccatiSolution r = riccati_lqr_oracle(sys.A, sys.B, cost.Q * cost.dt, cost.R * cost.dt,
                                               cost.Q_T, N, x0);
  Policy p;
  p.nominal = rollout(env, x0, r.controls, cost);
  p.gains = GainSchedule::zeros(N, n_x, 1);
  p.gains.K = r.K;
  LinearizationSchedule lin{MatrixSeq(N, sys.A), MatrixSeq(N, sys.B), {}};
  return {std::move(env), std::move(cost), std::move(p), std::move(lin)};
}

ScalingOptions options(int n, std::uint64_t seed) {
  ScalingOptions o;
  o.n_samples = n;
  o.seed = seed;
  o.bootstrap = 400;
  return o;
}

TEST(Scaling, LinearMeanCostSlopeIsTwo) {
  const LqLoop l = lq_loop(41, Vector::Constant(3, 1.0), 30);
  const ScalingStudy s =
      mean_cost_scaling(l.env, l.cost, l.policy, {0.05, 0.1, 0.2, 0.4}, options(4000, 1));
  ASSERT_TRUE(s.fit.has_value()) << s.note;
  EXPECT_NEAR(s.fit->slope, 2.0, 0.1);
  EXPECT_EQ(s.verdict, Verdict::kConsistent);
  EXPECT_EQ(s.baseline_cost, l.policy.nominal.cost);
  EXPECT_EQ(s.stats.size(), 4u);
}

TEST(Scaling, LinearStdSlopeIsOneAndMatchesCostate) {
  const LqLoop l = lq_loop(42, Vector::Constant(3, 1.0), 30);
  const ScalingStudy s = variance_scaling(l.env, l.cost, l.policy, {0.001, 0.002, 0.004, 0.008},
                                          options(4000, 2), &l.lin);
  ASSERT_TRUE(s.fit.has_value()) << s.note;
  EXPECT_NEAR(s.fit->slope, 1.0, 0.05);
  EXPECT_EQ(s.verdict, Verdict::kConsistent);
  ASSERT_TRUE(s.first_order_coefficient.has_value());
  // At small eps the observed Std / eps agrees with the costate prediction
  // up to sampling error (relative SE about 1 / sqrt(2 n)).
  const double observed = s.points.front().quantity / s.points.front().epsilon;
  EXPECT_NEAR(observed, *s.first_order_coefficient, 0.05 * *s.first_order_coefficient);
  EXPECT_NE(s.note.find("first-order Std/eps"), std::string::npos);
}

TEST(Scaling, StdDegeneratesAtRestOnGoal) {
  // Starting on the goal with zero controls the first-order sensitivity is
  // identically zero, so Std(J) is O(eps^2).
  const LqLoop l = lq_loop(43, Vector::Zero(2), 20);
  const ScalingStudy s = variance_scaling(l.env, l.cost, l.policy, {0.01, 0.02, 0.04, 0.08},
                                          options(2000, 3), &l.lin);
  EXPECT_EQ(s.verdict, Verdict::kDegenerate);
  EXPECT_EQ(s.expected_slope, 2.0);
  ASSERT_TRUE(s.fit.has_value());
  EXPECT_NEAR(s.fit->slope, 2.0, 0.1);
  EXPECT_EQ(*s.first_order_coefficient, 0.0);
}

TEST(Scaling, TruncationGapVanishesWithoutQuadraticTerm) {
  const LqLoop l = lq_loop(44, Vector::Constant(2, 1.0), 20);
  const ScalingStudy s =
      linear_truncation_gap(l.env, l.cost, l.policy, {0.1, 0.2, 0.4}, options(200, 4));
  for (const auto& p : s.points) EXPECT_EQ(p.quantity, 0.0);
  EXPECT_EQ(s.verdict, Verdict::kInconclusive);
  EXPECT_NE(s.note.find("no quadratic term"), std::string::npos);
}

TEST(Scaling, TruncationGapSlopeIsFourAboutOptimalNominal) {
  // About an LQ optimum the cost is exactly quadratic in the controls and the
  // cross term with the linear deviation has zero mean, so the gap is O(eps^4).
  LqLoop l = lq_loop(45, Vector::Constant(2, 1.0), 20);
  NormalStream rng(StreamKey{46, StreamDomain::kUser, 0, 0, 0});
  // Small enough that the quadratic feedback stays tame over the grid. The
  // zero-mean eps^3 cross term dominates each sample, hence the sample count.
  l.policy.M.assign(20, MatrixSeq{0.05 * testing::random_spd(rng, 2, 0.5, 1.0)});
  const ScalingStudy s =
      linear_truncation_gap(l.env, l.cost, l.policy, {0.4, 0.8, 1.6}, options(40000, 5));
  ASSERT_TRUE(s.fit.has_value()) << s.note;
  EXPECT_EQ(s.verdict, Verdict::kConsistent) << s.note;
  EXPECT_NEAR(s.fit->slope, 4.0, 0.4);
}

TEST(Scaling, GridValidation) {
  const LqLoop l = lq_loop(47, Vector::Constant(2, 1.0), 5);
  const ScalingOptions o = options(10, 0);
  EXPECT_THROW(mean_cost_scaling(l.env, l.cost, l.policy, {0.1}, o), InvalidArgument);
  EXPECT_THROW(mean_cost_scaling(l.env, l.cost, l.policy, {0.2, 0.1}, o), InvalidArgument);
  EXPECT_THROW(variance_scaling(l.env, l.cost, l.policy, {0.0, 0.1}, o), InvalidArgument);
}

TEST(Scaling, NoiseFloorExcludesUnresolvedPoints) {
  // Too few samples at tiny eps: the mean shift is buried in sampling error.
  const LqLoop l = lq_loop(48, Vector::Constant(3, 1.0), 30);
  const ScalingStudy s =
      mean_cost_scaling(l.env, l.cost, l.policy, {1e-4, 2e-4}, options(20, 6));
  EXPECT_EQ(s.verdict, Verdict::kInconclusive);
  EXPECT_NE(s.note.find("noise floor"), std::string::npos);
  for (const auto& p : s.points) EXPECT_FALSE(p.included);
}

}  // namespace
}  // namespace d2c
