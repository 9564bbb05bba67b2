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

#include <benchmark/benchmark.h>

#include <d2c/d2c.hpp>

namespace {

using namespace d2c;

CostModel swing_up_cost(const Environment& env) {
  return {Matrix::Zero(2, 2), 0.01 * Matrix::Identity(1, 1), 900.0 * Matrix::Identity(2, 2),
          env.default_goal, env.dt(), std::nullopt};
}

void BM_PendulumSwingUp(benchmark::State& state) {
  const Environment env = make_environment("pendulum");
  const CostModel cost = swing_up_cost(env);
  IlqrSettings s;
  s.max_iters = 200;
  s.linearization.method =
      state.range(0) == 0 ? LinearizationMethod::kAnalytic : LinearizationMethod::kLlsCd;
  s.linearization.lls.sigma = 5e-4;
  for (auto _ : state) {
    const IlqrReport r = ilqr_solve(env, cost, env.default_x0, VectorSeq(30, Vector::Zero(1)), s);
    benchmark::DoNotOptimize(r.trajectory.cost);
  }
  state.SetLabel(state.range(0) == 0 ? "analytic" : "lls_cd");
}
BENCHMARK(BM_PendulumSwingUp)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BackwardPass(benchmark::State& state) {
  const int n_x = static_cast<int>(state.range(0));
  const int N = 100;
  const Environment env =
      make_linear_environment(0.9 * Matrix::Identity(n_x, n_x), Matrix::Identity(n_x, n_x / 2));
  const CostModel cost{Matrix::Identity(n_x, n_x), Matrix::Identity(n_x / 2, n_x / 2),
                       Matrix::Identity(n_x, n_x), Vector::Zero(n_x), env.dt(), std::nullopt};
  const Trajectory tr =
      rollout(env, Vector::Ones(n_x), VectorSeq(N, Vector::Zero(n_x / 2)), cost);
  const Jacobians J = env.analytic_jacobians(Vector::Zero(n_x), Vector::Zero(n_x / 2));
  const LinearizationSchedule lin{MatrixSeq(N, J.A), MatrixSeq(N, J.B), {}};
  for (auto _ : state) {
    const BackwardPassResult bp = backward_pass(lin, tr, cost, 1e-6);
    benchmark::DoNotOptimize(bp.dV1);
  }
}
BENCHMARK(BM_BackwardPass)->Arg(4)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
