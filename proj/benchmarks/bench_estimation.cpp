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

// One LLS-CD Jacobian at a fixed point; the argument picks the system.
void BM_LlsCdJacobian(benchmark::State& state) {
  const bool cart = state.range(0) == 1;
  const Environment env = make_environment(cart ? "cartpole" : "pendulum");
  const Vector x = Vector::Constant(env.n_x(), 0.3);
  const Vector u = Vector::Constant(env.n_u(), 0.1);
  std::uint64_t i = 0;
  for (auto _ : state) {
    const JacobianEstimate e =
        lls_cd_jacobian(env, x, u, LlsCdSettings{}, StreamKey{1, StreamDomain::kEstimation, i++, 0, 0});
    benchmark::DoNotOptimize(e.A.data());
  }
  state.SetLabel(env.name());
}
BENCHMARK(BM_LlsCdJacobian)->Arg(0)->Arg(1);

void BM_LlsCdHessian(benchmark::State& state) {
  const Environment env = make_environment("cartpole");
  const Vector x = Vector::Constant(4, 0.3);
  const Vector u = Vector::Constant(1, 0.1);
  std::uint64_t i = 0;
  for (auto _ : state) {
    const SecondOrderTerms t =
        lls_cd_hessian(env, x, u, HessianSettings{}, StreamKey{2, StreamDomain::kHessian, i++, 0, 0});
    benchmark::DoNotOptimize(t.xx.data());
  }
}
BENCHMARK(BM_LlsCdHessian);

// Whole-trajectory linearization of an Allen-Cahn rollout; the argument is
// the grid side.
void BM_LinearizeAllenCahn(benchmark::State& state) {
  EnvParams p;
  p.scalars["grid"] = static_cast<double>(state.range(0));
  p.scalars["patch"] = 2;
  const Environment env = make_environment("allen_cahn", p);
  CostModel cost{Matrix::Identity(env.n_x(), env.n_x()), Matrix::Identity(env.n_u(), env.n_u()),
                 Matrix::Identity(env.n_x(), env.n_x()), env.default_goal, env.dt(), std::nullopt};
  const Trajectory tr = rollout(env, env.default_x0, VectorSeq(10, Vector::Zero(env.n_u())), cost);
  LinearizationOptions o;
  for (auto _ : state) {
    const LinearizationSchedule lin = linearize_trajectory(env, tr, o);
    benchmark::DoNotOptimize(lin.A.data());
    ++o.round;
  }
}
BENCHMARK(BM_LinearizeAllenCahn)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
