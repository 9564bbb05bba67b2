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

struct Setup {
  Environment env;
  CostModel cost;
  Policy policy;
};

Setup pendulum() {
  Environment env = make_environment("pendulum");
  CostModel cost{Matrix::Identity(2, 2), 0.1 * Matrix::Identity(1, 1), 100.0 * Matrix::Identity(2, 2),
                 env.default_goal, env.dt(), std::nullopt};
  IlqrSettings s;
  s.linearization.method = LinearizationMethod::kAnalytic;
  const IlqrReport r = ilqr_solve(env, cost, env.default_x0, VectorSeq(30, Vector::Zero(1)), s);
  Policy p{r.trajectory, ilqr_gain_extract(r), {}, {}};
  return {std::move(env), std::move(cost), std::move(p)};
}

// Monte Carlo evaluation throughput; the argument is the worker count.
void BM_MonteCarlo(benchmark::State& state) {
  const Setup s = pendulum();
  const NoiseModel noise{0.1, NoiseMode::kStateAdditive, 1};
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const RolloutStats st = monte_carlo_eval(s.env, s.cost, s.policy, noise, 1000, workers);
    benchmark::DoNotOptimize(st.mean_cost);
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_MonteCarlo)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_ReplanEpisode(benchmark::State& state) {
  const Setup s = pendulum();
  const NoiseModel noise{0.5, NoiseMode::kControlChannel, 2};
  ReplanSettings r;
  r.trigger_threshold = 0.05;
  r.max_replans = 3;
  r.ilqr.linearization.method = LinearizationMethod::kAnalytic;
  std::uint64_t i = 0;
  for (auto _ : state) {
    const EpisodeResult ep = replan_rollout(s.env, s.cost, s.policy, noise, r, i++);
    benchmark::DoNotOptimize(ep.cost);
  }
}
BENCHMARK(BM_ReplanEpisode)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
