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

#include "d2c/closed_loop.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "d2c/parallel.hpp"

namespace d2c {

Vector Policy::control(int t, const Vector& x) const {
  const Vector dx = x - nominal.states[t];
  Vector u = nominal.controls[t] + gains.K[t] * dx;
  if (!M.empty()) {
    const MatrixSeq& Mt = M[t];
    for (Eigen::Index j = 0; j < u.size(); ++j) u[j] += dx.dot(Mt[j] * dx);
  }
  return u;
}

Policy Policy::linear_truncation() const {
  Policy p = *this;
  p.M.clear();
  return p;
}

void Policy::validate(const Environment& env) const {
  const int N = horizon();
  if (N < 1 || static_cast<int>(nominal.states.size()) != N + 1)
    throw InvalidArgument("policy: malformed nominal trajectory");
  if (gains.horizon() != N) throw InvalidArgument("policy: gain horizon does not match nominal");
  for (int t = 0; t < N; ++t)
    if (gains.K[t].rows() != env.n_u() || gains.K[t].cols() != env.n_x())
      throw InvalidArgument("policy: gain K_" + std::to_string(t) + " has wrong shape");
  if (!M.empty()) {
    if (static_cast<int>(M.size()) != N) throw InvalidArgument("policy: M horizon mismatch");
    for (const auto& Mt : M) {
      if (static_cast<int>(Mt.size()) != env.n_u())
        throw InvalidArgument("policy: M_t needs one matrix per control channel");
      for (const auto& m : Mt)
        if (m.rows() != env.n_x() || m.cols() != env.n_x())
          throw InvalidArgument("policy: M_t entries must be n_x x n_x");
    }
  }
  if (initial_offset.size() != 0 && initial_offset.size() != env.n_x())
    throw InvalidArgument("policy: initial offset has wrong dimension");
}

bool within_box(const Vector& x, const Vector& goal, const std::optional<Vector>& box) {
  if (!box) return true;
  return ((x - goal).cwiseAbs().array() <= box->array()).all();
}

namespace {

bool blown_up(const Vector& x) {
  return !x.allFinite() || x.cwiseAbs().maxCoeff() > kDivergenceBound;
}

Vector start_state(const Policy& policy) {
  Vector x0 = policy.nominal.states[0];
  if (policy.initial_offset.size() != 0) x0 += policy.initial_offset;
  return x0;
}

void finish_episode(EpisodeResult& ep, const Environment& env, const CostModel& cost,
                    const Vector& x_final, double running) {
  ep.cost = running + cost.terminal(x_final);
  ep.terminal_error = (x_final - cost.x_goal).norm();
  ep.success = env.success_box.has_value() && within_box(x_final, cost.x_goal, env.success_box);
}

void mark_diverged(EpisodeResult& ep) {
  ep.diverged = true;
  ep.success = false;
  ep.cost = std::numeric_limits<double>::infinity();
  ep.terminal_error = std::numeric_limits<double>::infinity();
}

}  // namespace

EpisodeResult closed_loop_rollout(const Environment& env, const CostModel& cost,
                                  const Policy& policy, const NoiseModel& noise,
                                  std::uint64_t sample_id, bool keep_trajectory) {
  const int N = policy.horizon();
  EpisodeResult ep;
  Fnv1a digest;
  Trajectory traj;
  Vector x = start_state(policy);
  if (keep_trajectory) traj.states.push_back(x);
  double running = 0.0;
  for (int t = 0; t < N; ++t) {
    Vector u = policy.control(t, x);
    running += cost.stage(x, u);
    x = step_noisy(env, x, u, noise, static_cast<std::uint64_t>(t), sample_id, &digest);
    if (keep_trajectory) {
      traj.controls.push_back(std::move(u));
      traj.states.push_back(x);
    }
    if (blown_up(x)) {
      mark_diverged(ep);
      break;
    }
  }
  if (!ep.diverged) finish_episode(ep, env, cost, x, running);
  ep.noise_digest = digest.value();
  if (keep_trajectory) {
    traj.cost = ep.cost;
    traj.consistent = noise.epsilon == 0.0 && !ep.diverged;
    ep.trajectory = std::move(traj);
  }
  return ep;
}

double RolloutStats::cost_stderr() const {
  const int n = n_samples - n_diverged;
  return n > 0 ? std::sqrt(var_cost / n) : std::numeric_limits<double>::quiet_NaN();
}

double RolloutStats::terminal_error_stderr() const {
  const int n = n_samples - n_diverged;
  return n > 0 ? std_terminal_error / std::sqrt(static_cast<double>(n))
               : std::numeric_limits<double>::quiet_NaN();
}

RolloutStats summarize(double epsilon, std::vector<EpisodeResult> episodes, bool keep_samples,
                       bool success_defined, bool replanning) {
  RolloutStats s;
  s.epsilon = epsilon;
  s.n_samples = static_cast<int>(episodes.size());
  double sum_c = 0.0, sum_e = 0.0, replans = 0.0;
  int ok = 0, successes = 0;
  for (const auto& ep : episodes) {
    s.extra_evals += ep.extra_evals;
    if (ep.replan_failed) ++s.replan_failures;
    replans += ep.replans;
    if (ep.diverged) {
      ++s.n_diverged;
      continue;
    }
    ++ok;
    if (ep.success) ++successes;
    sum_c += ep.cost;
    sum_e += ep.terminal_error;
  }
  s.divergence_rate = s.n_samples ? static_cast<double>(s.n_diverged) / s.n_samples : 0.0;
  s.success_rate = success_defined && s.n_samples
                       ? static_cast<double>(successes) / s.n_samples
                       : std::numeric_limits<double>::quiet_NaN();
  if (replanning && s.n_samples) s.replan_mean = replans / s.n_samples;
  if (ok == 0) return s;
  s.mean_cost = sum_c / ok;
  s.mean_terminal_error = sum_e / ok;
  double ss_c = 0.0, ss_e = 0.0;
  for (const auto& ep : episodes) {
    if (ep.diverged) continue;
    ss_c += (ep.cost - s.mean_cost) * (ep.cost - s.mean_cost);
    ss_e += (ep.terminal_error - s.mean_terminal_error) * (ep.terminal_error - s.mean_terminal_error);
  }
  s.var_cost = ok > 1 ? ss_c / (ok - 1) : 0.0;
  s.std_terminal_error = ok > 1 ? std::sqrt(ss_e / (ok - 1)) : 0.0;
  if (keep_samples) s.samples = std::move(episodes);
  return s;
}

RolloutStats monte_carlo_eval(const Environment& env, const CostModel& cost, const Policy& policy,
                              const NoiseModel& noise, int n_samples, int workers,
                              bool keep_samples) {
  if (n_samples < 2) throw InvalidArgument("monte_carlo_eval: need at least 2 samples");
  policy.validate(env);
  std::vector<EpisodeResult> episodes(static_cast<std::size_t>(n_samples));
  parallel_for(episodes.size(), workers, [&](std::size_t i) {
    episodes[i] = closed_loop_rollout(env, cost, policy, noise, i);
  });
  RolloutStats s = summarize(noise.epsilon, std::move(episodes), keep_samples,
                             env.success_box.has_value(), false);
  if (s.n_diverged == s.n_samples) {
    std::ostringstream os;
    os << "monte_carlo_eval: all " << n_samples << " samples diverged at epsilon " << noise.epsilon;
    throw NumericalError(os.str());
  }
  return s;
}

std::vector<RolloutStats> noise_sweep(const Environment& env, const CostModel& cost,
                                      const Policy& policy, const NoiseModel& noise,
                                      const std::vector<double>& epsilons, int n_samples,
                                      int workers) {
  if (epsilons.empty()) throw InvalidArgument("noise_sweep: epsilon list is empty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] >= 0.0)) throw InvalidArgument("noise_sweep: epsilons must be non-negative");
    if (i > 0 && epsilons[i] < epsilons[i - 1])
      throw InvalidArgument("noise_sweep: epsilons must be sorted ascending");
  }
  std::vector<RolloutStats> out;
  out.reserve(epsilons.size());
  for (double eps : epsilons) {
    NoiseModel nm = noise;
    nm.epsilon = eps;
    out.push_back(monte_carlo_eval(env, cost, policy, nm, n_samples, workers));
  }
  return out;
}

void ReplanSettings::validate() const {
  if (!(trigger_threshold > 0.0)) throw InvalidArgument("replan: trigger_threshold must be positive");
  if (max_replans < 0) throw InvalidArgument("replan: max_replans must be non-negative");
  ilqr.validate();
}

EpisodeResult replan_rollout(const Environment& env, const CostModel& cost, const Policy& policy,
                             const NoiseModel& noise, const ReplanSettings& replan,
                             std::uint64_t sample_id) {
  replan.validate();
  // A private counter keeps the budget exact when episodes run concurrently.
  const Environment local = env.with_private_counter();
  const int N = policy.horizon();

  EpisodeResult ep;
  Fnv1a digest;
  Policy current = policy;
  int t0 = 0;  // absolute time of current.nominal.states[0]
  bool replanning_enabled = true;
  Vector x = start_state(policy);
  double running = 0.0;

  for (int t = 0; t < N; ++t) {
    Vector dx = x - current.nominal.states[t - t0];
    if (replan.weights) dx = replan.weights->cwiseProduct(dx);
    if (replanning_enabled && ep.replans < replan.max_replans &&
        dx.norm() > replan.trigger_threshold) {
      // Warm start from the current closed loop run noise-free from x, so the
      // solve starts from what the stale policy would do rather than from an
      // open-loop tail that an unstable system amplifies.
      VectorSeq warm;
      warm.reserve(static_cast<std::size_t>(N - t));
      {
        const std::uint64_t before = local.eval_count();
        Vector xs = x;
        for (int s = t; s < N && !blown_up(xs); ++s) {
          warm.push_back(current.control(s - t0, xs));
          xs = local.step(xs, warm.back());
        }
        ep.extra_evals += local.eval_count() - before;
      }
      if (static_cast<int>(warm.size()) != N - t)
        warm.assign(current.nominal.controls.begin() + (t - t0), current.nominal.controls.end());
      IlqrSettings is = replan.ilqr;
      is.linearization.workers = 1;
      is.linearization.seed =
          hash_words({replan.seed, static_cast<std::uint64_t>(StreamDomain::kReplan), sample_id,
                      static_cast<std::uint64_t>(ep.replans)});
      try {
        IlqrReport rep = ilqr_solve(local, cost, x, warm, is);
        FeedbackResult fb = synthesize_feedback(local, cost, rep, replan.feedback,
                                                is.linearization.seed, 1);
        ep.extra_evals += rep.env_eval_count + fb.extra_evals;
        current.nominal = std::move(rep.trajectory);
        current.gains = std::move(fb.gains);
        current.M.clear();
        t0 = t;
        ++ep.replans;
      } catch (const Error&) {
        // Keep the stale policy and stop trying for the rest of the episode.
        ep.replan_failed = true;
        replanning_enabled = false;
      }
    }
    Vector u = current.control(t - t0, x);
    running += cost.stage(x, u);
    x = step_noisy(local, x, u, noise, static_cast<std::uint64_t>(t), sample_id, &digest);
    if (blown_up(x)) {
      mark_diverged(ep);
      break;
    }
  }
  if (!ep.diverged) finish_episode(ep, env, cost, x, running);
  ep.noise_digest = digest.value();
  return ep;
}

RolloutStats replan_eval(const Environment& env, const CostModel& cost, const Policy& policy,
                         const NoiseModel& noise, const ReplanSettings& replan, int n_samples,
                         int workers, bool keep_samples) {
  if (n_samples < 2) throw InvalidArgument("replan_eval: need at least 2 samples");
  policy.validate(env);
  replan.validate();
  std::vector<EpisodeResult> episodes(static_cast<std::size_t>(n_samples));
  parallel_for(episodes.size(), workers, [&](std::size_t i) {
    episodes[i] = replan_rollout(env, cost, policy, noise, replan, i);
  });
  RolloutStats s = summarize(noise.epsilon, std::move(episodes), keep_samples,
                             env.success_box.has_value(), true);
  if (s.n_diverged == s.n_samples)
    throw NumericalError("replan_eval: all samples diverged");
  return s;
}

}  // namespace d2c
