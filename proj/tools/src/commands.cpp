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

#include "d2c_app/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

namespace d2c::app {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

// Config plus command-line overrides, resolved into a runnable problem.
struct Context {
  ExperimentConfig cfg;
  Problem problem;
  std::uint64_t seed = 0;
  int workers = 1;
  fs::path out;
  FeedbackSettings feedback;
  IlqrSettings ilqr;
};

Context make_context(const RunOptions& opts) {
  if (opts.config_path.empty()) throw ConfigError("--config is required");
  if (opts.workers < 1) throw ConfigError("--workers must be at least 1");
  ExperimentConfig cfg = load_config(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.feedback_mode) {
    try {
      cfg.feedback.mode = parse_gain_mode(*opts.feedback_mode);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("--feedback-mode: ") + e.what());
    }
  }
  Problem problem = build_problem(cfg);
  Context ctx{cfg, std::move(problem), cfg.seed, opts.workers, {}, cfg.feedback, cfg.ilqr};
  ctx.out = !opts.out_dir.empty() ? fs::path(opts.out_dir)
            : !cfg.output.empty() ? fs::path(cfg.output)
                                  : fs::path("out");
  const int n_x = ctx.problem.env.n_x();
  const int n_u = ctx.problem.env.n_u();
  if (!cfg.Q_s.is_null()) ctx.feedback.Q_s = matrix_from_json(cfg.Q_s, n_x, "feedback.Q_s");
  if (!cfg.R_s.is_null()) ctx.feedback.R_s = matrix_from_json(cfg.R_s, n_u, "feedback.R_s");
  if (!cfg.Q_sT.is_null()) ctx.feedback.Q_sT = matrix_from_json(cfg.Q_sT, n_x, "feedback.Q_sT");
  ctx.ilqr.linearization.seed = ctx.seed;
  ctx.ilqr.linearization.workers = ctx.workers;
  return ctx;
}

Metadata metadata(const Context& ctx, const std::string& command) {
  Metadata m;
  m.add("tool", std::string("d2c"))
      .add("version", std::string(D2C_VERSION))
      .add("command", command)
      .add("config", ctx.cfg.path)
      .add("config_digest", ctx.cfg.digest)
      .add("seed", ctx.seed)
      .add("env", ctx.problem.env.name());
  return m;
}

ojson to_json(const Metadata& m) {
  ojson j = ojson::object();
  for (const auto& [k, v] : m.fields) j[k] = v;
  return j;
}

ojson to_json(const Vector& v) {
  ojson j = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

ojson row_major(const Matrix& m) {
  ojson j = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) j.push_back(m(r, c));
  return j;
}

ojson finite_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  return f;
}

void write_json(const fs::path& path, const ojson& j) {
  auto f = open_output(path);
  f << j.dump(2) << '\n';
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::string fixed(double v, int prec = 4) {
  if (!std::isfinite(v)) return format_double(v);
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

struct TrainOutcome {
  IlqrReport report;
  FeedbackResult feedback;
  double ilqr_seconds = 0.0;
  double feedback_seconds = 0.0;
};

TrainOutcome solve(const Context& ctx, const IlqrSettings& settings) {
  TrainOutcome out;
  const auto t0 = Clock::now();
  out.report = ilqr_solve(ctx.problem.env, ctx.problem.cost, ctx.problem.x0, ctx.problem.u_init,
                          settings);
  out.ilqr_seconds = seconds_since(t0);
  const auto t1 = Clock::now();
  out.feedback = synthesize_feedback(ctx.problem.env, ctx.problem.cost, out.report, ctx.feedback,
                                     ctx.seed, ctx.workers);
  out.feedback_seconds = seconds_since(t1);
  return out;
}

ojson gains_json(const Context& ctx, const TrainOutcome& t) {
  ojson j;
  j["metadata"] = to_json(metadata(ctx, "train"));
  j["mode"] = to_string(t.feedback.mode);
  j["horizon"] = t.feedback.gains.horizon();
  j["n_x"] = ctx.problem.env.n_x();
  j["n_u"] = ctx.problem.env.n_u();
  ojson K = ojson::array();
  for (const auto& k : t.feedback.gains.K) K.push_back(row_major(k));
  j["K"] = std::move(K);
  j["stationarity_residuals"] = ojson::array();
  for (double r : t.feedback.stationarity_residual) j["stationarity_residuals"].push_back(r);
  j["regularization"] = ojson::array();
  for (double r : t.feedback.regularization) j["regularization"].push_back(r);
  j["warnings"] = ojson::array();
  for (const auto& w : t.feedback.warnings) j["warnings"].push_back(w);
  return j;
}

GainSchedule read_gains_json(const fs::path& path, int N, int n_x, int n_u) {
  std::ifstream in(path);
  if (!in) throw ConfigError("missing artifact '" + path.string() + "'; run train first");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!j.contains("K") || !j["K"].is_array() || static_cast<int>(j["K"].size()) != N)
    throw ConfigError("'" + path.string() + "' does not hold " + std::to_string(N) + " gains");
  GainSchedule g = GainSchedule::zeros(N, n_x, n_u);
  for (int t = 0; t < N; ++t) {
    const auto& flat = j["K"][t];
    if (!flat.is_array() || static_cast<int>(flat.size()) != n_x * n_u)
      throw ConfigError("'" + path.string() + "': gain " + std::to_string(t) + " has wrong size");
    for (int r = 0; r < n_u; ++r)
      for (int c = 0; c < n_x; ++c) g.K[t](r, c) = flat[r * n_x + c].get<double>();
  }
  return g;
}

}  // namespace

int cmd_train(const RunOptions& opts) {
  const auto start = Clock::now();
  Context ctx = make_context(opts);
  ensure_dir(ctx.out);
  TrainOutcome t = solve(ctx, ctx.ilqr);
  const IlqrReport& r = t.report;
  const Metadata meta = metadata(ctx, "train");

  {
    auto f = open_output(ctx.out / "nominal.csv");
    write_trajectory_csv(f, r.trajectory, meta);
  }
  write_json(ctx.out / "gains.json", gains_json(ctx, t));
  {
    auto f = open_output(ctx.out / "convergence.csv");
    write_convergence_csv(f, r, meta);
  }

  const Environment& env = ctx.problem.env;
  const CostModel& cost = ctx.problem.cost;
  const Vector& xN = r.trajectory.states.back();
  ojson rep;
  rep["metadata"] = to_json(meta);
  rep["env"] = {{"name", env.name()}, {"n_x", env.n_x()}, {"n_u", env.n_u()}, {"dt", env.dt()}};
  ojson params = ojson::object();
  for (const auto& [k, v] : env.params) params[k] = v;
  rep["env"]["params"] = std::move(params);
  rep["horizon"] = r.trajectory.horizon();
  rep["linearization"] = to_string(ctx.ilqr.linearization.method);
  rep["iterations"] = r.iterations;
  rep["converged"] = r.converged;
  rep["message"] = r.message;
  rep["initial_cost"] = r.history.front().cost;
  rep["final_cost"] = r.trajectory.cost;
  rep["env_evals"] = {{"ilqr", r.env_eval_count},
                      {"feedback", t.feedback.extra_evals},
                      {"total", r.env_eval_count + t.feedback.extra_evals}};
  rep["terminal_state"] = to_json(xN);
  rep["terminal_error"] = (xN - cost.x_goal).norm();
  rep["success"] = env.success_box ? ojson(within_box(xN, cost.x_goal, env.success_box))
                                   : ojson(nullptr);
  rep["feedback_mode"] = to_string(t.feedback.mode);
  rep["feedback_warnings"] = ojson::array();
  for (const auto& w : t.feedback.warnings) rep["feedback_warnings"].push_back(w);
  write_json(ctx.out / "report.json", rep);

  ojson timing;
  timing["workers"] = ctx.workers;
  timing["ilqr_seconds"] = t.ilqr_seconds;
  timing["feedback_seconds"] = t.feedback_seconds;
  timing["total_seconds"] = seconds_since(start);
  write_json(ctx.out / "timing.json", timing);

  std::cout << "train " << env.name() << ": " << (r.converged ? "converged" : "NOT converged")
            << " after " << r.iterations << " iterations (" << r.message << ")\n"
            << "  cost " << fixed(r.history.front().cost) << " -> " << fixed(r.trajectory.cost)
            << ", terminal error " << fixed((xN - cost.x_goal).norm()) << ", env evals "
            << r.env_eval_count + t.feedback.extra_evals << "\n"
            << "  gains: " << to_string(t.feedback.mode) << ", artifacts in " << ctx.out.string()
            << "\n";
  for (const auto& w : t.feedback.warnings) std::cerr << "warning: " << w << "\n";
  return r.converged ? kOk : kNumericalFailure;
}

int cmd_eval(const RunOptions& opts) {
  Context ctx = make_context(opts);
  const Environment& env0 = ctx.problem.env;
  const CostModel& cost = ctx.problem.cost;
  const fs::path nominal_path = ctx.out / "nominal.csv";
  std::ifstream in(nominal_path);
  if (!in) throw ConfigError("missing artifact '" + nominal_path.string() + "'; run train first");
  const Trajectory stored = read_trajectory_csv(in);
  if (stored.states[0].size() != env0.n_x() || stored.controls[0].size() != env0.n_u())
    throw ConfigError("'" + nominal_path.string() + "' does not match the configured environment");

  Policy policy;
  policy.nominal = rollout(env0, stored.states[0], stored.controls, cost);
  for (std::size_t t = 0; t < stored.states.size(); ++t)
    if (stored.states[t] != policy.nominal.states[t]) {
      std::cerr << "warning: stored nominal differs from re-simulation at t=" << t
                << "; using the re-simulated states\n";
      break;
    }
  const int N = policy.horizon();
  policy.gains = read_gains_json(ctx.out / "gains.json", N, env0.n_x(), env0.n_u());

  Environment env = env0;
  if (ctx.cfg.noise.mode == NoiseMode::kControlChannel && ctx.cfg.noise.u_max_from_nominal) {
    Vector u_max = Vector::Zero(env0.n_u());
    for (const auto& u : policy.nominal.controls) u_max = u_max.cwiseMax(u.cwiseAbs());
    for (Eigen::Index j = 0; j < u_max.size(); ++j)
      if (!(u_max[j] > 0.0)) u_max[j] = env0.u_max()[j];
    env = env0.with_u_max(u_max);
  }

  const NoiseModel noise{0.0, ctx.cfg.noise.mode, ctx.seed};
  const auto& eps = ctx.cfg.noise.epsilons;
  const int n = ctx.cfg.noise.n_samples;
  Metadata meta = metadata(ctx, "eval");
  meta.add("noise_mode", to_string(noise.mode));
  meta.add("policy", std::string("feedback"));

  const auto rows = noise_sweep(env, cost, policy, noise, eps, n, ctx.workers);
  {
    auto f = open_output(ctx.out / "sweep.csv");
    write_sweep_csv(f, rows, meta);
  }

  std::vector<RolloutStats> open_rows, replan_rows;
  if (ctx.cfg.noise.compare_open_loop) {
    Policy open = policy;
    open.gains = GainSchedule::zeros(N, env.n_x(), env.n_u());
    open_rows = noise_sweep(env, cost, open, noise, eps, n, ctx.workers);
    Metadata m = metadata(ctx, "eval");
    m.add("noise_mode", to_string(noise.mode)).add("policy", std::string("open_loop"));
    auto f = open_output(ctx.out / "sweep_open_loop.csv");
    write_sweep_csv(f, open_rows, m);
  }
  if (ctx.cfg.replan.enabled) {
    ReplanSettings rs;
    rs.trigger_threshold = ctx.cfg.replan.trigger_threshold;
    rs.max_replans = ctx.cfg.replan.max_replans;
    rs.weights = ctx.cfg.replan.weights;
    rs.ilqr = ctx.ilqr;
    rs.feedback = ctx.feedback;
    rs.seed = ctx.seed;
    for (double e : eps) {
      NoiseModel nm = noise;
      nm.epsilon = e;
      replan_rows.push_back(replan_eval(env, cost, policy, nm, rs, n, ctx.workers));
    }
    Metadata m = metadata(ctx, "eval");
    m.add("noise_mode", to_string(noise.mode)).add("policy", std::string("replan"));
    m.add("trigger_threshold", rs.trigger_threshold);
    auto f = open_output(ctx.out / "sweep_replan.csv");
    write_sweep_csv(f, replan_rows, m);
  }

  std::cout << "eval " << env.name() << " (" << to_string(noise.mode) << ", " << n
            << " samples per epsilon)\n";
  std::cout << "  epsilon  mean_cost  mean_term_err  success  diverged";
  if (!open_rows.empty()) std::cout << "  open_loop_err";
  if (!replan_rows.empty()) std::cout << "  replan_err  replans";
  std::cout << "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& s = rows[i];
    std::cout << "  " << std::setw(7) << fixed(s.epsilon, 3) << "  " << std::setw(9)
              << fixed(s.mean_cost) << "  " << std::setw(13) << fixed(s.mean_terminal_error)
              << "  " << std::setw(7) << fixed(s.success_rate, 3) << "  " << std::setw(8)
              << fixed(s.divergence_rate, 3);
    if (!open_rows.empty()) std::cout << "  " << std::setw(13) << fixed(open_rows[i].mean_terminal_error);
    if (!replan_rows.empty())
      std::cout << "  " << std::setw(10) << fixed(replan_rows[i].mean_terminal_error) << "  "
                << std::setw(7) << fixed(replan_rows[i].replan_mean, 3);
    std::cout << "\n";
  }
  return kOk;
}

int cmd_scaling(const RunOptions& opts) {
  Context ctx = make_context(opts);
  ensure_dir(ctx.out);
  const ScalingConfig& sc = ctx.cfg.scaling;
  IlqrSettings tight = ctx.ilqr;
  tight.conv_eps = sc.conv_eps;
  tight.max_iters = sc.max_iters;
  const TrainOutcome t = solve(ctx, tight);

  const Environment& env = ctx.problem.env;
  const CostModel& cost = ctx.problem.cost;
  Policy policy{t.report.trajectory, t.feedback.gains, {}, {}};

  ScalingOptions so;
  so.n_samples = sc.n_samples;
  so.workers = ctx.workers;
  so.seed = ctx.seed;
  so.bootstrap = sc.bootstrap;
  const ScalingStudy mean = mean_cost_scaling(env, cost, policy, sc.epsilons_mean, so);
  const ScalingStudy spread = variance_scaling(env, cost, policy, sc.epsilons_std, so,
                                                &t.report.linearization);

  Policy policy_nl = policy;
  policy_nl.M.assign(static_cast<std::size_t>(policy.horizon()),
                     MatrixSeq(static_cast<std::size_t>(env.n_u()),
                               sc.quadratic_gain * Matrix::Identity(env.n_x(), env.n_x())));
  if (sc.quadratic_gain == 0.0) policy_nl.M.clear();
  ScalingOptions so_t = so;
  so_t.n_samples = sc.n_samples_truncation;
  const ScalingStudy trunc = linear_truncation_gap(env, cost, policy_nl, sc.epsilons_truncation, so_t);

  Metadata meta = metadata(ctx, "scaling");
  meta.add("noise_mode", to_string(NoiseMode::kStateAdditive));
  ojson verdict;
  verdict["metadata"] = to_json(meta);
  verdict["nominal"] = {{"converged", t.report.converged},
                        {"iterations", t.report.iterations},
                        {"cost", t.report.trajectory.cost},
                        {"feedback_mode", to_string(t.feedback.mode)}};
  verdict["studies"] = ojson::array();
  for (const ScalingStudy* s : {&mean, &spread, &trunc}) {
    {
      Metadata m = meta;
      m.add("study", s->name);
      auto f = open_output(ctx.out / ("study_" + s->name + ".csv"));
      write_study_csv(f, *s, m);
    }
    ojson j;
    j["name"] = s->name;
    j["expected_slope"] = s->expected_slope;
    j["tolerance"] = s->tolerance;
    j["baseline_cost"] = s->baseline_cost;
    if (s->fit) {
      j["slope"] = s->fit->slope;
      j["intercept"] = s->fit->intercept;
      j["ci"] = {finite_or_null(s->fit->ci_low), finite_or_null(s->fit->ci_high)};
      j["n_points"] = s->fit->n_points;
    } else {
      j["slope"] = nullptr;
      j["ci"] = nullptr;
      j["n_points"] = 0;
    }
    if (s->first_order_coefficient) j["first_order_coefficient"] = *s->first_order_coefficient;
    j["verdict"] = to_string(s->verdict);
    j["note"] = s->note;
    verdict["studies"].push_back(std::move(j));
  }
  write_json(ctx.out / "verdict.json", verdict);

  std::cout << "scaling " << env.name() << " (nominal cost " << fixed(t.report.trajectory.cost, 6)
            << ", " << (t.report.converged ? "converged" : "not converged") << ")\n";
  for (const ScalingStudy* s : {&mean, &spread, &trunc}) {
    std::cout << "  " << std::left << std::setw(15) << s->name << std::right << " expected "
              << fixed(s->expected_slope, 2) << "  slope "
              << (s->fit ? fixed(s->fit->slope, 4) : std::string("-")) << "  "
              << to_string(s->verdict) << "\n";
  }
  return kOk;
}

namespace {

struct CheckRow {
  std::string name;
  bool pass;
  std::string detail;
};

CheckRow check_lqr_oracle() {
  NormalStream rng(StreamKey{7, StreamDomain::kUser, 1, 0, 0});
  const int n_x = 3, n_u = 2, N = 20;
  Matrix A = rng.normal_matrix(n_x, n_x);
  A *= 0.9 / Eigen::EigenSolver<Matrix>(A).eigenvalues().cwiseAbs().maxCoeff();
  const Matrix B = rng.normal_matrix(n_x, n_u);
  Environment env = make_linear_environment(A, B, 0.1);
  CostModel cost{Matrix::Identity(n_x, n_x), Matrix::Identity(n_u, n_u),
                 10.0 * Matrix::Identity(n_x, n_x), Vector::Zero(n_x), 0.1, std::nullopt};
  const Vector x0 = rng.normal_vector(n_x);
  IlqrSettings s;
  s.linearization.method = LinearizationMethod::kAnalytic;
  const IlqrReport r = ilqr_solve(env, cost, x0, VectorSeq(N, Vector::Zero(n_u)), s);
  const RiccatiSolution o = riccati_lqr_oracle(A, B, cost.Q * 0.1, cost.R * 0.1, cost.Q_T, N, x0);
  const double rel = std::abs(r.trajectory.cost - o.cost) / o.cost;
  return {"lqr_oracle", rel <= 1e-8 && r.iterations <= 2,
          "relative cost error " + fixed(rel, 3) + ", iterations " + std::to_string(r.iterations)};
}

CheckRow check_jacobian(const Environment& env, const Vector& x, const Vector& u) {
  if (!env.has_analytic_jacobians())
    return {"jacobian_" + env.name(), true, "skipped: no analytic Jacobians"};
  const Jacobians J = env.analytic_jacobians(x, u);
  const JacobianEstimate est =
      lls_cd_jacobian(env, x, u, LlsCdSettings{}, StreamKey{11, StreamDomain::kEstimation, 0, 0, 0});
  Matrix AB(env.n_x(), env.n_x() + env.n_u()), AB_hat(env.n_x(), env.n_x() + env.n_u());
  AB << J.A, J.B;
  AB_hat << est.A, est.B;
  const double err = (AB - AB_hat).norm();
  const double tol = 1e-4 * std::max(1.0, AB.norm());
  return {"jacobian_" + env.name(), err <= tol, "Frobenius error " + fixed(err, 3)};
}

CheckRow check_digest(int workers) {
  Environment env = make_environment("pendulum");
  CostModel cost{Matrix::Zero(2, 2), 0.01 * Matrix::Identity(1, 1), 900.0 * Matrix::Identity(2, 2),
                 env.default_goal, env.dt(), std::nullopt};
  IlqrSettings s;
  s.linearization.method = LinearizationMethod::kAnalytic;
  const IlqrReport r = ilqr_solve(env, cost, env.default_x0, VectorSeq(30, Vector::Zero(1)), s);
  const Policy p{r.trajectory, ilqr_gain_extract(r), {}, {}};
  const NoiseModel noise{0.1, NoiseMode::kStateAdditive, 5};
  const int w = std::max(workers, 4);
  const RolloutStats a = monte_carlo_eval(env, cost, p, noise, 400, 1);
  const RolloutStats b = monte_carlo_eval(env, cost, p, noise, 400, w);
  std::ostringstream sa, sb;
  write_sweep_csv(sa, {a}, {});
  write_sweep_csv(sb, {b}, {});
  return {"worker_digest", sa.str() == sb.str(),
          "1 vs " + std::to_string(w) + " workers, 400 samples"};
}

}  // namespace

int cmd_check(const RunOptions& opts) {
  std::vector<CheckRow> rows;
  rows.push_back(check_lqr_oracle());
  {
    Environment p = make_environment("pendulum");
    Vector x(2), u(1);
    x << 1.0, 0.5;
    u << 0.2;
    rows.push_back(check_jacobian(p, x, u));
  }
  if (!opts.config_path.empty()) {
    if (opts.workers < 1) throw ConfigError("--workers must be at least 1");
    const ExperimentConfig cfg = load_config(opts.config_path);
    const Problem prob = build_problem(cfg);
    rows.push_back(check_jacobian(prob.env, prob.x0, Vector::Constant(prob.env.n_u(), 0.1)));
  }
  rows.push_back(check_digest(opts.workers));

  bool all = true;
  std::cout << "check                 result  detail\n";
  for (const auto& r : rows) {
    all = all && r.pass;
    std::cout << "  " << std::left << std::setw(20) << r.name << std::right
              << (r.pass ? "pass  " : "FAIL  ") << "  " << r.detail << "\n";
  }
  return all ? kOk : kNumericalFailure;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"d2c: decoupled data-based control pipeline"};
  app.require_subcommand(1);
  RunOptions opts;
  std::uint64_t seed = 0;
  std::string mode;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", opts.config_path, "Experiment config (JSON)");
    if (config_required) c->required();
    sub->add_option("--out", opts.out_dir, "Output/artifact directory");
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--workers", opts.workers, "Worker threads (results do not depend on it)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--feedback-mode", mode, "ilqr, prop2 or surrogate_lqr");
  };
  CLI::App* train = app.add_subcommand("train", "Solve the open-loop problem and build gains");
  CLI::App* eval = app.add_subcommand("eval", "Noisy closed-loop evaluation of trained artifacts");
  CLI::App* scaling = app.add_subcommand("scaling", "Empirical noise-scaling studies");
  CLI::App* check = app.add_subcommand("check", "Fast oracle self-tests");
  add_common(train, true);
  add_common(eval, true);
  add_common(scaling, true);
  add_common(check, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsageError;
  }
  for (CLI::App* sub : {train, eval, scaling, check}) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed")) opts.seed = seed;
    if (sub->count("--feedback-mode")) opts.feedback_mode = mode;
  }

  try {
    if (train->parsed()) return cmd_train(opts);
    if (eval->parsed()) return cmd_eval(opts);
    if (scaling->parsed()) return cmd_scaling(opts);
    return cmd_check(opts);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace d2c::app
