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

#include "d2c_app/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace d2c::app {

using nlohmann::json;

namespace {

// Typed access to one JSON object that remembers which keys were read, so
// unknown (usually misspelt) keys can be rejected afterwards.
class Fields {
 public:
  Fields(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError("config: '" + label() + "' must be an object");
  }

  std::string name(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& require(const std::string& key) {
    if (!has(key)) throw ConfigError("config: missing required field '" + name(key) + "'");
    return j_.at(key);
  }

  const json& raw(const std::string& key) {
    static const json null_value;
    return has(key) ? j_.at(key) : null_value;
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError("config: '" + name(key) + "' must be a number");
    return v.get<double>();
  }

  double positive(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v > 0.0)) throw ConfigError("config: '" + name(key) + "' must be positive");
    return v;
  }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError("config: '" + name(key) + "' must be an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError("config: '" + name(key) + "' must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError("config: '" + name(key) + "' must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError("config: '" + name(key) + "' must be a list of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError("config: '" + name(key) + "' must be a list of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::optional<Vector> vector(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const auto v = numbers(key, {});
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  Fields sub(const std::string& key) {
    static const json empty = json::object();
    return has(key) ? Fields(j_.at(key), name(key)) : Fields(empty, name(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw ConfigError("config: unknown field '" + name(it.key()) + "'");
  }

 private:
  std::string label() const { return prefix_.empty() ? "<root>" : prefix_; }

  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

void check_ascending(const std::vector<double>& v, const std::string& field, bool strictly_positive) {
  if (v.empty()) throw ConfigError("config: '" + field + "' must not be empty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (strictly_positive ? !(v[i] > 0.0) : !(v[i] >= 0.0))
      throw ConfigError("config: '" + field + "' entries must be " +
                        (strictly_positive ? "positive" : "non-negative"));
    if (i > 0 && !(v[i] > v[i - 1]))
      throw ConfigError("config: '" + field + "' must be strictly increasing");
  }
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

}  // namespace

Matrix matrix_from_json(const json& j, int n, const std::string& field) {
  if (j.is_number()) return j.get<double>() * Matrix::Identity(n, n);
  if (!j.is_array()) throw ConfigError("config: '" + field + "' must be a number, list or matrix");
  if (!j.empty() && j.front().is_array()) {
    if (static_cast<int>(j.size()) != n)
      throw ConfigError("config: '" + field + "' needs " + std::to_string(n) + " rows");
    Matrix m(n, n);
    for (int r = 0; r < n; ++r) {
      if (!j[r].is_array() || static_cast<int>(j[r].size()) != n)
        throw ConfigError("config: '" + field + "' row " + std::to_string(r) + " needs " +
                          std::to_string(n) + " numbers");
      for (int c = 0; c < n; ++c) {
        if (!j[r][c].is_number()) throw ConfigError("config: '" + field + "' has a non-number");
        m(r, c) = j[r][c].get<double>();
      }
    }
    return m;
  }
  if (static_cast<int>(j.size()) != n)
    throw ConfigError("config: '" + field + "' diagonal needs " + std::to_string(n) + " entries, got " +
                      std::to_string(j.size()));
  Vector d(n);
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_number()) throw ConfigError("config: '" + field + "' has a non-number");
    d[i] = j[i].get<double>();
  }
  return d.asDiagonal();
}

ExperimentConfig parse_config(const json& doc, const std::string& path) {
  ExperimentConfig cfg;
  cfg.path = path;
  Fields root(doc, "");
  cfg.name = root.string("name", "");
  if (root.has("seed")) {
    const json& s = doc.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
      throw ConfigError("config: 'seed' must be a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  cfg.output = root.string("output", "");
  cfg.horizon = root.require("horizon").is_number_integer() ? doc.at("horizon").get<int>() : 0;
  if (cfg.horizon < 1) throw ConfigError("config: 'horizon' must be a positive integer");
  cfg.x0 = root.vector("x0");

  {
    Fields env = root.sub("env");
    const json& name = env.require("name");
    if (!name.is_string()) throw ConfigError("config: 'env.name' must be a string");
    cfg.env_name = name.get<std::string>();
    if (env.has("params")) {
      Fields params(doc.at("env").at("params"), "env.params");
      for (const auto& [k, v] : doc.at("env").at("params").items()) {
        if (v.is_number()) {
          cfg.env_params.scalars[k] = params.number(k, 0.0);
        } else if (v.is_array()) {
          std::vector<double> flat;
          for (const auto& e : v) {
            if (e.is_array()) {
              for (const auto& x : e) {
                if (!x.is_number()) throw ConfigError("config: 'env.params." + k + "' has a non-number");
                flat.push_back(x.get<double>());
              }
            } else if (e.is_number()) {
              flat.push_back(e.get<double>());
            } else {
              throw ConfigError("config: 'env.params." + k + "' has a non-number");
            }
          }
          params.has(k);
          cfg.env_params.arrays[k] = std::move(flat);
        } else {
          throw ConfigError("config: 'env.params." + k + "' must be a number or list");
        }
      }
      params.finish();
    }
    env.finish();
  }

  {
    Fields cost = root.sub("cost");
    if (!root.has("cost")) throw ConfigError("config: missing required field 'cost'");
    cfg.Q = cost.require("Q");
    cfg.R = cost.require("R");
    cfg.Q_T = cost.require("Q_T");
    cfg.x_goal = cost.vector("x_goal");
    cost.finish();
  }

  {
    Fields il = root.sub("ilqr");
    IlqrSettings& s = cfg.ilqr;
    s.alpha0 = il.positive("alpha0", s.alpha0);
    s.alpha_decay = il.positive("alpha_decay", s.alpha_decay);
    s.alpha_min = il.positive("alpha_min", s.alpha_min);
    s.mu0 = il.number("mu0", s.mu0);
    s.mu_grow = il.positive("mu_grow", s.mu_grow);
    s.mu_shrink = il.positive("mu_shrink", s.mu_shrink);
    s.mu_min = il.number("mu_min", s.mu_min);
    s.mu_max = il.positive("mu_max", s.mu_max);
    s.conv_eps = il.positive("conv_eps", s.conv_eps);
    s.max_iters = il.integer("max_iters", s.max_iters);
    s.max_backtracks = il.integer("max_backtracks", s.max_backtracks);
    s.armijo = il.boolean("armijo", s.armijo);
    s.armijo_c = il.positive("armijo_c", s.armijo_c);
    il.finish();
    try {
      s.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("config: ilqr block: ") + e.what());
    }
  }

  {
    Fields es = root.sub("estimation");
    LinearizationOptions& lo = cfg.ilqr.linearization;
    try {
      lo.method = parse_linearization_method(es.string("method", "lls_cd"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("config: 'estimation.method': ") + e.what());
    }
    lo.lls.sigma = es.positive("sigma", lo.lls.sigma);
    lo.lls.n_s = es.integer("n_s", 0);
    if (lo.lls.n_s < 0) throw ConfigError("config: 'estimation.n_s' must be non-negative");
    lo.lls.scale = es.vector("scale");
    es.finish();
  }

  {
    Fields fb = root.sub("feedback");
    try {
      cfg.feedback.mode = parse_gain_mode(fb.string("mode", "ilqr"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("config: 'feedback.mode': ") + e.what());
    }
    cfg.Q_s = fb.raw("Q_s");
    cfg.R_s = fb.raw("R_s");
    cfg.Q_sT = fb.raw("Q_sT");
    cfg.feedback.hessian.sigma = fb.positive("hessian_sigma", cfg.feedback.hessian.sigma);
    cfg.feedback.hessian.n_s = fb.integer("hessian_n_s", 0);
    cfg.feedback.hessian.max_monomials = fb.integer("hessian_max_monomials", 78);
    cfg.feedback.stationarity_tol = fb.positive("stationarity_tol", cfg.feedback.stationarity_tol);
    fb.finish();
  }

  {
    Fields nz = root.sub("noise");
    try {
      cfg.noise.mode = parse_noise_mode(nz.string("mode", "control_channel"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("config: 'noise.mode': ") + e.what());
    }
    cfg.noise.epsilons = nz.numbers("epsilons", cfg.noise.epsilons);
    check_ascending(cfg.noise.epsilons, "noise.epsilons", false);
    cfg.noise.n_samples = nz.integer("n_samples", cfg.noise.n_samples);
    if (cfg.noise.n_samples < 2) throw ConfigError("config: 'noise.n_samples' must be at least 2");
    cfg.noise.u_max_from_nominal = nz.boolean("u_max_from_nominal", cfg.noise.u_max_from_nominal);
    cfg.noise.compare_open_loop = nz.boolean("compare_open_loop", cfg.noise.compare_open_loop);
    nz.finish();
  }

  {
    Fields rp = root.sub("replan");
    cfg.replan.enabled = rp.boolean("enabled", false);
    cfg.replan.trigger_threshold = rp.positive("trigger_threshold", cfg.replan.trigger_threshold);
    cfg.replan.max_replans = rp.integer("max_replans", cfg.replan.max_replans);
    if (cfg.replan.max_replans < 0) throw ConfigError("config: 'replan.max_replans' must be non-negative");
    cfg.replan.weights = rp.vector("weights");
    rp.finish();
  }

  {
    Fields sc = root.sub("scaling");
    ScalingConfig& s = cfg.scaling;
    s.epsilons_mean = sc.numbers("epsilons_mean", s.epsilons_mean);
    s.epsilons_std = sc.numbers("epsilons_std", s.epsilons_std);
    s.epsilons_truncation = sc.numbers("epsilons_truncation", s.epsilons_truncation);
    for (const auto& [v, f] : {std::pair{&s.epsilons_mean, "scaling.epsilons_mean"},
                               std::pair{&s.epsilons_std, "scaling.epsilons_std"},
                               std::pair{&s.epsilons_truncation, "scaling.epsilons_truncation"}}) {
      check_ascending(*v, f, true);
      if (v->size() < 2) throw ConfigError(std::string("config: '") + f + "' needs at least 2 values");
    }
    s.n_samples = sc.integer("n_samples", s.n_samples);
    s.n_samples_truncation = sc.integer("n_samples_truncation", s.n_samples_truncation);
    if (s.n_samples < 2 || s.n_samples_truncation < 2)
      throw ConfigError("config: scaling sample counts must be at least 2");
    s.quadratic_gain = sc.number("quadratic_gain", s.quadratic_gain);
    s.bootstrap = sc.integer("bootstrap", s.bootstrap);
    s.conv_eps = sc.positive("conv_eps", s.conv_eps);
    s.max_iters = sc.integer("max_iters", s.max_iters);
    sc.finish();
  }
  root.finish();

  Fnv1a h;
  const std::string canonical = doc.dump();  // nlohmann::json keeps keys sorted
  h.update(canonical.data(), canonical.size());
  cfg.digest = hex64(h.value());
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc, path);
}

Problem build_problem(const ExperimentConfig& cfg) {
  Environment env = [&] {
    try {
      return make_environment(cfg.env_name, cfg.env_params);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("config: env: ") + e.what());
    }
  }();
  const int n_x = env.n_x();
  const int n_u = env.n_u();

  CostModel cost;
  cost.Q = matrix_from_json(cfg.Q, n_x, "cost.Q");
  cost.R = matrix_from_json(cfg.R, n_u, "cost.R");
  cost.Q_T = matrix_from_json(cfg.Q_T, n_x, "cost.Q_T");
  cost.x_goal = cfg.x_goal ? *cfg.x_goal : env.default_goal;
  cost.dt = env.dt();
  if (cost.x_goal.size() != n_x)
    throw ConfigError("config: 'cost.x_goal' needs " + std::to_string(n_x) + " entries");
  try {
    cost.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }

  Vector x0 = cfg.x0 ? *cfg.x0 : env.default_x0;
  if (x0.size() != n_x) throw ConfigError("config: 'x0' needs " + std::to_string(n_x) + " entries");
  if (cfg.ilqr.linearization.lls.scale && cfg.ilqr.linearization.lls.scale->size() != n_x + n_u)
    throw ConfigError("config: 'estimation.scale' needs n_x + n_u entries");
  if (cfg.replan.weights && cfg.replan.weights->size() != n_x)
    throw ConfigError("config: 'replan.weights' needs " + std::to_string(n_x) + " entries");

  Problem p{std::move(env), std::move(cost), std::move(x0),
            VectorSeq(static_cast<std::size_t>(cfg.horizon), Vector::Zero(n_u))};
  return p;
}

}  // namespace d2c::app
