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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <d2c/d2c.hpp>

namespace d2c::app {

// Malformed or incomplete experiment configuration.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct NoiseConfig {
  NoiseMode mode = NoiseMode::kControlChannel;
  std::vector<double> epsilons{0.0};
  int n_samples = 200;
  // Scale control-channel noise by max |u_t| of the nominal per channel
  // instead of the environment's u_max.
  bool u_max_from_nominal = true;
  // Also evaluate the same nominal with K = 0.
  bool compare_open_loop = false;
};

struct ReplanConfig {
  bool enabled = false;
  double trigger_threshold = 1.0;
  int max_replans = 10;
  std::optional<Vector> weights;
};

struct ScalingConfig {
  std::vector<double> epsilons_mean{0.01, 0.02, 0.04, 0.08};
  std::vector<double> epsilons_std{0.01, 0.02, 0.04, 0.08};
  std::vector<double> epsilons_truncation{0.05, 0.1, 0.2, 0.4};
  int n_samples = 2000;
  int n_samples_truncation = 5000;
  // Synthetic quadratic policy term M_t[j] = quadratic_gain * I.
  double quadratic_gain = 0.5;
  int bootstrap = 1000;
  // The truncation study needs a tightly stationary nominal.
  double conv_eps = 1e-12;
  int max_iters = 500;
};

struct ExperimentConfig {
  std::string path;
  std::string name;
  std::uint64_t seed = 0;
  std::string output;

  std::string env_name;
  EnvParams env_params;
  int horizon = 0;
  std::optional<Vector> x0;
  std::optional<Vector> x_goal;
  nlohmann::json Q, R, Q_T;  // scalar, diagonal list or dense rows

  IlqrSettings ilqr;
  FeedbackSettings feedback;
  nlohmann::json Q_s, R_s, Q_sT;  // null when absent
  NoiseConfig noise;
  ReplanConfig replan;
  ScalingConfig scaling;

  // FNV-1a of the canonical (sorted-key) dump of the parsed document.
  std::string digest;
};

// Validates and parses; errors name the offending field.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::string& path = "<memory>");
ExperimentConfig load_config(const std::string& path);

// Everything needed to run: environment, cost and initial guess.
struct Problem {
  Environment env;
  CostModel cost;
  Vector x0;
  VectorSeq u_init;
};

Problem build_problem(const ExperimentConfig& cfg);

// Scalar -> s I, list -> diag, list of lists -> dense. `field` names the key
// in error messages.
Matrix matrix_from_json(const nlohmann::json& j, int n, const std::string& field);

}  // namespace d2c::app
