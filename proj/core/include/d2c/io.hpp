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

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "d2c/closed_loop.hpp"
#include "d2c/ilqr.hpp"
#include "d2c/scaling.hpp"
#include "d2c/trajectory.hpp"

namespace d2c {

// Shortest round-trip decimal form; "nan", "inf" and "-inf" for
// non-finite values.
std::string format_double(double v);

// Ordered key/value pairs written at the top of every output file.
struct Metadata {
  std::vector<std::pair<std::string, std::string>> fields;

  Metadata& add(std::string key, std::string value);
  Metadata& add(std::string key, double value);
  Metadata& add(std::string key, std::uint64_t value);
};

// "# key: value" lines.
void write_metadata_comment(std::ostream& os, const Metadata& meta);

// Columns t, x0..x{n_x-1}, u0..u{n_u-1}; the final row has empty controls.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const Metadata& meta);
// Reads back what write_trajectory_csv produced. The result is flagged
// inconsistent; callers re-simulate if they need consistency.
Trajectory read_trajectory_csv(std::istream& is);

// iteration, cost, env_evals, alpha_used, mu
void write_convergence_csv(std::ostream& os, const IlqrReport& report, const Metadata& meta);

// epsilon, n_samples, mean_cost, var_cost, mean_term_err, std_term_err,
// success_rate, divergence_rate, replan_mean
void write_sweep_csv(std::ostream& os, const std::vector<RolloutStats>& rows, const Metadata& meta);

// epsilon, quantity, stderr, included_in_fit
void write_study_csv(std::ostream& os, const ScalingStudy& study, const Metadata& meta);

}  // namespace d2c
