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

#include "d2c/io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace d2c {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Metadata& Metadata::add(std::string key, std::string value) {
  fields.emplace_back(std::move(key), std::move(value));
  return *this;
}

Metadata& Metadata::add(std::string key, double value) {
  return add(std::move(key), format_double(value));
}

Metadata& Metadata::add(std::string key, std::uint64_t value) {
  return add(std::move(key), std::to_string(value));
}

void write_metadata_comment(std::ostream& os, const Metadata& meta) {
  for (const auto& [k, v] : meta.fields) os << "# " << k << ": " << v << '\n';
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const Metadata& meta) {
  write_metadata_comment(os, meta);
  const Eigen::Index n_x = traj.states.front().size();
  const Eigen::Index n_u = traj.controls.empty() ? 0 : traj.controls.front().size();
  os << 't';
  for (Eigen::Index i = 0; i < n_x; ++i) os << ",x" << i;
  for (Eigen::Index j = 0; j < n_u; ++j) os << ",u" << j;
  os << '\n';
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    os << t;
    for (Eigen::Index i = 0; i < n_x; ++i) os << ',' << format_double(traj.states[t][i]);
    for (Eigen::Index j = 0; j < n_u; ++j) {
      os << ',';
      if (t < traj.controls.size()) os << format_double(traj.controls[t][j]);
    }
    os << '\n';
  }
}

namespace {

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidArgument("csv: cannot parse number '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Trajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    header = split(line);
    break;
  }
  if (header.empty() || header[0] != "t") throw InvalidArgument("trajectory csv: missing header");
  int n_x = 0, n_u = 0;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c][0] == 'x') ++n_x;
    else if (header[c][0] == 'u') ++n_u;
  }
  Trajectory traj;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line);
    if (static_cast<int>(cells.size()) != 1 + n_x + n_u)
      throw InvalidArgument("trajectory csv: wrong column count in '" + line + "'");
    Vector x(n_x);
    for (int i = 0; i < n_x; ++i) x[i] = parse_double(cells[1 + i]);
    traj.states.push_back(std::move(x));
    if (!cells[1 + n_x].empty()) {
      Vector u(n_u);
      for (int j = 0; j < n_u; ++j) u[j] = parse_double(cells[1 + n_x + j]);
      traj.controls.push_back(std::move(u));
    }
  }
  if (traj.states.size() != traj.controls.size() + 1 || traj.controls.empty())
    throw InvalidArgument("trajectory csv: expected N+1 states and N controls");
  traj.consistent = false;
  return traj;
}

void write_convergence_csv(std::ostream& os, const IlqrReport& report, const Metadata& meta) {
  write_metadata_comment(os, meta);
  os << "iteration,cost,env_evals,alpha_used,mu\n";
  for (const auto& r : report.history)
    os << r.iteration << ',' << format_double(r.cost) << ',' << r.env_evals << ','
       << format_double(r.alpha) << ',' << format_double(r.mu) << '\n';
}

void write_sweep_csv(std::ostream& os, const std::vector<RolloutStats>& rows, const Metadata& meta) {
  write_metadata_comment(os, meta);
  os << "epsilon,n_samples,mean_cost,var_cost,mean_term_err,std_term_err,success_rate,"
        "divergence_rate,replan_mean\n";
  for (const auto& s : rows)
    os << format_double(s.epsilon) << ',' << s.n_samples << ',' << format_double(s.mean_cost) << ','
       << format_double(s.var_cost) << ',' << format_double(s.mean_terminal_error) << ','
       << format_double(s.std_terminal_error) << ',' << format_double(s.success_rate) << ','
       << format_double(s.divergence_rate) << ','
       << (std::isnan(s.replan_mean) ? std::string() : format_double(s.replan_mean)) << '\n';
}

void write_study_csv(std::ostream& os, const ScalingStudy& study, const Metadata& meta) {
  write_metadata_comment(os, meta);
  os << "epsilon,quantity,stderr,included_in_fit\n";
  for (const auto& p : study.points)
    os << format_double(p.epsilon) << ',' << format_double(p.quantity) << ','
       << format_double(p.stderr_) << ',' << (p.included ? 1 : 0) << '\n';
}

}  // namespace d2c
