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

#include <optional>
#include <string>
#include <vector>

#include "d2c_app/config.hpp"

namespace d2c::app {

enum ExitCode : int { kOk = 0, kUsageError = 1, kNumericalFailure = 2 };

struct RunOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::optional<std::string> feedback_mode;
};

int cmd_train(const RunOptions& opts);
int cmd_eval(const RunOptions& opts);
int cmd_scaling(const RunOptions& opts);
// config_path may be empty: the battery uses built-in problems.
int cmd_check(const RunOptions& opts);

// Full command line entry point (argv[0] is the program name).
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace d2c::app
