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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "d2c_app/commands.hpp"
#include "oracles.hpp"

namespace d2c::app {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Fresh scratch directory per test, removed afterwards.
class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("d2c_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  json load(const std::string& name) const {
    std::ifstream in(d2c::testing::config_path(name));
    return json::parse(in);
  }

  // Small, fast variant of the double-integrator experiment.
  json linear_config() const {
    json j = load("linear.json");
    j["noise"]["n_samples"] = 64;
    j["noise"]["compare_open_loop"] = false;
    return j;
  }

  std::string write(const json& j, const std::string& name = "config.json") const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p.string();
  }

  std::string out(const std::string& sub) const { return (dir_ / sub).string(); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "d2c");
  return run_cli(args);
}

TEST_F(CliTest, MissingCostWeightIsNamed) {
  json j = linear_config();
  j["cost"].erase("R");
  const std::string cfg = write(j);
  ::testing::internal::CaptureStderr();
  const int rc = run({"train", "--config", cfg, "--out", out("o")});
  const std::string err = ::testing::internal::GetCapturedStderr();
  EXPECT_EQ(rc, kUsageError);
  EXPECT_NE(err.find("missing required field 'cost.R'"), std::string::npos) << err;
}

TEST_F(CliTest, UnknownFieldIsRejected) {
  json j = linear_config();
  j["ilqr"]["max_iter"] = 10;
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(run({"train", "--config", write(j), "--out", out("o")}), kUsageError);
  EXPECT_NE(::testing::internal::GetCapturedStderr().find("unknown field 'ilqr.max_iter'"),
            std::string::npos);
}

TEST_F(CliTest, UsageErrorsExitWithOne) {
  ::testing::internal::CaptureStderr();
  ::testing::internal::CaptureStdout();
  EXPECT_EQ(run({}), kUsageError);
  EXPECT_EQ(run({"fly"}), kUsageError);
  EXPECT_EQ(run({"train"}), kUsageError);
  EXPECT_EQ(run({"train", "--config", out("absent.json")}), kUsageError);
  EXPECT_EQ(run({"train", "--config", write(linear_config()), "--workers", "0"}), kUsageError);
  EXPECT_EQ(run({"train", "--config", write(linear_config()), "--feedback-mode", "pid"}),
            kUsageError);
  ::testing::internal::GetCapturedStdout();
  ::testing::internal::GetCapturedStderr();
}

TEST_F(CliTest, EvalBeforeTrainIsAUsageError) {
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(run({"eval", "--config", write(linear_config()), "--out", out("empty")}), kUsageError);
  EXPECT_NE(::testing::internal::GetCapturedStderr().find("run train first"), std::string::npos);
}

TEST_F(CliTest, NonConvergedTrainExitsWithTwoButWritesArtifacts) {
  json j = load("pendulum.json");
  j["ilqr"]["max_iters"] = 1;
  ::testing::internal::CaptureStdout();
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(run({"train", "--config", write(j), "--out", out("o")}), kNumericalFailure);
  ::testing::internal::GetCapturedStdout();
  ::testing::internal::GetCapturedStderr();
  EXPECT_TRUE(fs::exists(dir_ / "o" / "nominal.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "o" / "gains.json"));
  const json rep = json::parse(slurp(dir_ / "o" / "report.json"));
  EXPECT_FALSE(rep["converged"].get<bool>());
}

TEST_F(CliTest, TrainEvalRoundTrip) {
  const std::string cfg = write(linear_config());
  ::testing::internal::CaptureStdout();
  ASSERT_EQ(run({"train", "--config", cfg, "--out", out("run")}), kOk);
  ASSERT_EQ(run({"eval", "--config", cfg, "--out", out("run")}), kOk);
  ::testing::internal::GetCapturedStdout();
  for (const char* f : {"nominal.csv", "gains.json", "convergence.csv", "report.json",
                        "timing.json", "sweep.csv"})
    EXPECT_TRUE(fs::exists(dir_ / "run" / f)) << f;

  const json rep = json::parse(slurp(dir_ / "run" / "report.json"));
  EXPECT_TRUE(rep["converged"].get<bool>());
  const json gains = json::parse(slurp(dir_ / "run" / "gains.json"));
  EXPECT_EQ(gains["horizon"].get<int>(), 40);
  EXPECT_EQ(gains["mode"].get<std::string>(), "ilqr");

  // The noiseless row reproduces the trained nominal's terminal error.
  std::ifstream in(dir_ / "run" / "sweep.csv");
  std::string line;
  while (std::getline(in, line) && (line.empty() || line[0] == '#')) {
  }
  ASSERT_EQ(line.rfind("epsilon,", 0), 0u);
  ASSERT_TRUE(std::getline(in, line));
  std::vector<std::string> cells;
  std::stringstream ss(line);
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  ASSERT_GE(cells.size(), 5u);
  EXPECT_EQ(std::stod(cells[0]), 0.0);
  const double train_err = rep["terminal_error"].get<double>();
  EXPECT_NEAR(std::stod(cells[4]), train_err, 1e-12 * std::max(1.0, train_err));
}

TEST_F(CliTest, OutputsDoNotDependOnWorkerCount) {
  const std::string cfg = write(linear_config());
  ::testing::internal::CaptureStdout();
  ASSERT_EQ(run({"train", "--config", cfg, "--out", out("a"), "--workers", "1"}), kOk);
  ASSERT_EQ(run({"train", "--config", cfg, "--out", out("b"), "--workers", "4"}), kOk);
  ASSERT_EQ(run({"eval", "--config", cfg, "--out", out("a"), "--workers", "1"}), kOk);
  ASSERT_EQ(run({"eval", "--config", cfg, "--out", out("b"), "--workers", "4"}), kOk);
  ::testing::internal::GetCapturedStdout();
  for (const char* f : {"nominal.csv", "gains.json", "sweep.csv"})
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
}

TEST_F(CliTest, SeedOverrideChangesNoiseOnly) {
  const std::string cfg = write(linear_config());
  ::testing::internal::CaptureStdout();
  ASSERT_EQ(run({"train", "--config", cfg, "--out", out("a")}), kOk);
  ASSERT_EQ(run({"train", "--config", cfg, "--out", out("b"), "--seed", "99"}), kOk);
  ASSERT_EQ(run({"eval", "--config", cfg, "--out", out("a")}), kOk);
  ASSERT_EQ(run({"eval", "--config", cfg, "--out", out("b"), "--seed", "99"}), kOk);
  ::testing::internal::GetCapturedStdout();
  EXPECT_NE(slurp(dir_ / "a" / "sweep.csv"), slurp(dir_ / "b" / "sweep.csv"));
  EXPECT_NE(slurp(dir_ / "b" / "sweep.csv").find("# seed: 99"), std::string::npos);
}

TEST_F(CliTest, FeedbackModeOverride) {
  const std::string cfg = write(linear_config());
  ::testing::internal::CaptureStdout();
  ASSERT_EQ(run({"train", "--config", cfg, "--out", out("s"), "--feedback-mode", "surrogate_lqr"}),
            kOk);
  ::testing::internal::GetCapturedStdout();
  const json gains = json::parse(slurp(dir_ / "s" / "gains.json"));
  EXPECT_EQ(gains["mode"].get<std::string>(), "surrogate_lqr");
}

TEST_F(CliTest, CheckBatteryPasses) {
  ::testing::internal::CaptureStdout();
  EXPECT_EQ(run({"check"}), kOk);
  const std::string text = ::testing::internal::GetCapturedStdout();
  EXPECT_EQ(text.find("FAIL"), std::string::npos) << text;
}

TEST(Configs, ShippedConfigsParse) {
  for (const char* name : {"pendulum.json", "cartpole.json", "linear.json", "allen_cahn_8x8.json",
                           "allen_cahn_20x20.json"}) {
    SCOPED_TRACE(name);
    const ExperimentConfig cfg = load_config(d2c::testing::config_path(name));
    const Problem p = build_problem(cfg);
    EXPECT_EQ(static_cast<int>(p.u_init.size()), cfg.horizon);
    EXPECT_EQ(p.x0.size(), p.env.n_x());
  }
}

TEST(Configs, MatrixForms) {
  EXPECT_TRUE(matrix_from_json(2.0, 2, "Q").isApprox(2.0 * Matrix::Identity(2, 2)));
  EXPECT_TRUE(matrix_from_json(json::array({1.0, 3.0}), 2, "Q")
                  .isApprox(Vector(Vector::LinSpaced(2, 1.0, 3.0)).asDiagonal().toDenseMatrix()));
  const Matrix dense = matrix_from_json(json::array({json::array({1, 2}), json::array({2, 5})}), 2, "Q");
  EXPECT_EQ(dense(0, 1), 2.0);
  EXPECT_THROW(matrix_from_json(json::array({1.0}), 2, "Q"), ConfigError);
  EXPECT_THROW(matrix_from_json("big", 2, "Q"), ConfigError);
}

}  // namespace
}  // namespace d2c::app
