// Copyright 2026 The smcdiv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "smcdiv/cli/commands.hpp"
#include "smcdiv/cli/config.hpp"

namespace smcdiv::cli {
namespace {

namespace fs = std::filesystem;

const std::string kSourceDir = SMCDIV_SOURCE_DIR;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("smcdiv_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv(kOutputDirEnv);
  }
  void TearDown() override {
    unsetenv(kOutputDirEnv);
    fs::remove_all(dir_);
  }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  std::string linreg_config(const std::string& extra = "") {
    return "name: lr\nmodel: linreg\ndata: " + kSourceDir +
           "/data/linreg.txt\nparticles: [1, 4]\nrejuvenation: [1]\nn_reference: 200\n"
           "n_forward: 200\nseed: 9\noutput: " +
           (dir_ / "out").string() + "\n" + extra;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

TEST_F(CliTest, ConfigErrorsCarryLineNumbers) {
  try {
    parse_config("name: x\nmodel: linreg\nbogus: 1\n", "cfg.yaml", ".");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("cfg.yaml:3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config("model: nonsense\n", "c", "."), ConfigError);
  EXPECT_THROW(parse_config("model: [unclosed\n", "c", "."), ConfigError);
  EXPECT_THROW(parse_config("model: grid\nrejuvenation: [2]\n", "c", "."), ConfigError);
  EXPECT_THROW(parse_config("model: grid\nreference: approximate-mcmc\n", "c", "."), ConfigError);
}

TEST_F(CliTest, DefaultsAreFilled) {
  const ExperimentConfig cfg = parse_config("model: grid\n", "c", ".");
  EXPECT_EQ(cfg.particles, (std::vector<std::size_t>{1}));
  EXPECT_EQ(cfg.rejuvenation, (std::vector<std::size_t>{0}));
  EXPECT_EQ(cfg.reference, ReferenceMode::kExact);
  EXPECT_FALSE(cfg.record_wall_time);
}

TEST_F(CliTest, RelativeDataResolvesAgainstConfigDirectory) {
  const ExperimentConfig cfg = load_config(kSourceDir + "/configs/linreg.yaml");
  EXPECT_EQ(cfg.rows.size(), 10u);
}

TEST_F(CliTest, EstimateIsDeterministic) {
  const std::string path = write("lr.yaml", linreg_config());
  std::ostringstream a;
  std::ostringstream b;
  std::ostringstream err;
  ASSERT_EQ(cmd_estimate(path, {}, a, err), kExitOk) << err.str();
  const std::string first = slurp(dir_ / "out" / "lr.csv");
  ASSERT_EQ(cmd_estimate(path, {}, b, err), kExitOk) << err.str();
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(first, slurp(dir_ / "out" / "lr.csv"));
  EXPECT_EQ(first.rfind(csv_header(), 0), 0u);
}

TEST_F(CliTest, SeedOverrideChangesResults) {
  const std::string path = write("lr.yaml", linreg_config());
  std::ostringstream a;
  std::ostringstream b;
  std::ostringstream err;
  CommandOptions opts;
  ASSERT_EQ(cmd_estimate(path, opts, a, err), kExitOk);
  opts.seed = 10;
  ASSERT_EQ(cmd_estimate(path, opts, b, err), kExitOk);
  EXPECT_NE(a.str(), b.str());
}

TEST_F(CliTest, ThreadCountDoesNotChangeResults) {
  const std::string path = write("lr.yaml", linreg_config());
  std::ostringstream a;
  std::ostringstream b;
  std::ostringstream err;
  CommandOptions opts;
  ASSERT_EQ(cmd_estimate(path, opts, a, err), kExitOk);
  opts.threads = 3;
  ASSERT_EQ(cmd_estimate(path, opts, b, err), kExitOk);
  EXPECT_EQ(a.str(), b.str());
}

TEST_F(CliTest, BadConfigExitsTwo) {
  const std::string path = write("bad.yaml", "name: x\nmodel: linreg\nn_forward: 0\n");
  std::ostringstream out;
  std::ostringstream err;
  EXPECT_EQ(cmd_estimate(path, {}, out, err), kExitConfigError);
  EXPECT_NE(err.str().find("bad.yaml:3"), std::string::npos) << err.str();
  EXPECT_EQ(cmd_estimate((dir_ / "missing.yaml").string(), {}, out, err), kExitConfigError);
}

TEST_F(CliTest, NumericalFailureExitsThree) {
  std::ofstream(dir_ / "huge.txt") << "0 1e200\n1 -1e200\n";
  const std::string path = write(
      "huge.yaml", "name: huge\nmodel: linreg\ndata: huge.txt\nn_reference: 10\nn_forward: 10\n"
                   "output: " + (dir_ / "out").string() + "\n");
  std::ostringstream out;
  std::ostringstream err;
  EXPECT_EQ(cmd_estimate(path, {}, out, err), kExitRuntimeError) << err.str();
  EXPECT_FALSE(err.str().empty());
}

TEST_F(CliTest, SweepWritesEveryCell) {
  const std::string sweep = write(
      "sweep.yaml", "name: sweep\nmodel: linreg\ndata: " + kSourceDir +
                        "/data/linreg.txt\nparticles: [1, 2, 4]\nrejuvenation: [0, 1, 2]\n"
                        "n_reference: 300\nn_forward: 300\nseed: 4\ndump_samples: true\n"
                        "output: " + (dir_ / "out").string() + "\n");
  std::ostringstream out;
  std::ostringstream err;
  ASSERT_EQ(cmd_sweep(sweep, {}, out, err), kExitOk) << err.str();
  std::ifstream csv(dir_ / "out" / "sweep.csv");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    if (!line.empty() && line[0] != '#' && line.rfind("model,", 0) != 0) {
      ++rows;
    }
  }
  EXPECT_EQ(rows, 9u);
  std::ifstream jsonl(dir_ / "out" / "sweep.jsonl");
  std::size_t records = 0;
  while (std::getline(jsonl, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("schema_version").get<int>(), kSchemaVersion);
    EXPECT_EQ(j.at("reference_mode").get<std::string>(), "exact");
    EXPECT_EQ(j.at("forward_log_ratios").size(), 300u);
    EXPECT_EQ(j.at("reference_log_ratios").size(), 300u);
    const double se = std::hypot(j.at("elbo_stderr").get<double>(), j.at("eubo_stderr").get<double>());
    EXPECT_LE(j.at("elbo").get<double>(), j.at("eubo").get<double>() + 3.0 * se);
    ++records;
  }
  EXPECT_EQ(records, 9u);
}

TEST_F(CliTest, ApproximateReferenceIsLabelled) {
  const std::string path = write(
      "dpm.yaml", "name: dpm\nmodel: dpm\ndata: " + kSourceDir +
                      "/data/dpm.txt\nparticles: [2]\nrejuvenation: [1]\nn_reference: 50\n"
                      "n_forward: 50\nreference:\n  mode: approximate-mcmc\n  burn_in: 50\n"
                      "  thin: 2\noutput: " + (dir_ / "out").string() + "\n");
  std::ostringstream out;
  std::ostringstream err;
  ASSERT_EQ(cmd_sweep(path, {}, out, err), kExitOk) << err.str();
  std::ifstream jsonl(dir_ / "out" / "dpm.jsonl");
  std::string line;
  ASSERT_TRUE(std::getline(jsonl, line));
  const auto j = nlohmann::json::parse(line);
  EXPECT_EQ(j.at("reference_mode").get<std::string>(), "approximate");
  EXPECT_TRUE(j.at("subjective").get<bool>());
  EXPECT_NE(out.str().find(",approximate"), std::string::npos);
}

TEST_F(CliTest, OutputDirectoryPrecedence) {
  const ExperimentConfig cfg = parse_config("model: grid\noutput: from_config\n", "c", "/base");
  CommandOptions opts;
  EXPECT_EQ(fs::path(resolve_output_dir(cfg, opts)).filename(), "from_config");
  setenv(kOutputDirEnv, "/from_env", 1);
  EXPECT_EQ(resolve_output_dir(cfg, opts), "/from_env");
  opts.out_dir = "/from_flag";
  EXPECT_EQ(resolve_output_dir(cfg, opts), "/from_flag");
}

TEST_F(CliTest, EnvironmentDirectoryReceivesOutput) {
  const std::string path = write("lr.yaml", linreg_config());
  setenv(kOutputDirEnv, (dir_ / "env").string().c_str(), 1);
  std::ostringstream out;
  std::ostringstream err;
  ASSERT_EQ(cmd_estimate(path, {}, out, err), kExitOk) << err.str();
  EXPECT_TRUE(fs::exists(dir_ / "env" / "lr.csv"));
  EXPECT_FALSE(fs::exists(dir_ / "out" / "lr.csv"));
}

TEST_F(CliTest, ValidateExitCodes) {
  std::ostringstream out;
  std::ostringstream err;
  EXPECT_EQ(cmd_validate(false, 0.02, {}, out, err), kExitOk) << out.str() << err.str();
  EXPECT_NE(out.str().find("checks passed"), std::string::npos);
  std::ostringstream neg;
  EXPECT_EQ(cmd_validate(true, 0.02, {}, neg, err), kExitValidationFailure);
  EXPECT_NE(neg.str().find("FAIL balance:negative-control"), std::string::npos) << neg.str();
}

TEST_F(CliTest, CsvHeaderNamesColumns) {
  EXPECT_EQ(csv_header(),
            "# smcdiv results v1\nmodel,N,rejuvenation,elbo,elbo_stderr,eubo,eubo_stderr,"
            "kl_bound,wall_time_s,seed,reference_mode\n");
}

}  // namespace
}  // namespace smcdiv::cli
