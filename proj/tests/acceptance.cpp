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

// Full-size acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "smcdiv/cli/commands.hpp"
#include "smcdiv/validation.hpp"

namespace {

using smcdiv::CheckResult;
using smcdiv::RngStream;
namespace fs = std::filesystem;

struct Outcome {
  bool passed;
  std::string detail;
};

Outcome from_check(const CheckResult& r) { return {r.passed, smcdiv::format_check(r)}; }

Outcome kernels() {
  bool ok = true;
  std::string detail;
  for (const CheckResult& r : smcdiv::check_kernels(true)) {
    const bool expected_fail = r.name == "balance:negative-control";
    ok = ok && (r.passed != expected_fail);
    detail += (detail.empty() ? "" : "; ") + r.name + (r.passed ? " pass" : " fail");
  }
  return {ok, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "smcdiv_acceptance";
  fs::remove_all(root);
  const std::string config = std::string(SMCDIV_SOURCE_DIR) + "/configs/linreg.yaml";
  std::string files[2];
  std::string echoed[2];
  for (int i = 0; i < 2; ++i) {
    smcdiv::cli::CommandOptions opts;
    opts.out_dir = (root / std::to_string(i)).string();
    std::ostringstream out;
    std::ostringstream err;
    if (smcdiv::cli::cmd_estimate(config, opts, out, err) != smcdiv::cli::kExitOk) {
      return {false, "estimate failed: " + err.str()};
    }
    files[i] = slurp(root / std::to_string(i) / "linreg.csv");
    echoed[i] = out.str();
  }
  fs::remove_all(root);
  const bool same = !files[0].empty() && files[0] == files[1] && echoed[0] == echoed[1];
  return {same, fmt::format("{} bytes, {}", files[0].size(), same ? "identical" : "differ")};
}

}  // namespace

int main() {
  const RngStream root(20161);
  struct Criterion {
    int id;
    const char* name;
    double time_limit_s;  // 0 = none
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "joint-identity", 10,
       [&] { return from_check(smcdiv::check_joint_identity(1000, root.split(1))); }},
      {2, "evidence-unbiased", 30,
       [&] { return from_check(smcdiv::check_evidence_unbiased(100000, root.split(2))); }},
      {3, "linreg-sandwich", 60,
       [&] { return from_check(smcdiv::check_linreg_sandwich(10000, root.split(3))); }},
      {4, "bound-dominance", 300,
       [&] { return from_check(smcdiv::check_bound_dominance(100000, root.split(4))); }},
      {5, "particle-trend", 0,
       [&] { return from_check(smcdiv::check_particle_trend(10000, root.split(5))); }},
      {6, "seqobs-weights", 0,
       [&] { return from_check(smcdiv::check_seqobs_weights(1000, root.split(6))); }},
      {7, "plateau-coupling", 0,
       [&] { return from_check(smcdiv::check_plateau_coupling(1000, root.split(7))); }},
      {8, "detailed-balance", 0, kernels},
      {9, "tractable-exactness", 0,
       [&] { return from_check(smcdiv::check_tractable_exactness(100000, root.split(9))); }},
      {10, "determinism", 0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.time_limit_s == 0 || secs < c.time_limit_s;
    const bool ok = o.passed && in_time;
    failures += ok ? 0 : 1;
    fmt::print("{} criterion {:2} {} [{:.2f}s{}] {}\n", ok ? "PASS" : "FAIL", c.id, c.name, secs,
               in_time ? "" : fmt::format(" > {:.0f}s limit", c.time_limit_s), o.detail);
    std::fflush(stdout);
  }
  fmt::print("{}/{} criteria passed\n", criteria.size() - static_cast<std::size_t>(failures),
             criteria.size());
  return failures == 0 ? 0 : 1;
}
