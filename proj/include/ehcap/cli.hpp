// Copyright 2026 The ehcap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "ehcap/dist.hpp"
#include "ehcap/policies.hpp"

namespace ehcap::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;

struct ExperimentConfig {
  std::string command;  // simulate, bounds, smith, eta-verify, mdp, sweep, gap-certify
  std::string dist_path;
  double battery_cap = 0.0;
  std::string policy;  // JSON text, a JSON file, or kind[:a[,b]]
  std::size_t n = 100000;
  std::size_t trials = 32;
  std::uint64_t seed = 1;
  std::string output_path;  // empty: stdout
  std::string format = "json";
  std::optional<double> b0;  // defaults to the battery cap

  std::string trajectory_path;  // simulate
  double S = 0.0;               // smith
  double tol = 1e-6;            // smith KKT slack / mdp span
  int levels = 256;             // mdp
  std::string policy_table_path;
  int region2_points = 1500;    // eta-verify, gap-certify
  std::string curve_path = "eta_curve.csv";
  std::string sweep_param = "q";
  double sweep_from = 0.01;
  double sweep_to = 0.99;
  int sweep_steps = 99;
};

/// Turns a policy spec into a Policy. Shorthands: greedy, constant:L,
/// fixed_fraction:q, bernoulli_exp:p, generalized_bernoulli[:q],
/// binary_quantization[:x,q']. Missing parameters are taken from `dist`.
Policy parse_policy(const std::string& spec, const ClippedDistribution& dist);

/// Rounds to 12 significant digits.
double round12(double x);

/// Runs one command. Data goes to `out` (or the output file), diagnostics to `err`.
int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// argv front end.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace ehcap::cli
