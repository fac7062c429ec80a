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
#include <string>
#include <vector>

#include "ehcap/dist.hpp"
#include "ehcap/policies.hpp"

namespace ehcap {

/// 1/2 log2(1 + g), bits per channel use.
double rate(double power);

/// min{b - g + e_next, cap}. Throws AdmissibilityViolation when g > b.
double step_battery(double b, double g, double e_next, double battery_cap);

/// One simulated run. Index t holds slot t+1: the (clipped) arrival E_t, the
/// battery B_t seen by the policy, and the allocation g_t.
struct BatteryTrajectory {
  double battery_cap = 0.0;
  double b0 = 0.0;
  std::vector<double> arrivals;
  std::vector<double> batteries;
  std::vector<double> powers;
  std::vector<std::uint8_t> event_flags;
  std::vector<std::size_t> epoch_starts;

  std::size_t size() const noexcept { return powers.size(); }
  double mean_rate() const;
};

/// Epoch events: arrival events for bernoulli_exp and binary_quantization,
/// full-battery events for every other kind.
BatteryTrajectory simulate(const Policy& policy, const ClippedDistribution& dist, std::size_t n, double b0,
                           std::uint64_t seed);

/// Re-derives every battery level from the arrivals and powers; returns the
/// largest absolute mismatch, or throws AdmissibilityViolation.
double verify_recursion(const BatteryTrajectory& trajectory);

std::string trajectory_to_csv(const BatteryTrajectory& trajectory);

struct ThroughputEstimate {
  double mean_rate = 0.0;
  double std_error = 0.0;  // "stderr" in JSON
  std::size_t n_steps = 0;
  std::size_t n_trials = 0;
  double epoch_mean_L = 0.0;
  double epoch_mean_L2 = 0.0;
  double chernoff_bound = 0.0;
  std::uint64_t seed = 0;
};

/// Mean over trials of (1/n) sum 1/2 log2(1 + g_t). The standard error uses
/// the across-trial sample variance; trial i draws from stream_seed(seed, i).
ThroughputEstimate estimate_throughput(const Policy& policy, const ClippedDistribution& dist, std::size_t n,
                                       std::size_t trials, double b0, std::uint64_t seed);

std::string estimate_to_json(const ThroughputEstimate& estimate);
ThroughputEstimate estimate_from_json(const std::string& text);

/// Renewal-reward throughput of the Bernoulli exponential policy under
/// {0, cap} arrivals with Pr{cap} = p:
///   p * sum_{l>=1} p (1-p)^{l-1} sum_{i=1}^{l} 1/2 log2(1 + cap p (1-p)^{i-1}).
double bernoulli_renewal_throughput(double p, double battery_cap);

/// min over a log-spaced theta grid of e^{theta cap} / (1 - E[e^{-theta E~}]),
/// an upper bound on the mean generalized-Bernoulli epoch length.
double chernoff_epoch_bound(const ClippedDistribution& dist);

struct EpochStatistics {
  std::size_t epochs = 0;
  double mean_L = 0.0;
  double mean_L2 = 0.0;
  double mean_SL = 0.0;
  double wald1_residual = 0.0;  // |mean(S_L) - mu mean(L)|
  double wald2_residual = 0.0;  // |mean((S_L - mu L)^2) - sigma2 mean(L)|
  double wald1_stderr = 0.0;    // bootstrap
  double wald2_stderr = 0.0;    // bootstrap
  double chernoff_bound = 0.0;
};

/// Statistics over the complete epochs of a trajectory; S_L sums the arrivals
/// strictly after an epoch start up to and including the next start.
/// Needs at least 30 complete epochs.
EpochStatistics epoch_statistics(const BatteryTrajectory& trajectory, const ClippedDistribution& dist);

/// Plug-in block entropy H(F^k)/k pooled over trials, with overlapping
/// blocks of length `block`. Never exceeds 1 for binary flags.
double entropy_per_symbol(const std::vector<std::vector<std::uint8_t>>& flags, std::size_t block = 8);

struct InvarianceCheck {
  double delta = 0.0;
  double pooled_stderr = 0.0;
  double throughput_empty = 0.0;
  double throughput_full = 0.0;
};

/// |T(b0 = 0) - T(b0 = cap)|, both runs on the same seed.
InvarianceCheck initial_state_invariance_check(const Policy& policy, const ClippedDistribution& dist, std::size_t n,
                                               std::size_t trials, std::uint64_t seed);

}  // namespace ehcap
