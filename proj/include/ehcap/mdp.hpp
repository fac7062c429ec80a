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

#include <cstddef>
#include <string>
#include <vector>

#include "ehcap/dist.hpp"
#include "ehcap/policies.hpp"

namespace ehcap {

/// Battery discretized to `levels` equally spaced values 0, h, ..., cap with
/// h = cap / (levels - 1). The state is the battery after the arrival and
/// before the allocation; actions are grid levels not above the state, and
/// the next state is the grid level nearest to min(b - g + e, cap).
class MdpModel {
 public:
  MdpModel(ClippedDistribution dist, int levels);

  const ClippedDistribution& dist() const noexcept { return dist_; }
  int levels() const noexcept { return levels_; }
  double step() const noexcept { return step_; }
  double level(int index) const noexcept { return index * step_; }
  /// Nearest grid index to an energy in [0, cap].
  int snap(double energy) const;

  struct Outcome {
    int next;
    double prob;
  };
  /// Law of the next state given `remaining` grid units left after the
  /// allocation; outcomes with the same target are merged.
  const std::vector<Outcome>& transitions(int remaining) const { return kernel_[remaining]; }

 private:
  ClippedDistribution dist_;
  int levels_;
  double step_;
  std::vector<std::vector<Outcome>> kernel_;
};

struct MdpSolution {
  double gain = 0.0;        // midpoint of the final gain bracket, bits per channel use
  double gain_low = 0.0;    // min over states of the last normalized increment
  double gain_high = 0.0;   // max over states of the last normalized increment
  std::vector<int> policy;  // action grid index per state grid index
  int iterations = 0;
};

/// Relative value iteration with reference state 0. The Bellman operator is
/// mixed with the identity (weight 1/2) so periodic chains still converge;
/// the increments are rescaled accordingly. Stops when the span of
/// V_{k+1} - V_k is at most `tol`.
///
/// Throws ConvergenceFailure (carrying the last span) after `max_iters`.
MdpSolution value_iterate(const MdpModel& model, double tol = 1e-8, int max_iters = 200000);

/// Long-run average rate of `policy` on the grid, started with a full
/// battery. Allocations are snapped to the nearest grid level and clipped to
/// the state. Epoch-driven policies run on the state (battery, steps since
/// the last event), with the step count capped at `epoch_cap`.
///
/// Throws CapTooSmall when the stationary mass at the cap exceeds 1e-9, and
/// ConvergenceFailure if the stationary distribution is not reached.
double evaluate_policy(const MdpModel& model, const Policy& policy, double tol = 1e-12, int epoch_cap = 64);

/// evaluate_policy, doubling the epoch cap from 64 after each CapTooSmall
/// until `max_epoch_cap`; rethrows past that.
double evaluate_policy_growing_cap(const MdpModel& model, const Policy& policy, double tol = 1e-12,
                                   int max_epoch_cap = 1024);

/// True when the allocation is non-decreasing in the battery level.
bool policy_is_monotone(const MdpSolution& solution);

/// Columns state_level, action_level.
std::string policy_table_csv(const MdpModel& model, const MdpSolution& solution);

}  // namespace ehcap
