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

#include <string>
#include <string_view>

namespace ehcap {

enum class PolicyKind {
  kBernoulliExp,
  kGeneralizedBernoulli,
  kBinaryQuantization,
  kFixedFraction,
  kGreedy,
  kConstant,
};

std::string_view to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(std::string_view name);

/// Immutable descriptor of an online power-control policy. Only the
/// parameters relevant to `kind` are read:
///   bernoulli_exp          p
///   generalized_bernoulli  q
///   binary_quantization    threshold, q_prime
///   fixed_fraction         q
///   constant               level
struct Policy {
  PolicyKind kind = PolicyKind::kGreedy;
  double p = 0.0;
  double q = 0.0;
  double threshold = 0.0;
  double q_prime = 0.0;
  double level = 0.0;

  static Policy bernoulli_exp(double p);
  static Policy generalized_bernoulli(double q);
  static Policy binary_quantization(double threshold, double q_prime);
  static Policy fixed_fraction(double q);
  static Policy greedy();
  static Policy constant(double level);

  /// Throws InvalidParameter if the parameters are out of range.
  void validate(double battery_cap) const;

  /// True for the epoch-driven policies that spend a virtual energy budget.
  bool epoch_driven() const;

  friend bool operator==(const Policy&, const Policy&) = default;
};

/// Per-step state carried between decisions.
///
/// `battery` is the energy left after the previous allocation, so the next
/// step sees B_t = min(battery + arrival, cap). `virtual_level` is the budget
/// the epoch-driven policies drain geometrically; it restarts at every event.
struct PolicyState {
  double battery = 0.0;
  long steps_since_event = 0;
  bool event_flag = false;
  bool started = false;  // an event has occurred
  double virtual_level = 0.0;

  friend bool operator==(const PolicyState&, const PolicyState&) = default;
};

PolicyState initial_policy_state(double b0);

struct StepResult {
  double power;         // g_t
  double battery;       // B_t, before the allocation
  PolicyState state;
};

/// One decision of `policy` after observing `arrival`. The allocation
/// always satisfies 0 <= g_t <= B_t.
StepResult policy_step(const Policy& policy, const PolicyState& state, double arrival, double battery_cap);

StepResult bernoulli_policy_step(const PolicyState& state, double arrival, double p, double battery_cap);
StepResult generalized_bernoulli_step(const PolicyState& state, double arrival, double q, double battery_cap);
StepResult binary_quantization_step(const PolicyState& state, double arrival, double threshold_x, double q_prime,
                                    double battery_cap);
StepResult fixed_fraction_step(const PolicyState& state, double arrival, double q, double battery_cap);
StepResult greedy_step(const PolicyState& state, double arrival, double battery_cap);
StepResult constant_step(const PolicyState& state, double arrival, double level, double battery_cap);

std::string policy_to_json(const Policy& policy);
Policy policy_from_json(const std::string& text);

}  // namespace ehcap
