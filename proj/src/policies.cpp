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

#include "ehcap/policies.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "ehcap/error.hpp"
#include "json.hpp"

namespace ehcap {

namespace {

// A battery within this distance of the cap counts as full.
constexpr double kFullTolerance = 1e-12;

constexpr std::array<std::pair<PolicyKind, std::string_view>, 6> kNames{{
    {PolicyKind::kBernoulliExp, "bernoulli_exp"},
    {PolicyKind::kGeneralizedBernoulli, "generalized_bernoulli"},
    {PolicyKind::kBinaryQuantization, "binary_quantization"},
    {PolicyKind::kFixedFraction, "fixed_fraction"},
    {PolicyKind::kGreedy, "greedy"},
    {PolicyKind::kConstant, "constant"},
}};

void require_fraction(double v, const char* what) {
  if (!(v > 0.0 && v <= 1.0)) throw InvalidParameter(std::string(what) + " must lie in (0, 1]");
}

double charge(const PolicyState& state, double arrival, double cap) {
  if (!(arrival >= 0.0)) throw InvalidParameter("arrival must be non-negative");
  return std::min(state.battery + arrival, cap);
}

bool is_full(double battery, double cap) { return battery >= cap - kFullTolerance; }

// Shared body of the epoch-driven policies: on an event the virtual budget
// restarts at `budget`, and each step spends `fraction` of what is left.
StepResult drain_virtual(const PolicyState& state, double battery, bool event, double budget, double fraction) {
  PolicyState next = state;
  next.event_flag = event;
  if (event) {
    next.started = true;
    next.steps_since_event = 0;
    next.virtual_level = budget;
  } else {
    ++next.steps_since_event;
  }
  double power = 0.0;
  if (next.started) {
    power = std::min(fraction * next.virtual_level, battery);
    next.virtual_level -= power;
  }
  next.battery = battery - power;
  return {power, battery, next};
}

StepResult direct(const PolicyState& state, double battery, double power, double cap) {
  PolicyState next = state;
  next.event_flag = is_full(battery, cap);
  next.steps_since_event = next.event_flag ? 0 : state.steps_since_event + 1;
  next.started = state.started || next.event_flag;
  next.battery = battery - power;
  return {power, battery, next};
}

}  // namespace

std::string_view to_string(PolicyKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

PolicyKind policy_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  throw InvalidParameter("unknown policy kind: " + std::string(name));
}

Policy Policy::bernoulli_exp(double p) {
  require_fraction(p, "bernoulli_exp p");
  Policy out;
  out.kind = PolicyKind::kBernoulliExp;
  out.p = p;
  return out;
}

Policy Policy::generalized_bernoulli(double q) {
  require_fraction(q, "generalized_bernoulli q");
  Policy out;
  out.kind = PolicyKind::kGeneralizedBernoulli;
  out.q = q;
  return out;
}

Policy Policy::binary_quantization(double threshold, double q_prime) {
  if (!(threshold > 0.0)) throw InvalidParameter("binary_quantization threshold must be positive");
  require_fraction(q_prime, "binary_quantization q_prime");
  Policy out;
  out.kind = PolicyKind::kBinaryQuantization;
  out.threshold = threshold;
  out.q_prime = q_prime;
  return out;
}

Policy Policy::fixed_fraction(double q) {
  require_fraction(q, "fixed_fraction q");
  Policy out;
  out.kind = PolicyKind::kFixedFraction;
  out.q = q;
  return out;
}

Policy Policy::greedy() { return Policy{}; }

Policy Policy::constant(double level) {
  if (!(level >= 0.0)) throw InvalidParameter("constant level must be non-negative");
  Policy out;
  out.kind = PolicyKind::kConstant;
  out.level = level;
  return out;
}

void Policy::validate(double battery_cap) const {
  if (!(battery_cap > 0.0)) throw InvalidParameter("battery_cap must be positive");
  switch (kind) {
    case PolicyKind::kBernoulliExp:
      require_fraction(p, "bernoulli_exp p");
      break;
    case PolicyKind::kGeneralizedBernoulli:
      require_fraction(q, "generalized_bernoulli q");
      break;
    case PolicyKind::kBinaryQuantization:
      if (!(threshold > 0.0 && threshold <= battery_cap)) {
        throw InvalidParameter("binary_quantization threshold must lie in (0, battery_cap]");
      }
      require_fraction(q_prime, "binary_quantization q_prime");
      break;
    case PolicyKind::kFixedFraction:
      require_fraction(q, "fixed_fraction q");
      break;
    case PolicyKind::kGreedy:
      break;
    case PolicyKind::kConstant:
      if (!(level >= 0.0)) throw InvalidParameter("constant level must be non-negative");
      break;
  }
}

bool Policy::epoch_driven() const {
  return kind == PolicyKind::kBernoulliExp || kind == PolicyKind::kGeneralizedBernoulli ||
         kind == PolicyKind::kBinaryQuantization;
}

PolicyState initial_policy_state(double b0) {
  PolicyState s;
  s.battery = b0;
  return s;
}

StepResult bernoulli_policy_step(const PolicyState& state, double arrival, double p, double battery_cap) {
  require_fraction(p, "bernoulli_exp p");
  const double battery = charge(state, arrival, battery_cap);
  const bool event = arrival >= battery_cap || (!state.started && is_full(battery, battery_cap));
  return drain_virtual(state, battery, event, battery_cap, p);
}

StepResult generalized_bernoulli_step(const PolicyState& state, double arrival, double q, double battery_cap) {
  require_fraction(q, "generalized_bernoulli q");
  const double battery = charge(state, arrival, battery_cap);
  return drain_virtual(state, battery, is_full(battery, battery_cap), battery_cap, q);
}

StepResult binary_quantization_step(const PolicyState& state, double arrival, double threshold_x, double q_prime,
                                    double battery_cap) {
  if (!(threshold_x > 0.0 && threshold_x <= battery_cap)) {
    throw InvalidParameter("binary_quantization threshold must lie in (0, battery_cap]");
  }
  require_fraction(q_prime, "binary_quantization q_prime");
  const double battery = charge(state, arrival, battery_cap);
  // Arrivals of at least x count as one packet of size x; the residue and
  // every smaller arrival are ignored.
  const bool event = std::min(arrival, battery_cap) >= threshold_x || (!state.started && is_full(battery, battery_cap));
  return drain_virtual(state, battery, event, threshold_x, q_prime);
}

StepResult fixed_fraction_step(const PolicyState& state, double arrival, double q, double battery_cap) {
  require_fraction(q, "fixed_fraction q");
  const double battery = charge(state, arrival, battery_cap);
  return direct(state, battery, q * battery, battery_cap);
}

StepResult greedy_step(const PolicyState& state, double arrival, double battery_cap) {
  const double battery = charge(state, arrival, battery_cap);
  return direct(state, battery, battery, battery_cap);
}

StepResult constant_step(const PolicyState& state, double arrival, double level, double battery_cap) {
  if (!(level >= 0.0)) throw InvalidParameter("constant level must be non-negative");
  const double battery = charge(state, arrival, battery_cap);
  return direct(state, battery, std::min(battery, level), battery_cap);
}

StepResult policy_step(const Policy& policy, const PolicyState& state, double arrival, double battery_cap) {
  switch (policy.kind) {
    case PolicyKind::kBernoulliExp:
      return bernoulli_policy_step(state, arrival, policy.p, battery_cap);
    case PolicyKind::kGeneralizedBernoulli:
      return generalized_bernoulli_step(state, arrival, policy.q, battery_cap);
    case PolicyKind::kBinaryQuantization:
      return binary_quantization_step(state, arrival, policy.threshold, policy.q_prime, battery_cap);
    case PolicyKind::kFixedFraction:
      return fixed_fraction_step(state, arrival, policy.q, battery_cap);
    case PolicyKind::kGreedy:
      return greedy_step(state, arrival, battery_cap);
    case PolicyKind::kConstant:
      return constant_step(state, arrival, policy.level, battery_cap);
  }
  throw InvalidParameter("unhandled policy kind");
}

std::string policy_to_json(const Policy& policy) {
  nlohmann::json params = nlohmann::json::object();
  switch (policy.kind) {
    case PolicyKind::kBernoulliExp:
      params["p"] = policy.p;
      break;
    case PolicyKind::kGeneralizedBernoulli:
    case PolicyKind::kFixedFraction:
      params["q"] = policy.q;
      break;
    case PolicyKind::kBinaryQuantization:
      params["threshold"] = policy.threshold;
      params["q_prime"] = policy.q_prime;
      break;
    case PolicyKind::kGreedy:
      break;
    case PolicyKind::kConstant:
      params["level"] = policy.level;
      break;
  }
  nlohmann::json j;
  j["kind"] = std::string(to_string(policy.kind));
  j["params"] = params;
  return j.dump();
}

Policy policy_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidParameter(std::string("policy JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw InvalidParameter("policy JSON needs a string \"kind\"");
  }
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  const auto num = [&](const char* key) {
    if (!params.contains(key) || !params[key].is_number()) {
      throw InvalidParameter(std::string("policy JSON: missing numeric param ") + key);
    }
    return params[key].get<double>();
  };
  switch (policy_kind_from_string(j["kind"].get<std::string>())) {
    case PolicyKind::kBernoulliExp:
      return Policy::bernoulli_exp(num("p"));
    case PolicyKind::kGeneralizedBernoulli:
      return Policy::generalized_bernoulli(num("q"));
    case PolicyKind::kBinaryQuantization:
      return Policy::binary_quantization(num("threshold"), num("q_prime"));
    case PolicyKind::kFixedFraction:
      return Policy::fixed_fraction(num("q"));
    case PolicyKind::kGreedy:
      return Policy::greedy();
    case PolicyKind::kConstant:
      return Policy::constant(num("level"));
  }
  throw InvalidParameter("unhandled policy kind");
}

}  // namespace ehcap
