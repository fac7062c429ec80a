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

#include "ehcap/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "ehcap/error.hpp"
#include "ehcap/parallel.hpp"
#include "ehcap/sim.hpp"

namespace ehcap {

namespace {

constexpr double kMix = 0.5;
constexpr std::size_t kSweepChunk = 64;

}  // namespace

MdpModel::MdpModel(ClippedDistribution dist, int levels) : dist_(std::move(dist)), levels_(levels) {
  if (levels < 8) throw InvalidParameter("MdpModel: at least 8 battery levels are required");
  step_ = dist_.battery_cap() / (levels - 1);
  kernel_.resize(levels);
  for (int d = 0; d < levels; ++d) {
    std::map<int, double> merged;
    for (std::size_t i = 0; i < dist_.support().size(); ++i) {
      const double b = std::min(level(d) + dist_.support()[i], dist_.battery_cap());
      merged[snap(b)] += dist_.probs()[i];
    }
    for (const auto& [next, prob] : merged) kernel_[d].push_back({next, prob});
  }
}

int MdpModel::snap(double energy) const {
  const long idx = std::lround(energy / step_);
  return static_cast<int>(std::clamp<long>(idx, 0, levels_ - 1));
}

MdpSolution value_iterate(const MdpModel& model, double tol, int max_iters) {
  if (!(tol >= 1e-8)) throw InvalidParameter("value_iterate: tol must be at least 1e-8");
  if (max_iters < 1) throw InvalidParameter("value_iterate: max_iters must be positive");
  const int n = model.levels();
  std::vector<double> reward(n);
  for (int a = 0; a < n; ++a) reward[a] = rate(model.level(a));

  std::vector<double> value(n, 0.0);
  std::vector<double> expected(n);
  std::vector<double> next(n);
  std::vector<int> policy(n, 0);
  const std::size_t chunks = (static_cast<std::size_t>(n) + kSweepChunk - 1) / kSweepChunk;
  double span = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= max_iters; ++it) {
    for (int d = 0; d < n; ++d) {
      double acc = 0.0;
      for (const auto& o : model.transitions(d)) acc += o.prob * value[o.next];
      expected[d] = acc;
    }
    parallel_for(chunks, [&](std::size_t c) {
      const int lo = static_cast<int>(c * kSweepChunk);
      const int hi = std::min(n, lo + static_cast<int>(kSweepChunk));
      for (int s = lo; s < hi; ++s) {
        double best = -std::numeric_limits<double>::infinity();
        int arg = 0;
        for (int a = 0; a <= s; ++a) {
          const double q = reward[a] + expected[s - a];
          // Ties go to the smallest allocation.
          if (q > best + 1e-13) {
            best = q;
            arg = a;
          }
        }
        next[s] = kMix * best + (1.0 - kMix) * value[s];
        policy[s] = arg;
      }
    });
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < n; ++s) {
      const double inc = (next[s] - value[s]) / kMix;
      lo = std::min(lo, inc);
      hi = std::max(hi, inc);
    }
    span = hi - lo;
    const double ref = next[0];
    for (int s = 0; s < n; ++s) value[s] = next[s] - ref;
    if (span <= tol) {
      MdpSolution out;
      out.gain = 0.5 * (lo + hi);
      out.gain_low = lo;
      out.gain_high = hi;
      out.policy = policy;
      out.iterations = it;
      return out;
    }
  }
  throw ConvergenceFailure("value_iterate: span did not reach tolerance", span);
}

namespace {

struct EpochRule {
  double budget = 0.0;
  double fraction = 0.0;
};

EpochRule epoch_rule(const Policy& policy, double cap) {
  switch (policy.kind) {
    case PolicyKind::kBernoulliExp:
      return {cap, policy.p};
    case PolicyKind::kGeneralizedBernoulli:
      return {cap, policy.q};
    case PolicyKind::kBinaryQuantization:
      return {policy.threshold, policy.q_prime};
    default:
      return {};
  }
}

bool is_event(const Policy& policy, double arrival, int battery_idx, bool started, const MdpModel& model) {
  const double cap = model.dist().battery_cap();
  const bool full = battery_idx == model.levels() - 1;
  switch (policy.kind) {
    case PolicyKind::kBernoulliExp:
      return arrival >= cap || (!started && full);
    case PolicyKind::kGeneralizedBernoulli:
      return full;
    case PolicyKind::kBinaryQuantization:
      return std::min(arrival, cap) >= policy.threshold || (!started && full);
    default:
      return full;
  }
}

double direct_power(const Policy& policy, double battery) {
  switch (policy.kind) {
    case PolicyKind::kFixedFraction:
      return policy.q * battery;
    case PolicyKind::kGreedy:
      return battery;
    case PolicyKind::kConstant:
      return std::min(battery, policy.level);
    default:
      return 0.0;
  }
}

}  // namespace

double evaluate_policy(const MdpModel& model, const Policy& policy, double tol, int epoch_cap) {
  if (!(tol > 0.0)) throw InvalidParameter("evaluate_policy: tol must be positive");
  if (epoch_cap < 1) throw InvalidParameter("evaluate_policy: epoch_cap must be positive");
  const double cap = model.dist().battery_cap();
  policy.validate(cap);
  const int n = model.levels();
  const bool epochs = policy.epoch_driven();
  const EpochRule rule = epoch_rule(policy, cap);

  // Chain state: (battery after allocation, phase). Phase K + 1 means no
  // event yet; phases 0..K count steps since the last event.
  const int K = epochs ? epoch_cap : 0;
  const int phases = K + 2;
  const int waiting = K + 1;
  const auto index = [phases](int d, int phase) { return static_cast<std::size_t>(d) * phases + phase; };
  const std::size_t states = static_cast<std::size_t>(n) * phases;

  struct Edge {
    std::size_t to;
    double prob;
    double reward;
  };
  std::vector<std::vector<Edge>> edges(states);
  const auto& support = model.dist().support();
  const auto& probs = model.dist().probs();
  for (int d = 0; d < n; ++d) {
    for (int phase = 0; phase < phases; ++phase) {
      const bool started = phase != waiting;
      for (std::size_t i = 0; i < support.size(); ++i) {
        const double e = support[i];
        const int b = model.snap(std::min(model.level(d) + e, cap));
        const bool event = is_event(policy, e, b, started, model);
        int next_phase = phase;
        if (event) {
          next_phase = 0;
        } else if (started) {
          next_phase = std::min(phase + 1, K);
        }
        double g = 0.0;
        if (!epochs) {
          g = direct_power(policy, model.level(b));
        } else if (next_phase != waiting) {
          g = rule.budget * rule.fraction * std::pow(1.0 - rule.fraction, next_phase);
        }
        const int a = std::min(model.snap(g), b);
        edges[index(d, phase)].push_back({index(b - a, next_phase), probs[i], rate(model.level(a))});
      }
    }
  }

  std::vector<double> pi(states, 0.0);
  pi[index(n - 1, waiting)] = 1.0;
  std::vector<double> next(states);
  double diff = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 1000000; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < states; ++s) {
      if (pi[s] == 0.0) continue;
      next[s] += (1.0 - kMix) * pi[s];
      for (const auto& edge : edges[s]) next[edge.to] += kMix * pi[s] * edge.prob;
    }
    diff = 0.0;
    for (std::size_t s = 0; s < states; ++s) diff += std::abs(next[s] - pi[s]);
    pi.swap(next);
    if (diff <= tol) break;
  }
  if (diff > tol) throw ConvergenceFailure("evaluate_policy: stationary distribution not reached", diff);

  if (epochs) {
    double at_cap = 0.0;
    for (int d = 0; d < n; ++d) at_cap += pi[index(d, K)];
    if (at_cap > 1e-9) {
      throw CapTooSmall("evaluate_policy: stationary mass " + std::to_string(at_cap) + " at the epoch cap " +
                        std::to_string(K));
    }
  }
  double gain = 0.0;
  for (std::size_t s = 0; s < states; ++s) {
    for (const auto& edge : edges[s]) gain += pi[s] * edge.prob * edge.reward;
  }
  return gain;
}

double evaluate_policy_growing_cap(const MdpModel& model, const Policy& policy, double tol, int max_epoch_cap) {
  for (int cap = 64;; cap *= 2) {
    try {
      return evaluate_policy(model, policy, tol, cap);
    } catch (const CapTooSmall&) {
      if (cap * 2 > max_epoch_cap) throw;
    }
  }
}

bool policy_is_monotone(const MdpSolution& solution) {
  return std::is_sorted(solution.policy.begin(), solution.policy.end());
}

std::string policy_table_csv(const MdpModel& model, const MdpSolution& solution) {
  std::ostringstream out;
  out.precision(12);
  out << "state_level,action_level\n";
  for (std::size_t s = 0; s < solution.policy.size(); ++s) {
    out << model.level(static_cast<int>(s)) << ',' << model.level(solution.policy[s]) << '\n';
  }
  return out.str();
}

}  // namespace ehcap
