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

#include "ehcap/sim.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "ehcap/error.hpp"
#include "ehcap/parallel.hpp"
#include "ehcap/rng.hpp"
#include "json.hpp"

namespace ehcap {

namespace {

constexpr std::size_t kMinEpochs = 30;
constexpr int kBootstrapResamples = 400;
constexpr std::uint64_t kBootstrapSeed = 0x5eedb007ULL;

void check_b0(double b0, double cap) {
  if (!(b0 >= 0.0 && b0 <= cap)) throw InvalidParameter("initial battery must lie in [0, battery_cap]");
}

// Drives `policy` for n slots and hands every step to `visit(t, arrival, result)`.
template <typename Visit>
void run_policy(const Policy& policy, const ClippedDistribution& dist, std::size_t n, double b0, std::uint64_t seed,
                Visit&& visit) {
  const double cap = dist.battery_cap();
  policy.validate(cap);
  check_b0(b0, cap);
  UniformStream stream(seed);
  PolicyState state = initial_policy_state(b0);
  for (std::size_t t = 0; t < n; ++t) {
    const double arrival = dist.quantile(stream.next());
    const StepResult r = policy_step(policy, state, arrival, cap);
    visit(t, arrival, r);
    state = r.state;
  }
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

double rate(double power) { return 0.5 * std::log1p(power) / std::numbers::ln2; }

double step_battery(double b, double g, double e_next, double battery_cap) {
  if (g < 0.0 || g > b) {
    std::ostringstream msg;
    msg << "admissibility violated: allocation " << g << " with battery " << b;
    throw AdmissibilityViolation(msg.str());
  }
  if (!(e_next >= 0.0)) throw InvalidParameter("arrival must be non-negative");
  return std::min(b - g + e_next, battery_cap);
}

double BatteryTrajectory::mean_rate() const {
  double s = 0.0;
  for (double g : powers) s += rate(g);
  return powers.empty() ? 0.0 : s / static_cast<double>(powers.size());
}

BatteryTrajectory simulate(const Policy& policy, const ClippedDistribution& dist, std::size_t n, double b0,
                           std::uint64_t seed) {
  BatteryTrajectory tr;
  tr.battery_cap = dist.battery_cap();
  tr.b0 = b0;
  tr.arrivals.reserve(n);
  tr.batteries.reserve(n);
  tr.powers.reserve(n);
  tr.event_flags.reserve(n);
  double prev_battery = b0;
  double prev_power = 0.0;
  run_policy(policy, dist, n, b0, seed, [&](std::size_t t, double arrival, const StepResult& r) {
    const double expected = step_battery(prev_battery, prev_power, arrival, tr.battery_cap);
    if (expected != r.battery) throw AdmissibilityViolation("policy state diverged from the battery recursion");
    if (r.power < 0.0 || r.power > r.battery) {
      throw AdmissibilityViolation("policy allocated more energy than the battery holds");
    }
    tr.arrivals.push_back(arrival);
    tr.batteries.push_back(r.battery);
    tr.powers.push_back(r.power);
    tr.event_flags.push_back(r.state.event_flag ? 1 : 0);
    if (r.state.event_flag) tr.epoch_starts.push_back(t);
    prev_battery = r.battery;
    prev_power = r.power;
  });
  return tr;
}

double verify_recursion(const BatteryTrajectory& tr) {
  double worst = 0.0;
  double prev_battery = tr.b0;
  double prev_power = 0.0;
  for (std::size_t t = 0; t < tr.size(); ++t) {
    const double b = step_battery(prev_battery, prev_power, tr.arrivals[t], tr.battery_cap);
    worst = std::max(worst, std::abs(b - tr.batteries[t]));
    if (tr.powers[t] > tr.batteries[t] || tr.powers[t] < 0.0) {
      throw AdmissibilityViolation("stored allocation exceeds stored battery");
    }
    prev_battery = tr.batteries[t];
    prev_power = tr.powers[t];
  }
  return worst;
}

std::string trajectory_to_csv(const BatteryTrajectory& tr) {
  std::ostringstream out;
  out.precision(12);
  out << "t,arrival,battery,power,rate,epoch_flag\n";
  for (std::size_t t = 0; t < tr.size(); ++t) {
    out << (t + 1) << ',' << tr.arrivals[t] << ',' << tr.batteries[t] << ',' << tr.powers[t] << ','
        << rate(tr.powers[t]) << ',' << static_cast<int>(tr.event_flags[t]) << '\n';
  }
  return out.str();
}

ThroughputEstimate estimate_throughput(const Policy& policy, const ClippedDistribution& dist, std::size_t n,
                                       std::size_t trials, double b0, std::uint64_t seed) {
  if (n < 1 || trials < 1) throw InvalidParameter("estimate_throughput needs n >= 1 and trials >= 1");
  policy.validate(dist.battery_cap());
  check_b0(b0, dist.battery_cap());

  struct TrialResult {
    double mean_rate = 0.0;
    double sum_L = 0.0;
    double sum_L2 = 0.0;
    std::size_t epochs = 0;
  };
  std::vector<TrialResult> results(trials);
  parallel_for(trials, [&](std::size_t i) {
    TrialResult r;
    double total = 0.0;
    std::size_t last_event = 0;
    bool seen_event = false;
    run_policy(policy, dist, n, b0, stream_seed(seed, i), [&](std::size_t t, double, const StepResult& s) {
      total += rate(s.power);
      if (s.state.event_flag) {
        if (seen_event) {
          const double len = static_cast<double>(t - last_event);
          r.sum_L += len;
          r.sum_L2 += len * len;
          ++r.epochs;
        }
        seen_event = true;
        last_event = t;
      }
    });
    r.mean_rate = total / static_cast<double>(n);
    results[i] = r;
  });

  ThroughputEstimate est;
  est.n_steps = n;
  est.n_trials = trials;
  est.seed = seed;
  std::vector<double> rates;
  double sum_L = 0.0;
  double sum_L2 = 0.0;
  std::size_t epochs = 0;
  for (const auto& r : results) {
    rates.push_back(r.mean_rate);
    sum_L += r.sum_L;
    sum_L2 += r.sum_L2;
    epochs += r.epochs;
  }
  est.mean_rate = mean_of(rates);
  est.std_error = sample_sd(rates) / std::sqrt(static_cast<double>(trials));
  if (epochs > 0) {
    est.epoch_mean_L = sum_L / static_cast<double>(epochs);
    est.epoch_mean_L2 = sum_L2 / static_cast<double>(epochs);
  }
  est.chernoff_bound = chernoff_epoch_bound(dist);
  return est;
}

std::string estimate_to_json(const ThroughputEstimate& e) {
  nlohmann::json j;
  j["mean_rate"] = e.mean_rate;
  j["stderr"] = e.std_error;
  j["n"] = e.n_steps;
  j["trials"] = e.n_trials;
  j["epoch_mean_L"] = e.epoch_mean_L;
  j["epoch_mean_L2"] = e.epoch_mean_L2;
  j["chernoff_bound"] = e.chernoff_bound;
  j["seed"] = e.seed;
  return j.dump();
}

ThroughputEstimate estimate_from_json(const std::string& text) {
  ThroughputEstimate e;
  try {
    const auto j = nlohmann::json::parse(text);
    e.mean_rate = j.at("mean_rate").get<double>();
    e.std_error = j.at("stderr").get<double>();
    e.n_steps = j.at("n").get<std::size_t>();
    e.n_trials = j.at("trials").get<std::size_t>();
    e.epoch_mean_L = j.at("epoch_mean_L").get<double>();
    e.epoch_mean_L2 = j.at("epoch_mean_L2").get<double>();
    e.chernoff_bound = j.at("chernoff_bound").get<double>();
    e.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidParameter(std::string("estimate JSON: ") + ex.what());
  }
  return e;
}

double bernoulli_renewal_throughput(double p, double battery_cap) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidParameter("bernoulli_renewal_throughput: p must lie in (0, 1]");
  if (!(battery_cap > 0.0)) throw InvalidParameter("bernoulli_renewal_throughput: battery_cap must be positive");
  if (p == 1.0) return rate(battery_cap);
  // Exchanging the sums: sum_l Pr{L = l} sum_{i<=l} r_i = sum_i Pr{L >= i} r_i.
  const double keep = 1.0 - p;
  double survival = 1.0;  // Pr{L >= i} = (1-p)^{i-1}
  double sum = 0.0;
  for (int i = 1; i < 1000000; ++i) {
    const double term = survival * rate(battery_cap * p * survival);
    sum += term;
    // The rates decrease in i, so the tail is at most term / p.
    if (term / p <= 1e-12 * sum) break;
    survival *= keep;
  }
  return p * sum;
}

double chernoff_epoch_bound(const ClippedDistribution& dist) {
  constexpr int kGrid = 64;
  constexpr double kLogLow = -3.0;
  constexpr double kLogHigh = 2.0;
  double best_log = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrid; ++i) {
    const double theta = std::pow(10.0, kLogLow + (kLogHigh - kLogLow) * i / (kGrid - 1));
    // 1 - E[e^{-theta E}] without cancellation.
    double gap = 0.0;
    for (std::size_t k = 0; k < dist.support().size(); ++k) {
      gap += dist.probs()[k] * -std::expm1(-theta * dist.support()[k]);
    }
    if (gap <= 0.0) continue;
    best_log = std::min(best_log, theta * dist.battery_cap() - std::log(gap));
  }
  return std::exp(best_log);
}

EpochStatistics epoch_statistics(const BatteryTrajectory& tr, const ClippedDistribution& dist) {
  const auto& starts = tr.epoch_starts;
  if (starts.size() < kMinEpochs + 1) {
    throw InsufficientData("epoch_statistics needs at least 30 complete epochs, got " +
                           std::to_string(starts.empty() ? 0 : starts.size() - 1));
  }
  const double mu = dist.mu();
  const double sigma2 = dist.sigma2();
  const std::size_t m = starts.size() - 1;
  std::vector<double> L(m);
  std::vector<double> SL(m);
  std::vector<double> d1(m);
  std::vector<double> d2(m);
  for (std::size_t k = 0; k < m; ++k) {
    L[k] = static_cast<double>(starts[k + 1] - starts[k]);
    double s = 0.0;
    for (std::size_t t = starts[k] + 1; t <= starts[k + 1]; ++t) s += tr.arrivals[t];
    SL[k] = s;
    d1[k] = s - mu * L[k];
    d2[k] = d1[k] * d1[k] - sigma2 * L[k];
  }

  EpochStatistics st;
  st.epochs = m;
  st.mean_L = mean_of(L);
  double l2 = 0.0;
  for (double x : L) l2 += x * x;
  st.mean_L2 = l2 / static_cast<double>(m);
  st.mean_SL = mean_of(SL);
  st.wald1_residual = std::abs(mean_of(d1));
  st.wald2_residual = std::abs(mean_of(d2));

  UniformStream stream(kBootstrapSeed);
  std::vector<double> boot1(kBootstrapResamples);
  std::vector<double> boot2(kBootstrapResamples);
  for (int b = 0; b < kBootstrapResamples; ++b) {
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const auto idx = std::min(m - 1, static_cast<std::size_t>(stream.next() * static_cast<double>(m)));
      s1 += d1[idx];
      s2 += d2[idx];
    }
    boot1[b] = s1 / static_cast<double>(m);
    boot2[b] = s2 / static_cast<double>(m);
  }
  st.wald1_stderr = sample_sd(boot1);
  st.wald2_stderr = sample_sd(boot2);
  st.chernoff_bound = chernoff_epoch_bound(dist);
  return st;
}

double entropy_per_symbol(const std::vector<std::vector<std::uint8_t>>& flags, std::size_t block) {
  if (block < 1 || block > 63) throw InvalidParameter("entropy_per_symbol: block length must lie in [1, 63]");
  std::map<std::uint64_t, std::size_t> counts;
  std::size_t total = 0;
  const std::uint64_t mask = (std::uint64_t{1} << block) - 1;
  for (const auto& trial : flags) {
    if (trial.size() < block) continue;
    std::uint64_t word = 0;
    for (std::size_t t = 0; t < trial.size(); ++t) {
      word = ((word << 1) | (trial[t] ? 1u : 0u)) & mask;
      if (t + 1 >= block) {
        ++counts[word];
        ++total;
      }
    }
  }
  if (total == 0) return 0.0;
  double h = 0.0;
  for (const auto& [word, c] : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return std::min(1.0, h / static_cast<double>(block));
}

InvarianceCheck initial_state_invariance_check(const Policy& policy, const ClippedDistribution& dist, std::size_t n,
                                               std::size_t trials, std::uint64_t seed) {
  const ThroughputEstimate empty = estimate_throughput(policy, dist, n, trials, 0.0, seed);
  const ThroughputEstimate full = estimate_throughput(policy, dist, n, trials, dist.battery_cap(), seed);
  InvarianceCheck c;
  c.throughput_empty = empty.mean_rate;
  c.throughput_full = full.mean_rate;
  c.delta = std::abs(full.mean_rate - empty.mean_rate);
  c.pooled_stderr = std::sqrt(empty.std_error * empty.std_error + full.std_error * full.std_error);
  return c;
}

}  // namespace ehcap
