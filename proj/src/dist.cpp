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

#include "ehcap/dist.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <utility>

#include "ehcap/error.hpp"
#include "ehcap/rng.hpp"
#include "json.hpp"

namespace ehcap {

namespace {

constexpr double kSumTolerance = 1e-12;
constexpr double kDropMass = 1e-15;

}  // namespace

EnergyDistribution::EnergyDistribution(std::vector<double> support, std::vector<double> probs) {
  if (support.empty() || support.size() != probs.size()) {
    throw InvalidParameter("distribution: support and probs must be non-empty and of equal length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (!std::isfinite(support[i]) || support[i] < 0.0) {
      throw InvalidParameter("distribution: support values must be finite and >= 0");
    }
    if (!std::isfinite(probs[i]) || probs[i] < 0.0) {
      throw InvalidParameter("distribution: probabilities must be finite and >= 0");
    }
    total += probs[i];
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw InvalidParameter("distribution: probabilities must sum to 1");
  }

  std::vector<std::size_t> order(support.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });

  std::vector<double> merged_support;
  std::vector<double> merged_probs;
  for (std::size_t i : order) {
    if (!merged_support.empty() && merged_support.back() == support[i]) {
      merged_probs.back() += probs[i];
    } else {
      merged_support.push_back(support[i]);
      merged_probs.push_back(probs[i]);
    }
  }

  double kept = 0.0;
  for (std::size_t i = 0; i < merged_support.size(); ++i) {
    if (merged_probs[i] >= kDropMass) {
      support_.push_back(merged_support[i]);
      probs_.push_back(merged_probs[i]);
      kept += merged_probs[i];
    }
  }
  // Renormalize only after a drop, so rebuilding from an existing law is exact.
  if (probs_.size() < merged_probs.size()) {
    for (double& p : probs_) p /= kept;
  }

  const bool has_energy = std::any_of(support_.begin(), support_.end(), [](double v) { return v > 0.0; });
  if (!has_energy) {
    throw InvalidParameter("distribution: some positive energy value needs positive probability");
  }
}

EnergyDistribution EnergyDistribution::deterministic(double value) { return EnergyDistribution({value}, {1.0}); }

EnergyDistribution EnergyDistribution::bernoulli(double p, double level) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidParameter("bernoulli: p must lie in (0, 1]");
  if (p == 1.0) return deterministic(level);
  return EnergyDistribution({0.0, level}, {1.0 - p, p});
}

double EnergyDistribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) m += support_[i] * probs_[i];
  return m;
}

double EnergyDistribution::variance() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t i = 0; i < size(); ++i) v += probs_[i] * (support_[i] - m) * (support_[i] - m);
  return v;
}

namespace {

EnergyDistribution clipped_law(const EnergyDistribution& base, double cap) {
  std::vector<double> s;
  std::vector<double> p;
  for (std::size_t i = 0; i < base.size(); ++i) {
    s.push_back(std::min(base.support()[i], cap));
    p.push_back(base.probs()[i]);
  }
  return EnergyDistribution(std::move(s), std::move(p));
}

double checked_cap(double cap) {
  if (!(cap > 0.0) || !std::isfinite(cap)) throw InvalidParameter("battery_cap must be positive and finite");
  return cap;
}

}  // namespace

ClippedDistribution::ClippedDistribution(EnergyDistribution base, double battery_cap)
    : base_(std::move(base)),
      law_(clipped_law(base_, checked_cap(battery_cap))),
      battery_cap_(battery_cap),
      mu_(law_.mean()),
      sigma2_(law_.variance()) {
  double c = 0.0;
  for (double p : law_.probs()) {
    c += p;
    cdf_.push_back(c);
  }
  cdf_.back() = 1.0;
}

double ClippedDistribution::ccdf(double x) const {
  if (!(x >= 0.0 && x <= battery_cap_)) throw InvalidParameter("ccdf: x must lie in [0, battery_cap]");
  double tail = 0.0;
  const auto& s = law_.support();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] >= x) tail += law_.probs()[i];
  }
  return std::min(tail, 1.0);
}

double ClippedDistribution::laplace(double theta) const {
  double m = 0.0;
  for (std::size_t i = 0; i < law_.size(); ++i) m += law_.probs()[i] * std::exp(-theta * law_.support()[i]);
  return m;
}

double ClippedDistribution::quantile(double u) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  return law_.support()[idx];
}

std::vector<double> ClippedDistribution::sample(std::uint64_t seed, std::size_t n) const {
  UniformStream stream(seed);
  std::vector<double> out(n);
  for (double& v : out) v = quantile(stream.next());
  return out;
}

ClippedDistribution clip(const EnergyDistribution& dist, double battery_cap) {
  return ClippedDistribution(dist, battery_cap);
}

double ccdf(const ClippedDistribution& dist, double x) { return dist.ccdf(x); }

EnergyDistribution distribution_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidParameter(std::string("distribution JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("support") || !j.contains("probs") || !j["support"].is_array() ||
      !j["probs"].is_array()) {
    throw InvalidParameter("distribution JSON must be an object with arrays \"support\" and \"probs\"");
  }
  std::vector<double> s;
  std::vector<double> p;
  try {
    s = j["support"].get<std::vector<double>>();
    p = j["probs"].get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("distribution JSON: ") + e.what());
  }
  return EnergyDistribution(std::move(s), std::move(p));
}

std::string distribution_to_json(const EnergyDistribution& dist) {
  nlohmann::json j;
  j["support"] = dist.support();
  j["probs"] = dist.probs();
  return j.dump();
}

EnergyDistribution load_distribution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open distribution file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return distribution_from_json(buf.str());
}

}  // namespace ehcap
