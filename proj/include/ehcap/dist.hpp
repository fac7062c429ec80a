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
#include <span>
#include <string>
#include <vector>

namespace ehcap {

/// Finite discrete law of the i.i.d. energy arrivals.
///
/// Support values are non-negative and strictly increasing; duplicates are
/// merged and masses below 1e-15 are dropped (with renormalization) at
/// construction. At least one positive value must carry positive mass.
class EnergyDistribution {
 public:
  EnergyDistribution(std::vector<double> support, std::vector<double> probs);

  static EnergyDistribution deterministic(double value);
  /// {0, level} with Pr{level} = p.
  static EnergyDistribution bernoulli(double p, double level);

  const std::vector<double>& support() const noexcept { return support_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return support_.size(); }

  double mean() const;
  double variance() const;

  friend bool operator==(const EnergyDistribution&, const EnergyDistribution&) = default;

 private:
  std::vector<double> support_;
  std::vector<double> probs_;
};

/// Law of min{E, battery_cap}. The mass of every base atom at or above the
/// cap is collected in a point mass at the cap.
class ClippedDistribution {
 public:
  ClippedDistribution(EnergyDistribution base, double battery_cap);

  const EnergyDistribution& base() const noexcept { return base_; }
  /// The clipped law itself.
  const EnergyDistribution& law() const noexcept { return law_; }
  const std::vector<double>& support() const noexcept { return law_.support(); }
  const std::vector<double>& probs() const noexcept { return law_.probs(); }

  double battery_cap() const noexcept { return battery_cap_; }
  double mu() const noexcept { return mu_; }
  double sigma2() const noexcept { return sigma2_; }
  /// mu / battery_cap, in (0, 1].
  double q() const noexcept { return mu_ / battery_cap_; }

  /// Pr{E~ >= x} for x in [0, battery_cap].
  double ccdf(double x) const;

  /// E[exp(-theta E~)].
  double laplace(double theta) const;

  /// Index-space inverse CDF; `u` in [0, 1).
  double quantile(double u) const;

  /// i.i.d. draws; the same seed always yields the same sequence.
  std::vector<double> sample(std::uint64_t seed, std::size_t n) const;

 private:
  EnergyDistribution base_;
  EnergyDistribution law_;
  double battery_cap_;
  double mu_;
  double sigma2_;
  std::vector<double> cdf_;
};

ClippedDistribution clip(const EnergyDistribution& dist, double battery_cap);

/// Free-function form of ClippedDistribution::ccdf.
double ccdf(const ClippedDistribution& dist, double x);

EnergyDistribution distribution_from_json(const std::string& text);
std::string distribution_to_json(const EnergyDistribution& dist);
EnergyDistribution load_distribution(const std::string& path);

}  // namespace ehcap
