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

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ehcap/error.hpp"

namespace ehcap {

/// Gaussian tail Pr{N > x} for N ~ N(0, 1).
double q_function(double x);

/// I(X; X + N) in bits for a finite input law and unit-variance noise:
/// h(Y) - 1/2 log2(2 pi e), with h(Y) by adaptive Gauss-Kronrod quadrature of
/// the mixture density over [min - 8, max + 8].
double gaussian_mi_discrete(std::span<const double> support, std::span<const double> probs);

/// Information density i(x) = D(N(x, 1) || P_Y) in bits, by adaptive
/// quadrature; the KKT test of an input law compares it with the capacity.
double information_density(std::span<const double> support, std::span<const double> probs, double x);

/// Equiprobable input +-sqrt(S).
double binary_input_mi(double S);

/// C_bin(S) / (S / (2 ln 2)); tends to 1 as S -> 0.
double binary_ratio(double S);

/// Uniform input on [-sqrt(S), sqrt(S)]; the output density
/// (Q(y - a) - Q(y + a)) / (2a) is integrated adaptively.
double uniform_input_mi(double S);

/// 1/2 log2(1 + 2 S / (pi e)).
double epi_lower_bound(double S);

/// 1/2 log2(1 + S) - 1/2 log2(pi e / 2).
double epi_additive_lower_bound(double S);

/// Capacity-achieving input for |X| <= sqrt(S).
struct SmithSolution {
  double amplitude_sq = 0.0;
  double capacity = 0.0;        // I(X; X + N) of the returned law, bits
  double kkt_slack = 0.0;       // max_x i(x) - capacity over [-sqrt(S), sqrt(S)]
  std::vector<double> support;  // symmetric, increasing
  std::vector<double> probs;
  int insertions = 0;
};

/// Carries the best iterate reached before giving up.
class SmithNonConvergence : public ConvergenceFailure {
 public:
  SmithNonConvergence(const std::string& what, SmithSolution best)
      : ConvergenceFailure(what, best.kkt_slack), best_(std::move(best)) {}

  const SmithSolution& best() const noexcept { return best_; }

 private:
  SmithSolution best_;
};

struct SmithOptions {
  double tol = 1e-6;            // KKT slack target, bits
  int max_insertions = 200;
  /// Optional starting law (for example the solution at a nearby S); its
  /// points are rescaled to the new amplitude.
  const SmithSolution* warm_start = nullptr;
};

/// Cutting-plane form of Smith's algorithm. The probabilities on a fixed
/// symmetric support are solved by Blahut-Arimoto; interior points are then
/// moved to the local maxima of i(x), and the global maximizer of i(x) is
/// inserted while the KKT slack exceeds `tol`.
///
/// Throws SmithNonConvergence after max_insertions insertions.
SmithSolution smith_capacity(double S, const SmithOptions& options = {});
SmithSolution smith_capacity(double S, double tol);

struct RegionReport {
  int region = 0;
  double s_low = 0.0;
  double s_high = 0.0;
  double value = 0.0;  // certified lower bound on C_Smith(S) / (1/2 log2(1 + S)) in the region
  double argmin_s = 0.0;
  std::string method;
};

struct EtaCurvePoint {
  double S;
  double smith;
  double epi;
  double upper;
  double ratio;
};

struct EtaOptions {
  int region2_points = 1500;  // log-spaced in [0.5, 170]
  double region2_low = 0.5;
  double boundary_12 = 0.69;
  double boundary_23 = 170.0;
  double boundary_34 = 195.0;
  double boundary_45 = 340.0;
  double region4_step = 0.5;
  double smith_tol = 1e-6;
};

struct EtaReport {
  double eta = 0.0;
  int argmin_region = 0;
  double trivial_bound = 0.0;  // 2 / (pi e)
  std::array<RegionReport, 5> regions{};
  bool region1_monotone = false;
  double max_kkt_slack = 0.0;
  std::vector<EtaCurvePoint> curve;
};

/// Five-region numerical lower bound on inf_S C_Smith(S) / (1/2 log2(1 + S)).
EtaReport verify_eta(const EtaOptions& options = {});

std::string smith_to_json(const SmithSolution& s);
SmithSolution smith_from_json(const std::string& text);
std::string eta_report_to_json(const EtaReport& r);
/// Columns S, smith, epi, upper, ratio.
std::string eta_curve_csv(const EtaReport& r);

}  // namespace ehcap
