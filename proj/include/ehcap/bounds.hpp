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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ehcap/dist.hpp"

namespace ehcap {

/// Lower branch W_{-1} of the Lambert W function on [-1/e, 0).
///
/// Halley iteration from the asymptotic guess ln(-z) - ln(-ln(-z)), or from
/// the branch-point series when z is close to -1/e. The returned w <= -1
/// satisfies |w e^w - z| <= 1e-12 |z|.
double lambert_w_minus1(double z);

/// c*(q) = -1 / W_{-1}(-q/e), the fraction of the mean that some threshold
/// x always captures: max_x x Pr{E~ >= x} >= c*(q) mu.
double c_star(double q);

/// 1 - c - c ln(1/(q c)); zero at c = c*(q).
double c_star_identity_residual(double q, double c);

/// Binary entropy in bits.
double binary_entropy(double p);

/// ((1-p)/(2p)) log2(1/(1-p)); tends to 1/(2 ln 2) as p -> 0 and to 0 at p = 1.
double bernoulli_gap(double p);

/// 1/2 log2(1 + p B) - bernoulli_gap(p).
double bernoulli_lower_bound(double p, double battery_cap);

/// 1/2 log2(e / c*(q)), evaluated as 1/2 (log2 e + log2(-W)).
double binquant_gap(double q);

/// ((5 - 3q)/(4q)) log2(1/(1-q)); +infinity at q = 1.
double genbern_gap(double q);

/// 1/2 log2(pi e / 2).
double half_log_pi_e_over_2();

struct Threshold {
  double x;
  double value;  // x * Pr{E~ >= x}
};

/// Exact maximizer of x Pr{E~ >= x}; the search runs over support points since
/// the ccdf is a left-continuous step function.
Threshold best_threshold(const ClippedDistribution& dist);

struct BinQuantBound {
  double value;      // max_x 1/2 log2(1 + x F(x)) - 1/(2 ln 2)
  double threshold;  // maximizing x
  double q_prime;    // F(threshold)
  double guarantee;  // 1/2 log2(1 + mu) - binquant_gap(q)
};

BinQuantBound binquant_lower_bound(const ClippedDistribution& dist);

/// Both branches of the max-min gap at a given q.
struct GapBranches {
  double q;
  double first;   // binary quantization branch
  double second;  // generalized Bernoulli branch
  double envelope() const { return first < second ? first : second; }
};

GapBranches online_gap_branches(double q);
GapBranches no_csir_gap_branches(double q, double entropy_constant);

/// 2048 linear points in (0, 1) plus 1024 log-spaced points towards each end.
std::vector<double> gap_q_grid();

struct GapCertificate {
  double value;
  double argmax;
};

/// max over the q-grid of the online gap envelope.
GapCertificate combined_online_gap();

/// max_p [bernoulli_gap(p) + H2(p)], by grid search then golden section.
GapCertificate entropy_branch_constant();

/// max over the q-grid of the no-CSIR gap envelope, using the re-derived
/// entropy branch constant.
GapCertificate combined_no_csir_gap();

struct Interval {
  double low;
  double high;
};

struct BoundsReport {
  double battery_cap = 0;
  double mu = 0;
  double q = 0;
  double sigma2 = 0;
  double upper = 0;                       // 1/2 log2(1 + mu)
  std::optional<double> bernoulli_lb;     // only for {0, cap} laws
  double binquant_lb = 0;
  double binquant_threshold = 0;
  double binquant_guarantee = 0;
  double genbern_lb = 0;
  double c_star = 0;
  double best_lb = 0;                     // best analytic throughput lower bound
  double best_lb_minus_entropy = 0;       // best analytic bound on T - H/n
  Interval capacity_interval_tx{};        // printed-constant interval, causal Tx
  Interval capacity_interval_txrx{};      // printed-constant interval, Tx and Rx
  Interval txrx_from_throughput{};        // [best_lb - 1/2 log2(pi e/2), upper]
  Interval tx_from_throughput{};          // [best_lb_minus_entropy - 1/2 log2(pi e/2), upper]
  double half_log_pi_e_2 = 0;
  double online_gap = 0;
  double no_csir_gap = 0;
  double composite_txrx_gap = 0;          // half_log_pi_e_2 + online_gap
  double composite_tx_gap = 0;            // half_log_pi_e_2 + no_csir_gap
  double printed_txrx_gap = 2.85;
  double printed_tx_gap = 3.85;
};

BoundsReport capacity_intervals(const ClippedDistribution& dist);

std::string bounds_report_to_json(const BoundsReport& r);
BoundsReport bounds_report_from_json(const std::string& text);

/// [eta * best_lb, 1/2 log2(1 + mu)] for the channels with receiver-side
/// arrival information.
Interval mult_capacity_bounds(const ClippedDistribution& dist, double eta);

}  // namespace ehcap
