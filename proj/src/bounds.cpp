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

#include "ehcap/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ehcap/error.hpp"
#include "json.hpp"

namespace ehcap {

namespace {

constexpr double kLn2 = std::numbers::ln2;

double half_log2_1p(double x) { return 0.5 * std::log1p(x) / kLn2; }

// log2(1/(1-p)) without cancellation for small p.
double log2_inv_complement(double p) { return -std::log1p(-p) / kLn2; }

}  // namespace

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter("binary_entropy: p must lie in [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

double bernoulli_gap(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidParameter("bernoulli_gap: p must lie in (0, 1]");
  if (p == 1.0) return 0.0;
  return (1.0 - p) / (2.0 * p) * log2_inv_complement(p);
}

double bernoulli_lower_bound(double p, double battery_cap) {
  if (!(battery_cap > 0.0)) throw InvalidParameter("bernoulli_lower_bound: battery_cap must be positive");
  return half_log2_1p(p * battery_cap) - bernoulli_gap(p);
}

double binquant_gap(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw InvalidParameter("binquant_gap: q must lie in (0, 1]");
  const double w = q == 1.0 ? -1.0 : lambert_w_minus1(-q * std::exp(-1.0));
  return 0.5 * (std::numbers::log2e + std::log2(-w));
}

double genbern_gap(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw InvalidParameter("genbern_gap: q must lie in (0, 1]");
  if (q == 1.0) return std::numeric_limits<double>::infinity();
  return (5.0 - 3.0 * q) / (4.0 * q) * log2_inv_complement(q);
}

double half_log_pi_e_over_2() { return 0.5 * std::log2(std::numbers::pi * std::numbers::e / 2.0); }

Threshold best_threshold(const ClippedDistribution& dist) {
  Threshold best{0.0, 0.0};
  const auto& s = dist.support();
  const auto& p = dist.probs();
  // Walk from the top so the tail mass accumulates in one pass.
  double tail = 0.0;
  for (std::size_t i = s.size(); i-- > 0;) {
    tail += p[i];
    const double value = s[i] * tail;
    if (s[i] > 0.0 && value > best.value) best = {s[i], value};
  }
  return best;
}

BinQuantBound binquant_lower_bound(const ClippedDistribution& dist) {
  const Threshold t = best_threshold(dist);
  BinQuantBound out{};
  out.threshold = t.x;
  out.q_prime = dist.ccdf(t.x);
  out.value = half_log2_1p(t.value) - 1.0 / (2.0 * kLn2);
  out.guarantee = half_log2_1p(dist.mu()) - binquant_gap(dist.q());
  return out;
}

GapBranches online_gap_branches(double q) { return {q, binquant_gap(q), genbern_gap(q)}; }

GapBranches no_csir_gap_branches(double q, double entropy_constant) {
  const double w = q == 1.0 ? -1.0 : lambert_w_minus1(-q * std::exp(-1.0));
  return {q, 0.5 * std::log2(-w) + entropy_constant, genbern_gap(q) + 1.0};
}

std::vector<double> gap_q_grid() {
  constexpr int kLinear = 2048;
  constexpr int kLogEach = 1024;
  constexpr double kLogLow = -12.0;
  const double log_high = std::log10(0.5);
  std::vector<double> grid;
  grid.reserve(kLinear + 2 * kLogEach);
  for (int i = 1; i <= kLinear; ++i) grid.push_back(static_cast<double>(i) / (kLinear + 1));
  for (int i = 0; i < kLogEach; ++i) {
    const double e = kLogLow + (log_high - kLogLow) * i / (kLogEach - 1);
    const double d = std::pow(10.0, e);
    grid.push_back(d);
    grid.push_back(1.0 - d);
  }
  std::sort(grid.begin(), grid.end());
  return grid;
}

GapCertificate combined_online_gap() {
  GapCertificate best{-std::numeric_limits<double>::infinity(), 0.0};
  for (double q : gap_q_grid()) {
    const double v = online_gap_branches(q).envelope();
    if (v > best.value) best = {v, q};
  }
  return best;
}

GapCertificate entropy_branch_constant() {
  const auto f = [](double p) { return bernoulli_gap(p) + binary_entropy(p); };
  constexpr int kGrid = 10000;
  int best_i = 1;
  double best_v = f(1.0 / kGrid);
  for (int i = 2; i < kGrid; ++i) {
    const double v = f(static_cast<double>(i) / kGrid);
    if (v > best_v) {
      best_v = v;
      best_i = i;
    }
  }
  double a = static_cast<double>(best_i - 1) / kGrid;
  double b = static_cast<double>(best_i + 1) / kGrid;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > 1e-12) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = f(x1);
    }
  }
  const double p = 0.5 * (a + b);
  return {std::max(f(p), best_v), p};
}

GapCertificate combined_no_csir_gap() {
  const double k = entropy_branch_constant().value;
  GapCertificate best{-std::numeric_limits<double>::infinity(), 0.0};
  for (double q : gap_q_grid()) {
    const double v = no_csir_gap_branches(q, k).envelope();
    if (v > best.value) best = {v, q};
  }
  return best;
}

namespace {

bool is_bernoulli_law(const ClippedDistribution& dist) {
  for (double v : dist.support()) {
    if (v != 0.0 && v != dist.battery_cap()) return false;
  }
  return true;
}

double clamp0(double x) { return std::max(0.0, x); }

}  // namespace

BoundsReport capacity_intervals(const ClippedDistribution& dist) {
  BoundsReport r;
  r.battery_cap = dist.battery_cap();
  r.mu = dist.mu();
  r.q = dist.q();
  r.sigma2 = dist.sigma2();
  r.upper = half_log2_1p(r.mu);
  r.c_star = c_star(r.q);

  const BinQuantBound bq = binquant_lower_bound(dist);
  r.binquant_lb = bq.value;
  r.binquant_threshold = bq.threshold;
  r.binquant_guarantee = bq.guarantee;
  r.genbern_lb = r.upper - genbern_gap(r.q);
  r.best_lb = std::max(r.binquant_lb, r.genbern_lb);

  // Throughput minus per-symbol entropy of the policy.
  double rate_minus_h = r.genbern_lb - 1.0;
  rate_minus_h = std::max(rate_minus_h, bq.value - binary_entropy(bq.q_prime));

  if (is_bernoulli_law(dist)) {
    const double p = dist.ccdf(dist.battery_cap());
    r.bernoulli_lb = bernoulli_lower_bound(p, dist.battery_cap());
    r.best_lb = std::max(r.best_lb, *r.bernoulli_lb);
    rate_minus_h = std::max(rate_minus_h, *r.bernoulli_lb - binary_entropy(p));
  }
  r.best_lb_minus_entropy = rate_minus_h;

  r.half_log_pi_e_2 = half_log_pi_e_over_2();
  r.online_gap = combined_online_gap().value;
  r.no_csir_gap = combined_no_csir_gap().value;
  r.composite_txrx_gap = r.half_log_pi_e_2 + r.online_gap;
  r.composite_tx_gap = r.half_log_pi_e_2 + r.no_csir_gap;

  r.capacity_interval_tx = {clamp0(r.upper - r.printed_tx_gap), r.upper};
  r.capacity_interval_txrx = {clamp0(r.upper - r.printed_txrx_gap), r.upper};
  r.txrx_from_throughput = {clamp0(r.best_lb - r.half_log_pi_e_2), r.upper};
  r.tx_from_throughput = {clamp0(r.best_lb_minus_entropy - r.half_log_pi_e_2), r.upper};
  return r;
}

Interval mult_capacity_bounds(const ClippedDistribution& dist, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidParameter("mult_capacity_bounds: eta must lie in (0, 1]");
  const BoundsReport r = capacity_intervals(dist);
  return {clamp0(eta * r.best_lb), r.upper};
}

namespace {

nlohmann::json interval_json(const Interval& i) { return nlohmann::json::array({i.low, i.high}); }

Interval interval_from(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

std::string bounds_report_to_json(const BoundsReport& r) {
  nlohmann::json j;
  j["battery_cap"] = r.battery_cap;
  j["mu"] = r.mu;
  j["q"] = r.q;
  j["sigma2"] = r.sigma2;
  j["upper"] = r.upper;
  j["bernoulli_lb"] = r.bernoulli_lb ? nlohmann::json(*r.bernoulli_lb) : nlohmann::json(nullptr);
  j["binquant_lb"] = r.binquant_lb;
  j["binquant_threshold"] = r.binquant_threshold;
  j["binquant_guarantee"] = r.binquant_guarantee;
  j["genbern_lb"] = r.genbern_lb;
  j["c_star"] = r.c_star;
  j["best_lb"] = r.best_lb;
  j["best_lb_minus_entropy"] = r.best_lb_minus_entropy;
  j["capacity_interval_tx"] = interval_json(r.capacity_interval_tx);
  j["capacity_interval_txrx"] = interval_json(r.capacity_interval_txrx);
  j["txrx_from_throughput"] = interval_json(r.txrx_from_throughput);
  j["tx_from_throughput"] = interval_json(r.tx_from_throughput);
  j["half_log_pi_e_2"] = r.half_log_pi_e_2;
  j["online_gap"] = r.online_gap;
  j["no_csir_gap"] = r.no_csir_gap;
  j["composite_txrx_gap"] = r.composite_txrx_gap;
  j["composite_tx_gap"] = r.composite_tx_gap;
  j["printed_txrx_gap"] = r.printed_txrx_gap;
  j["printed_tx_gap"] = r.printed_tx_gap;
  return j.dump();
}

BoundsReport bounds_report_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    BoundsReport r;
    r.battery_cap = j.at("battery_cap").get<double>();
    r.mu = j.at("mu").get<double>();
    r.q = j.at("q").get<double>();
    r.sigma2 = j.at("sigma2").get<double>();
    r.upper = j.at("upper").get<double>();
    if (!j.at("bernoulli_lb").is_null()) r.bernoulli_lb = j.at("bernoulli_lb").get<double>();
    r.binquant_lb = j.at("binquant_lb").get<double>();
    r.binquant_threshold = j.at("binquant_threshold").get<double>();
    r.binquant_guarantee = j.at("binquant_guarantee").get<double>();
    r.genbern_lb = j.at("genbern_lb").get<double>();
    r.c_star = j.at("c_star").get<double>();
    r.best_lb = j.at("best_lb").get<double>();
    r.best_lb_minus_entropy = j.at("best_lb_minus_entropy").get<double>();
    r.capacity_interval_tx = interval_from(j.at("capacity_interval_tx"));
    r.capacity_interval_txrx = interval_from(j.at("capacity_interval_txrx"));
    r.txrx_from_throughput = interval_from(j.at("txrx_from_throughput"));
    r.tx_from_throughput = interval_from(j.at("tx_from_throughput"));
    r.half_log_pi_e_2 = j.at("half_log_pi_e_2").get<double>();
    r.online_gap = j.at("online_gap").get<double>();
    r.no_csir_gap = j.at("no_csir_gap").get<double>();
    r.composite_txrx_gap = j.at("composite_txrx_gap").get<double>();
    r.composite_tx_gap = j.at("composite_tx_gap").get<double>();
    r.printed_txrx_gap = j.at("printed_txrx_gap").get<double>();
    r.printed_tx_gap = j.at("printed_tx_gap").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("bounds_report_from_json: ") + e.what());
  }
}

}  // namespace ehcap
