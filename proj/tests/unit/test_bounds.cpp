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


#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "ehcap/bounds.hpp"
#include "ehcap/error.hpp"
#include "test_support.hpp"

using namespace ehcap;

namespace {

constexpr double kLn2 = std::numbers::ln2;
double half_log2_1p(double x) { return 0.5 * std::log2(1.0 + x); }
double h2(double p) { return p <= 0.0 || p >= 1.0 ? 0.0 : -p * std::log2(p) - (1 - p) * std::log2(1 - p); }

// W_-1(z) by bisection of w e^w - z on [-50, -1], where the map is decreasing.
double w_oracle(double z) {
  return testing::bisect([z](double w) { return w * std::exp(w) - z; }, -50.0, -1.0);
}

// c* from 1 - c = c ln(1 / (q c)) by bisection on (0, 1).
double c_oracle(double q) {
  return testing::bisect([q](double c) { return 1.0 - c - c * std::log(1.0 / (q * c)); }, 1e-300, 1.0 - 1e-16);
}

}  // namespace

TEST_SUITE("bounds") {
  TEST_CASE("lambert W_-1") {
    CHECK(lambert_w_minus1(-1.0 / std::numbers::e) == doctest::Approx(-1.0).epsilon(1e-7));
    const double w = lambert_w_minus1(-0.1);
    CHECK(w < -1.0);
    CHECK(w == doctest::Approx(w_oracle(-0.1)).epsilon(1e-12));
    CHECK(lambert_w_minus1(-1e-6) < -10.0);
    for (int i = 1; i < 2000; ++i) {
      const double z = -std::exp(-1.0) * std::pow(static_cast<double>(i) / 2000.0, 3.0);
      const double v = lambert_w_minus1(z);
      CAPTURE(z);
      CHECK(std::abs(v * std::exp(v) - z) <= 1e-12 * std::abs(z));
      CHECK(v <= -1.0);
    }
    for (double z : {-0.36, -0.3, -0.05, -1e-3, -1e-9}) CHECK(lambert_w_minus1(z) == doctest::Approx(w_oracle(z)).epsilon(1e-11));
    CHECK_THROWS_AS(lambert_w_minus1(0.0), InvalidParameter);
    CHECK_THROWS_AS(lambert_w_minus1(-0.4), InvalidParameter);
    CHECK_THROWS_AS(lambert_w_minus1(0.1), InvalidParameter);
  }

  TEST_CASE("c* examples") {
    CHECK(c_star(1.0) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(c_star(0.5) == doctest::Approx(c_oracle(0.5)).epsilon(1e-10));
    const double tiny = c_star(1e-6);
    CHECK(tiny > 0.0);
    CHECK(tiny < 0.07);
    CHECK(tiny == doctest::Approx(c_oracle(1e-6)).epsilon(1e-9));
    CHECK(std::abs(c_star_identity_residual(1e-6, tiny)) <= 1e-10);
    CHECK_THROWS_AS(c_star(0.0), InvalidParameter);
    CHECK_THROWS_AS(c_star(1.5), InvalidParameter);
  }

  TEST_CASE("c* identity over 1e4 random q") {
    UniformStream u(2024);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double q = std::max(1e-12, u.next());
      const double c = c_star(q);
      worst = std::max(worst, std::abs(1.0 - c - c * std::log(1.0 / (q * c))));
    }
    CHECK(worst <= 1e-10);
  }

  TEST_CASE("bernoulli lower bound") {
    CHECK(bernoulli_lower_bound(0.5, 2.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(bernoulli_gap(1e-9) == doctest::Approx(1.0 / (2.0 * kLn2)).epsilon(1e-6));
    CHECK(bernoulli_lower_bound(1.0, 3.0) == half_log2_1p(3.0));
    for (double p : {0.01, 0.3, 0.77, 0.999}) CHECK(bernoulli_lower_bound(p, 5.0) <= half_log2_1p(p * 5.0));
  }

  TEST_CASE("binary quantization bound") {
    for (std::uint64_t s = 0; s < 200; ++s) {
      const double cap = 0.5 + (s % 7);
      const auto d = clip(testing::random_distribution(s, cap), cap);
      const auto bq = binquant_lower_bound(d);
      CAPTURE(s);
      CHECK(bq.value >= half_log2_1p(c_star(d.q()) * d.mu()) - 1.0 / (2.0 * kLn2) - 1e-12);
      CHECK(bq.q_prime == doctest::Approx(d.ccdf(bq.threshold)));
      CHECK(bq.guarantee == doctest::Approx(half_log2_1p(d.mu()) - binquant_gap(d.q())));
      CHECK(bq.value <= half_log2_1p(d.mu()));
    }
    const auto bern = clip(EnergyDistribution::bernoulli(0.3, 4.0), 4.0);
    CHECK(binquant_lower_bound(bern).value == doctest::Approx(half_log2_1p(0.3 * 4.0) - 1.0 / (2.0 * kLn2)));
    const auto det = clip(EnergyDistribution::deterministic(1.5), 1.5);
    CHECK(binquant_lower_bound(det).threshold == 1.5);
    CHECK(binquant_lower_bound(det).value == doctest::Approx(half_log2_1p(1.5) - 1.0 / (2.0 * kLn2)));
  }

  TEST_CASE("binquant gap is evaluated without overflow") {
    const double q = 1e-300;
    const double g = binquant_gap(q);
    CHECK(std::isfinite(g));
    CHECK(g == doctest::Approx(0.5 * (std::log2(std::numbers::e) - std::log2(c_star(q)))));
  }

  TEST_CASE("generalized bernoulli gap") {
    CHECK(genbern_gap(1e-9) == doctest::Approx(5.0 / (4.0 * kLn2)).epsilon(1e-6));
    CHECK(genbern_gap(0.5) == doctest::Approx(1.75));
    CHECK(genbern_gap(0.01) < genbern_gap(0.99));
    CHECK(genbern_gap(1.0) == std::numeric_limits<double>::infinity());
  }

  TEST_CASE("threshold guarantee over 1e3 random laws") {
    for (std::uint64_t s = 0; s < 1000; ++s) {
      const double cap = 0.25 + 10.0 * UniformStream(s + 77).next();
      const auto d = clip(testing::random_distribution(1000 + s, cap), cap);
      const auto t = best_threshold(d);
      // Exhaustive over the support points.
      double best = 0.0;
      for (double x : d.support()) best = std::max(best, x * d.ccdf(x));
      CAPTURE(s);
      CHECK(t.value == doctest::Approx(best).epsilon(1e-14));
      CHECK(t.value >= c_star(d.q()) * d.mu() * (1.0 - 1e-12));
    }
  }

  TEST_CASE("combined gaps and the entropy branch constant") {
    const auto online = combined_online_gap();
    CHECK(online.value >= 1.79);
    CHECK(online.value <= 1.8044);
    const auto no_csir = combined_no_csir_gap();
    CHECK(no_csir.value >= 2.79);
    CHECK(no_csir.value <= 2.8044);

    // Independent brute-force grid for max_p ((1-p)/(2p)) log2(1/(1-p)) + H2(p).
    double best = 0.0;
    for (int i = 1; i < 200000; ++i) {
      const double p = i / 200000.0;
      best = std::max(best, (1 - p) / (2 * p) * std::log2(1 / (1 - p)) + h2(p));
    }
    CHECK(entropy_branch_constant().value == doctest::Approx(best).epsilon(1e-4));
    CHECK(entropy_branch_constant().value == doctest::Approx(1.5242).epsilon(1e-3));

    const auto at1 = online_gap_branches(1.0);
    CHECK(at1.first == doctest::Approx(0.5 * std::log2(std::numbers::e)));
    CHECK(at1.envelope() == doctest::Approx(0.5 * std::log2(std::numbers::e)));
    CHECK(binary_entropy(0.5) == 1.0);
    for (double q : gap_q_grid()) {
      const auto b = online_gap_branches(q);
      CHECK(b.envelope() <= b.first);
      CHECK(b.envelope() <= b.second);
      CHECK(b.envelope() <= online.value);
    }
    CHECK(gap_q_grid().size() == 4096);
  }

  TEST_CASE("capacity intervals") {
    const double lpe = 0.5 * std::log2(std::numbers::pi * std::numbers::e / 2.0);
    CHECK(half_log_pi_e_over_2() == doctest::Approx(lpe).epsilon(1e-15));
    CHECK(half_log_pi_e_over_2() == doctest::Approx(1.0471).epsilon(1e-4));
    for (std::uint64_t s = 0; s < 100; ++s) {
      const double cap = 0.5 + (s % 9);
      const auto d = clip(testing::random_distribution(5000 + s, cap), cap);
      const auto r = capacity_intervals(d);
      CAPTURE(s);
      CHECK(r.upper == doctest::Approx(half_log2_1p(d.mu())));
      CHECK(r.binquant_lb <= r.upper);
      CHECK(r.genbern_lb <= r.upper);
      if (r.bernoulli_lb) CHECK(*r.bernoulli_lb <= r.upper);
      CHECK(r.best_lb >= r.upper - 1.8034);
      CHECK(r.capacity_interval_tx.high - r.capacity_interval_tx.low <= 3.85 + 1e-9);
      CHECK(r.capacity_interval_txrx.high - r.capacity_interval_txrx.low <= 2.85 + 1e-9);
      CHECK(r.capacity_interval_tx.low >= 0.0);
      CHECK(r.txrx_from_throughput.low <= r.txrx_from_throughput.high);
      CHECK(r.tx_from_throughput.low <= r.txrx_from_throughput.low);
    }
    const auto r = capacity_intervals(clip(EnergyDistribution::bernoulli(0.5, 4.0), 4.0));
    CHECK(r.bernoulli_lb.has_value());
    CHECK(r.composite_txrx_gap == doctest::Approx(lpe + r.online_gap));
    CHECK(r.composite_txrx_gap <= 2.8534);
    CHECK(r.composite_tx_gap == doctest::Approx(lpe + r.no_csir_gap));
    CHECK_FALSE(capacity_intervals(clip(EnergyDistribution({0, 1, 4}, {0.2, 0.4, 0.4}), 4.0)).bernoulli_lb);
  }

  TEST_CASE("small-mu intervals clamp at zero") {
    const auto d = clip(EnergyDistribution::bernoulli(1e-9, 1.0), 1.0);
    const auto r = capacity_intervals(d);
    CHECK(r.capacity_interval_tx.low == 0.0);
    CHECK(r.capacity_interval_txrx.low == 0.0);
    CHECK(r.upper == doctest::Approx(0.0).epsilon(1e-8));
  }

  TEST_CASE("multiplicative bounds") {
    const auto d = clip(EnergyDistribution::deterministic(3.0), 3.0);
    const auto r = capacity_intervals(d);
    const auto m = mult_capacity_bounds(d, 0.7473);
    CHECK(m.low == doctest::Approx(0.7473 * r.best_lb));
    CHECK(m.high == doctest::Approx(1.0));
    const auto one = mult_capacity_bounds(d, 1.0);
    CHECK(one.low == doctest::Approx(r.best_lb));
    CHECK(one.low <= one.high);
    CHECK_THROWS_AS(mult_capacity_bounds(d, 0.0), InvalidParameter);
    CHECK_THROWS_AS(mult_capacity_bounds(d, 1.2), InvalidParameter);
  }

  TEST_CASE("bounds report JSON round trip") {
    for (const auto& law : {EnergyDistribution::bernoulli(0.3, 4.0), EnergyDistribution({0, 1, 3}, {0.3, 0.5, 0.2})}) {
      const auto r = capacity_intervals(clip(law, 2.0 + law.mean()));
      const auto text = bounds_report_to_json(r);
      const auto back = bounds_report_from_json(text);
      CHECK(bounds_report_to_json(back) == text);
      CHECK(back.bernoulli_lb.has_value() == r.bernoulli_lb.has_value());
      CHECK(back.best_lb == r.best_lb);
    }
    CHECK_THROWS_AS(bounds_report_from_json("{\"mu\": 1}"), InvalidParameter);
  }
}
