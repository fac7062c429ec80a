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


#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "ehcap/dist.hpp"
#include "ehcap/error.hpp"
#include "test_support.hpp"

using namespace ehcap;

TEST_SUITE("dist") {
  TEST_CASE("clip examples") {
    auto a = clip(EnergyDistribution({0, 2}, {0.5, 0.5}), 2.0);
    CHECK(a.mu() == doctest::Approx(1.0));
    CHECK(a.q() == doctest::Approx(0.5));

    auto b = clip(EnergyDistribution({0, 3}, {0.5, 0.5}), 2.0);
    CHECK(b.support() == std::vector<double>{0.0, 2.0});
    CHECK(b.mu() == doctest::Approx(1.0));
    CHECK(b.q() == doctest::Approx(0.5));

    auto c = clip(EnergyDistribution::deterministic(1.0), 2.0);
    CHECK(c.mu() == 1.0);
    CHECK(c.sigma2() == 0.0);
    CHECK(c.q() == 0.5);
  }

  TEST_CASE("clip merges the overflow into one atom at the cap") {
    auto d = clip(EnergyDistribution({0, 1, 3, 5}, {0.1, 0.2, 0.3, 0.4}), 2.0);
    CHECK(d.support() == std::vector<double>{0.0, 1.0, 2.0});
    CHECK(d.probs()[2] == doctest::Approx(0.7));
    CHECK(d.mu() == doctest::Approx(0.2 + 1.4));
  }

  TEST_CASE("construction rejects bad laws") {
    CHECK_THROWS_AS(EnergyDistribution({0, 1}, {0.5, 0.6}), InvalidParameter);
    CHECK_THROWS_AS(EnergyDistribution({-1, 1}, {0.5, 0.5}), InvalidParameter);
    CHECK_THROWS_AS(EnergyDistribution({0}, {1.0}), InvalidParameter);
    CHECK_THROWS_AS(EnergyDistribution({}, {}), InvalidParameter);
    CHECK_THROWS_AS(EnergyDistribution({0, 1}, {1.0}), InvalidParameter);
    CHECK_THROWS_AS(clip(EnergyDistribution::deterministic(1.0), 0.0), InvalidParameter);
    CHECK_THROWS_AS(clip(EnergyDistribution::deterministic(1.0), -2.0), InvalidParameter);
  }

  TEST_CASE("duplicates merge and support is sorted") {
    EnergyDistribution d({2, 0, 2}, {0.25, 0.5, 0.25});
    CHECK(d.support() == std::vector<double>{0.0, 2.0});
    CHECK(d.probs()[1] == doctest::Approx(0.5));
  }

  TEST_CASE("negligible masses are dropped") {
    EnergyDistribution d({0, 1, 2}, {0.5, 1e-17, 0.5 - 1e-17});
    CHECK(d.size() == 2);
    CHECK(std::accumulate(d.probs().begin(), d.probs().end(), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("ccdf examples") {
    auto bern = clip(EnergyDistribution::bernoulli(0.3, 4.0), 4.0);
    CHECK(bern.ccdf(0.0) == 1.0);
    CHECK(bern.ccdf(4.0) == doctest::Approx(0.3));
    auto d = clip(EnergyDistribution({0, 1, 2}, {0.2, 0.5, 0.3}), 2.0);
    CHECK(d.ccdf(1.0) == doctest::Approx(0.8));
    CHECK(d.ccdf(0.5) == doctest::Approx(0.8));
    CHECK(ccdf(d, 2.0) == doctest::Approx(0.3));
    CHECK_THROWS_AS(d.ccdf(-0.1), InvalidParameter);
    CHECK_THROWS_AS(d.ccdf(2.1), InvalidParameter);
  }

  TEST_CASE("sampling") {
    auto det = clip(EnergyDistribution::deterministic(1.0), 2.0);
    CHECK(det.sample(7, 3) == std::vector<double>{1.0, 1.0, 1.0});

    auto bern = clip(EnergyDistribution({0, 2}, {0.5, 0.5}), 2.0);
    const std::size_t n = 1000000;
    const auto xs = bern.sample(11, n);
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    CHECK(std::abs(mean - 1.0) <= 3.0 * std::sqrt(bern.sigma2() / n));

    CHECK(bern.sample(5, 1000) == bern.sample(5, 1000));
    CHECK(bern.sample(5, 1000) != bern.sample(6, 1000));
  }

  TEST_CASE("empirical frequencies follow the masses") {
    auto d = clip(EnergyDistribution({0, 1, 2}, {0.2, 0.5, 0.3}), 2.0);
    const std::size_t n = 200000;
    const auto xs = d.sample(3, n);
    for (std::size_t k = 0; k < d.support().size(); ++k) {
      const double f = static_cast<double>(std::count(xs.begin(), xs.end(), d.support()[k])) / n;
      const double p = d.probs()[k];
      CHECK(std::abs(f - p) <= 4.0 * std::sqrt(p * (1 - p) / n));
    }
  }

  TEST_CASE("properties over random laws") {
    for (std::uint64_t s = 0; s < 500; ++s) {
      const double cap = 0.5 + 8.0 * UniformStream(s).next();
      const auto base = testing::random_distribution(s, cap);
      const auto d = clip(base, cap);
      CAPTURE(s);
      // Idempotent.
      const auto again = clip(d.law(), cap);
      CHECK(again.law() == d.law());
      CHECK(again.mu() == d.mu());
      // mu is the integral of the ccdf, summed over support intervals.
      double integral = 0.0;
      double prev = 0.0;
      for (double x : d.support()) {
        if (x > prev) integral += (x - prev) * d.ccdf(x);
        prev = x;
      }
      CHECK(integral == doctest::Approx(d.mu()).epsilon(1e-12));
      // Bhatia-Davis and the range of q.
      CHECK(d.sigma2() <= d.mu() * (cap - d.mu()) + 1e-12);
      CHECK(d.q() > 0.0);
      CHECK(d.q() <= 1.0);
      for (double x : d.support()) {
        CHECK(x >= 0.0);
        CHECK(x <= cap);
      }
    }
  }

  TEST_CASE("JSON round trip") {
    EnergyDistribution d({0, 0.5, 3}, {0.2, 0.3, 0.5});
    CHECK(distribution_from_json(distribution_to_json(d)) == d);
    CHECK_THROWS_AS(distribution_from_json("{\"support\": [1]}"), InvalidParameter);
    CHECK_THROWS_AS(distribution_from_json("not json"), InvalidParameter);
    CHECK_THROWS_AS(load_distribution("/nonexistent/file.json"), InvalidParameter);
  }
}
