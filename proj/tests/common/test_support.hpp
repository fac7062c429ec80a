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

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "ehcap/dist.hpp"
#include "ehcap/rng.hpp"

namespace ehcap::testing {

/// 2 to 5 atoms on [0, 1.5 cap] with random masses; some mass lands above
/// the cap so clipping is exercised. Deterministic in `seed`.
inline EnergyDistribution random_distribution(std::uint64_t seed, double cap) {
  UniformStream u(stream_seed(seed, 0xd157));
  const int atoms = 2 + static_cast<int>(u.next() * 4.0);
  std::vector<double> support;
  std::vector<double> probs;
  double total = 0.0;
  for (int k = 0; k < atoms; ++k) {
    // Quarter-grid values so duplicates merge now and then.
    support.push_back(std::round(u.next() * 1.5 * cap * 4.0) / 4.0);
    probs.push_back(0.05 + u.next());
    total += probs.back();
  }
  support.push_back(cap * (0.25 + 0.75 * u.next()));  // guarantees a positive atom
  probs.push_back(0.2 + u.next());
  total += probs.back();
  for (double& p : probs) p /= total;
  return EnergyDistribution(support, probs);
}

/// Composite Simpson on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  if (panels % 2 != 0) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// Plain bisection for a sign change of f on [lo, hi].
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace ehcap::testing
