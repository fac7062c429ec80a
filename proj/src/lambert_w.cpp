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
#include <limits>

#include "ehcap/bounds.hpp"
#include "ehcap/error.hpp"

namespace ehcap {

namespace {

constexpr double kE = 2.718281828459045235360287;

double initial_guess(double z) {
  const double branch_distance = 1.0 + kE * z;
  if (branch_distance < 0.3) {
    // Series about the branch point, lower branch takes the negative root.
    const double p = -std::sqrt(2.0 * std::max(branch_distance, 0.0));
    return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  }
  const double l1 = std::log(-z);
  const double l2 = std::log(-l1);
  return l1 - l2 + l2 / l1;
}

}  // namespace

double lambert_w_minus1(double z) {
  const double branch = -std::exp(-1.0);
  if (!(z >= branch && z < 0.0)) throw InvalidParameter("lambert_w_minus1: z must lie in [-1/e, 0)");
  if (z == branch) return -1.0;

  double w = initial_guess(z);
  for (int it = 0; it < 64; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - z;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double fp = ew * wp1;
    const double step = f / (fp - (w + 2.0) * f / (2.0 * wp1));
    double next = w - step;
    if (next > -1.0) next = 0.5 * (w - 1.0);  // stay on the lower branch
    const bool done = std::abs(next - w) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(w);
    w = next;
    if (done) break;
  }
  return w;
}

double c_star(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw InvalidParameter("c_star: q must lie in (0, 1]");
  if (q == 1.0) return 1.0;
  return -1.0 / lambert_w_minus1(-q * std::exp(-1.0));
}

double c_star_identity_residual(double q, double c) { return 1.0 - c - c * std::log(1.0 / (q * c)); }

}  // namespace ehcap
