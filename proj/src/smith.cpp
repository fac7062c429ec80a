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

#include "ehcap/smith.hpp"

#include <algorithm>
#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "ehcap/parallel.hpp"
#include "json.hpp"

namespace ehcap {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
constexpr double kLogSqrt2Pi = 0.918938533204672741780329736406;
const double kHalfLog2TwoPiE = 0.5 * std::log2(2.0 * std::numbers::pi * std::numbers::e);

constexpr double kAdaptiveTol = 1e-12;
constexpr double kTailSpan = 8.0;

double phi(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// Adaptive Gauss-Kronrod over [a, b], split into unit-length pieces so every
// bump of a mixture density is seen by the error estimator.
template <typename F>
double integrate(F&& f, double a, double b) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const int pieces = std::max(1, static_cast<int>(std::ceil(b - a)));
  const double h = (b - a) / pieces;
  double sum = 0.0;
  for (int i = 0; i < pieces; ++i) sum += GK::integrate(f, a + i * h, a + (i + 1) * h, 15, kAdaptiveTol);
  return sum;
}

// log2 of sum_k p_k phi(y - s_k), stable far from every atom.
double log2_mixture(std::span<const double> support, std::span<const double> probs, double y) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (probs[k] > 0.0) top = std::max(top, -0.5 * (y - support[k]) * (y - support[k]));
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (probs[k] > 0.0) acc += probs[k] * std::exp(-0.5 * (y - support[k]) * (y - support[k]) - top);
  }
  return (std::log(acc) + top - kLogSqrt2Pi) / kLn2;
}

void check_law(std::span<const double> support, std::span<const double> probs) {
  if (support.empty() || support.size() != probs.size()) {
    throw InvalidParameter("input law: support and probs must be non-empty and of equal length");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (!(probs[k] >= 0.0) || !std::isfinite(support[k])) throw InvalidParameter("input law: invalid entry");
    total += probs[k];
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidParameter("input law: probabilities must sum to 1");
}

}  // namespace

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double gaussian_mi_discrete(std::span<const double> support, std::span<const double> probs) {
  check_law(support, probs);
  const auto [lo, hi] = std::minmax_element(support.begin(), support.end());
  const auto integrand = [&](double y) {
    const double l = log2_mixture(support, probs, y);
    return -std::exp2(l) * l;
  };
  const double h = integrate(integrand, *lo - kTailSpan, *hi + kTailSpan);
  return h - kHalfLog2TwoPiE;
}

double information_density(std::span<const double> support, std::span<const double> probs, double x) {
  check_law(support, probs);
  const auto integrand = [&](double y) { return phi(y - x) * log2_mixture(support, probs, y); };
  return -kHalfLog2TwoPiE - integrate(integrand, x - 10.0, x + 10.0);
}

double binary_input_mi(double S) {
  if (!(S >= 0.0)) throw InvalidParameter("binary_input_mi: S must be non-negative");
  if (S == 0.0) return 0.0;
  const double a = std::sqrt(S);
  const std::array<double, 2> support{-a, a};
  const std::array<double, 2> probs{0.5, 0.5};
  return gaussian_mi_discrete(support, probs);
}

double binary_ratio(double S) {
  if (!(S > 0.0)) throw InvalidParameter("binary_ratio: S must be positive");
  return binary_input_mi(S) / (S / (2.0 * kLn2));
}

double uniform_input_mi(double S) {
  if (!(S > 0.0)) throw InvalidParameter("uniform_input_mi: S must be positive");
  const double a = std::sqrt(S);
  // Pr{-a <= y - N <= a}, written to avoid subtracting nearly equal tails.
  const auto strip = [a](double y) {
    const double u = std::abs(y);
    if (u < a) return 1.0 - q_function(a - u) - q_function(a + u);
    return q_function(u - a) - q_function(u + a);
  };
  const auto integrand = [&](double y) {
    const double f = strip(y) / (2.0 * a);
    return f > 1e-300 ? -f * std::log2(f) : 0.0;
  };
  const double h = 2.0 * integrate(integrand, 0.0, a + 10.0);
  return h - kHalfLog2TwoPiE;
}

double epi_lower_bound(double S) {
  if (!(S >= 0.0)) throw InvalidParameter("epi_lower_bound: S must be non-negative");
  return 0.5 * std::log2(1.0 + 2.0 * S / (std::numbers::pi * std::numbers::e));
}

double epi_additive_lower_bound(double S) {
  if (!(S >= 0.0)) throw InvalidParameter("epi_additive_lower_bound: S must be non-negative");
  return 0.5 * std::log2(1.0 + S) - 0.5 * std::log2(std::numbers::pi * std::numbers::e / 2.0);
}

namespace {

// Symmetric input law on [-A, A] represented by its non-negative half: a
// point a > 0 stands for the pair +-a with total mass w, a = 0 for one atom.
// Output integrals run over y >= 0 on a fixed composite Gauss-Legendre grid.
class SmithSolver {
 public:
  SmithSolver(double S, const SmithOptions& opt) : S_(S), A_(std::sqrt(S)), opt_(opt) {
    using GL = boost::math::quadrature::gauss<double, 20>;
    constexpr double kPanel = 0.5;
    const double y_max = A_ + 10.0;
    const int panels = static_cast<int>(std::ceil(y_max / kPanel));
    const double h = y_max / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = (p + 0.5) * h;
      for (std::size_t i = 0; i < GL::abscissa().size(); ++i) {
        for (double sign : {-1.0, 1.0}) {
          nodes_.push_back(mid + sign * 0.5 * h * GL::abscissa()[i]);
          // Doubled: the even integrand is integrated over y >= 0 only.
          node_w_.push_back(h * GL::weights()[i]);
        }
      }
    }
    log2f_.resize(nodes_.size());

    if (opt.warm_start != nullptr && opt.warm_start->amplitude_sq > 0.0) {
      const double scale = A_ / std::sqrt(opt.warm_start->amplitude_sq);
      for (std::size_t k = 0; k < opt.warm_start->support.size(); ++k) {
        const double x = opt.warm_start->support[k] * scale;
        if (x < 0.0) continue;
        points_.push_back(std::min(x, A_));
        weights_.push_back(x == 0.0 ? opt.warm_start->probs[k] : 2.0 * opt.warm_start->probs[k]);
      }
      if (!points_.empty()) points_.back() = A_;
    }
    if (points_.empty()) {
      points_ = {A_};
      weights_ = {1.0};
    }
    normalize();
  }

  SmithSolution solve() {
    double slack = std::numeric_limits<double>::infinity();
    int stalls = 0;
    int splits = 0;
    int repeats = 0;
    double last_insert = -1.0;
    int relocations = 0;
    for (;;) {
      optimize();
      // An atom at 0 cannot move on its own (its gradient vanishes by
      // symmetry); split it into a pair when i(x) curves upward there.
      if (points_.front() == 0.0 && points_.size() > 1 && splits < 20 &&
          density_info_derivs(0.0).second > 0.0) {
        ++splits;
        points_.front() = std::min(0.05, 0.25 * points_[1]);
        continue;
      }
      const auto [x_star, i_star] = global_max();
      slack = std::max(0.0, i_star - info_);
      if (slack <= opt_.tol) return result(slack);
      if (distance_to_support(x_star) < 1e-4) {
        if (++stalls > 3) break;
        continue;
      }
      if (insertions_ >= opt_.max_insertions) break;
      ++insertions_;
      // A violator that keeps coming back means the inserted atom is
      // absorbed again; the better layout has the nearest atom relocated
      // (typically the atom at 0 opening into a pair), so move it there.
      repeats = std::abs(x_star - last_insert) < 1e-3 ? repeats + 1 : 0;
      last_insert = x_star;
      if (repeats >= 2 && relocations < 10) {
        ++relocations;
        repeats = 0;
        std::size_t nearest = 0;
        for (std::size_t k = 1; k < points_.size(); ++k) {
          if (std::abs(points_[k] - x_star) < std::abs(points_[nearest] - x_star)) nearest = k;
        }
        if (points_[nearest] < A_) {
          points_[nearest] = x_star;
          sort_points();
          continue;
        }
      }
      insert(x_star);
    }
    throw SmithNonConvergence("smith_capacity: KKT slack above tolerance", result(slack));
  }

 private:
  double sym_phi(double a, double y) const { return 0.5 * (phi(y - a) + phi(y + a)); }

  void normalize() {
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    for (double& w : weights_) w /= total;
  }

  void sort_points() {
    std::vector<std::size_t> order(points_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return points_[i] < points_[j]; });
    std::vector<double> p;
    std::vector<double> w;
    for (auto i : order) {
      p.push_back(points_[i]);
      w.push_back(weights_[i]);
    }
    points_ = std::move(p);
    weights_ = std::move(w);
  }

  // h(Y) - 1/2 log2(2 pi e) for a candidate law; also refreshes log2f_ when
  // `commit` is set.
  double mutual_info(const std::vector<double>& pts, const std::vector<double>& wts, bool commit) {
    double h = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
      double f = 0.0;
      for (std::size_t k = 0; k < pts.size(); ++k) f += wts[k] * sym_phi(pts[k], nodes_[j]);
      const double l = std::log2(std::max(f, 1e-300));
      if (commit) log2f_[j] = l;
      h -= node_w_[j] * f * l;
    }
    return h - kHalfLog2TwoPiE;
  }

  void refresh() { info_ = mutual_info(points_, weights_, true); }

  // i(a) with the current output density.
  double density_info(double a) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) acc += node_w_[j] * sym_phi(a, nodes_[j]) * log2f_[j];
    return -kHalfLog2TwoPiE - acc;
  }

  // i'(a) and i''(a) with the density held fixed.
  std::pair<double, double> density_info_derivs(double a) const {
    double d1 = 0.0;
    double d2 = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
      const double y = nodes_[j];
      const double pm = phi(y - a);
      const double pp = phi(y + a);
      d1 += node_w_[j] * 0.5 * ((y - a) * pm - (y + a) * pp) * log2f_[j];
      d2 += node_w_[j] * 0.5 * (((y - a) * (y - a) - 1.0) * pm + ((y + a) * (y + a) - 1.0) * pp) * log2f_[j];
    }
    return {-d1, -d2};
  }

  // A few multiplicative Blahut-Arimoto updates of the weights.
  void blahut_arimoto(int iterations) {
    std::vector<double> dens(points_.size());
    for (int it = 0; it < iterations; ++it) {
      refresh();
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < points_.size(); ++k) {
        dens[k] = density_info(points_[k]);
        top = std::max(top, dens[k]);
      }
      for (std::size_t k = 0; k < points_.size(); ++k) weights_[k] *= std::exp2(dens[k] - top);
      normalize();
    }
    refresh();
  }

  // Newton ascent on the weights alone with the positions frozen; the
  // problem is concave there. Each quadratic model is maximized over the
  // simplex by pinning to zero the weights that the step would make
  // negative. Returns false when no progress is possible.
  bool solve_weights() {
    bool progress = false;
    for (int it = 0; it < 50; ++it) {
      const std::size_t n = points_.size();
      const std::size_t M = nodes_.size();
      std::vector<double> Phi(n * M);
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < M; ++j) Phi[k * M + j] = sym_phi(points_[k], nodes_[j]);
      }
      Eigen::VectorXd g(n);
      Eigen::MatrixXd H(n, n);
      for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < M; ++j) acc -= node_w_[j] * Phi[k * M + j] * log2f_[j];
        g(k) = acc;
        for (std::size_t l = k; l < n; ++l) {
          double h = 0.0;
          for (std::size_t j = 0; j < M; ++j) h -= node_w_[j] * Phi[k * M + j] * Phi[l * M + j] * std::exp2(-log2f_[j]);
          H(k, l) = H(l, k) = h / kLn2;
        }
      }
      std::vector<bool> pinned(n, false);
      Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
      for (std::size_t round = 0; round < n; ++round) {
        std::vector<std::size_t> free;
        double pinned_mass = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (pinned[k]) {
            pinned_mass += weights_[k];
          } else {
            free.push_back(k);
          }
        }
        const std::size_t f = free.size();
        if (f == 0) return progress;
        // max g.d + d'Hd/2 with pinned d_k = -w_k and sum d = 0.
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(f + 1, f + 1);
        Eigen::VectorXd rhs(f + 1);
        for (std::size_t a = 0; a < f; ++a) {
          double r = -g(free[a]);
          for (std::size_t k = 0; k < n; ++k) {
            if (pinned[k]) r += H(free[a], k) * weights_[k];
          }
          rhs(a) = r;
          for (std::size_t b = 0; b < f; ++b) K(a, b) = H(free[a], free[b]);
          K(a, f) = K(f, a) = 1.0;
        }
        rhs(f) = pinned_mass;
        const Eigen::VectorXd sol = K.fullPivLu().solve(rhs);
        d.setZero();
        for (std::size_t k = 0; k < n; ++k) {
          if (pinned[k]) d(k) = -weights_[k];
        }
        for (std::size_t a = 0; a < f; ++a) d(free[a]) = sol(a);
        std::size_t worst = n;
        double worst_ratio = 1.0;
        for (std::size_t a = 0; a < f; ++a) {
          const std::size_t k = free[a];
          if (weights_[k] + d(k) < 0.0 && weights_[k] / -d(k) < worst_ratio) {
            worst_ratio = weights_[k] / -d(k);
            worst = k;
          }
        }
        if (worst == n) break;
        pinned[worst] = true;
      }
      const double slope = g.dot(d);
      if (!(slope > 0.0)) return progress;
      const double base = info_;
      double t = 1.0;
      std::vector<double> trial(n);
      bool accepted = false;
      for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
        for (std::size_t k = 0; k < n; ++k) trial[k] = std::max(0.0, weights_[k] + t * d(k));
        const double value = mutual_info(points_, trial, false);
        if (value >= base + 1e-4 * t * slope) {
          accepted = true;
          break;
        }
      }
      if (!accepted) return progress;
      weights_ = trial;
      tidy();
      refresh();
      progress = true;
      if (info_ - base < 1e-15) return progress;
    }
    return progress;
  }

  // Joint Newton ascent over weights and interior positions. The Hessian is
  // taken on the sum-to-one tangent space with its eigenvalues forced
  // negative, so every direction is an ascent direction; Armijo backtracking
  // keeps the mutual information non-decreasing.
  void optimize() {
    blahut_arimoto(20);
    for (int it = 0; it < 300; ++it) {
      const std::size_t n = points_.size();
      std::vector<std::size_t> movable;
      for (std::size_t k = 0; k < n; ++k) {
        if (points_[k] > 0.0 && points_[k] < A_) movable.push_back(k);
      }
      const std::size_t m = movable.size();
      const std::size_t M = nodes_.size();

      std::vector<double> Phi(n * M), dPhi(n * M), d2Phi(n * M), invf(M);
      for (std::size_t k = 0; k < n; ++k) {
        const double a = points_[k];
        for (std::size_t j = 0; j < M; ++j) {
          const double y = nodes_[j];
          const double pm = phi(y - a);
          const double pp = phi(y + a);
          Phi[k * M + j] = 0.5 * (pm + pp);
          dPhi[k * M + j] = 0.5 * ((y - a) * pm - (y + a) * pp);
          d2Phi[k * M + j] = 0.5 * (((y - a) * (y - a) - 1.0) * pm + ((y + a) * (y + a) - 1.0) * pp);
        }
      }
      for (std::size_t j = 0; j < M; ++j) invf[j] = 1.0 / (kLn2 * std::exp2(log2f_[j]));
      const auto integral = [&](const double* u, const double* v, const std::vector<double>& weight) {
        double acc = 0.0;
        for (std::size_t j = 0; j < M; ++j) acc += node_w_[j] * u[j] * v[j] * weight[j];
        return acc;
      };

      // Full gradient and Hessian in (w_0..w_{n-1}, a_movable).
      const std::size_t dim = n + m;
      Eigen::VectorXd g(dim);
      Eigen::MatrixXd H(dim, dim);
      std::vector<double> shifted(M);
      for (std::size_t j = 0; j < M; ++j) shifted[j] = log2f_[j] + 1.0 / kLn2;
      const std::vector<double> ones(M, 1.0);
      std::vector<double> dPhiL(n);
      for (std::size_t k = 0; k < n; ++k) {
        g(k) = -integral(&Phi[k * M], ones.data(), shifted);
        dPhiL[k] = integral(&dPhi[k * M], ones.data(), log2f_);
      }
      for (std::size_t r = 0; r < m; ++r) g(n + r) = -weights_[movable[r]] * dPhiL[movable[r]];
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = k; l < n; ++l) H(k, l) = H(l, k) = -integral(&Phi[k * M], &Phi[l * M], invf);
        for (std::size_t r = 0; r < m; ++r) {
          const std::size_t l = movable[r];
          double v = -weights_[l] * integral(&Phi[k * M], &dPhi[l * M], invf);
          if (k == l) v -= dPhiL[k];
          H(k, n + r) = H(n + r, k) = v;
        }
      }
      for (std::size_t r = 0; r < m; ++r) {
        const std::size_t k = movable[r];
        for (std::size_t c = r; c < m; ++c) {
          const std::size_t l = movable[c];
          double v = -weights_[k] * weights_[l] * integral(&dPhi[k * M], &dPhi[l * M], invf);
          if (k == l) v -= weights_[k] * integral(&d2Phi[k * M], ones.data(), log2f_);
          H(n + r, n + c) = H(n + c, n + r) = v;
        }
      }

      // Tangent basis: the heaviest weight absorbs the sum constraint.
      const std::size_t pivot = static_cast<std::size_t>(
          std::max_element(weights_.begin(), weights_.end()) - weights_.begin());
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(dim, dim - 1);
      std::size_t col = 0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == pivot) continue;
        T(k, col) = 1.0;
        T(pivot, col) = -1.0;
        ++col;
      }
      for (std::size_t r = 0; r < m; ++r) T(n + r, col++) = 1.0;
      if (col == 0) return;

      const Eigen::VectorXd gr = T.transpose() * g;
      if (gr.lpNorm<Eigen::Infinity>() < 1e-14) return;
      const Eigen::MatrixXd Hr = T.transpose() * H * T;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Hr);
      const Eigen::VectorXd lam = eig.eigenvalues();
      const double floor = 1e-10 * std::max(1e-12, lam.cwiseAbs().maxCoeff());
      Eigen::VectorXd coef = eig.eigenvectors().transpose() * gr;
      for (Eigen::Index i = 0; i < lam.size(); ++i) coef(i) /= std::max(std::abs(lam(i)), floor);
      const Eigen::VectorXd dir = T * (eig.eigenvectors() * coef);
      const double slope = g.dot(dir);
      if (!(slope > 0.0)) return;

      // Step limits: weights stay positive, positions inside [0, A] and
      // move at most 0.5 per step.
      double t = 1.0;
      bool blocked = false;
      for (std::size_t k = 0; k < n; ++k) {
        if (dir(k) >= 0.0) continue;
        t = std::min(t, 0.9 * weights_[k] / -dir(k));
        // The model drives a weight to zero although more mass there would
        // help; the multiplicative update treats that boundary better.
        if (0.9 * weights_[k] / -dir(k) < 0.5 && g(k) > g(pivot)) blocked = true;
      }
      if (blocked) {
        if (!solve_weights()) return;
        continue;
      }
      for (std::size_t r = 0; r < m; ++r) {
        const double a = points_[movable[r]];
        const double d = dir(n + r);
        if (std::abs(d) > 0.5) t = std::min(t, 0.5 / std::abs(d));
        if (d < 0.0) t = std::min(t, a / -d);
        if (d > 0.0) t = std::min(t, 0.9 * (A_ - a) / d);
      }

      const double base = info_;
      bool accepted = false;
      std::vector<double> trial_p;
      std::vector<double> trial_w;
      for (int halving = 0; halving < 50; ++halving, t *= 0.5) {
        trial_w = weights_;
        trial_p = points_;
        for (std::size_t k = 0; k < n; ++k) trial_w[k] += t * dir(k);
        for (std::size_t r = 0; r < m; ++r) {
          double a = trial_p[movable[r]] + t * dir(n + r);
          if (a < 1e-6) a = 0.0;
          trial_p[movable[r]] = std::clamp(a, 0.0, A_);
        }
        const double trial = mutual_info(trial_p, trial_w, false);
        if (trial >= base + 1e-4 * t * slope) {
          accepted = true;
          break;
        }
      }
      if (!accepted) return;
      points_ = std::move(trial_p);
      weights_ = std::move(trial_w);
      tidy();
      refresh();
      if (info_ - base < 1e-15 && t * dir.lpNorm<Eigen::Infinity>() < 1e-10) return;
    }
  }

  // Adds x with the mixing weight that maximizes the mutual information of
  // (1 - e) P + e delta_x; the objective is concave in e, so Newton from
  // e = 0 is safe once clamped to [0, 1/2].
  void insert(double x) {
    std::vector<double> fx(nodes_.size());
    std::vector<double> f0(nodes_.size());
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
      fx[j] = sym_phi(x, nodes_[j]);
      f0[j] = std::exp2(log2f_[j]);
    }
    double e = 0.0;
    for (int it = 0; it < 50; ++it) {
      double d1 = 0.0;
      double d2 = 0.0;
      for (std::size_t j = 0; j < nodes_.size(); ++j) {
        const double diff = fx[j] - f0[j];
        const double f = std::max(f0[j] + e * diff, 1e-300);
        d1 -= node_w_[j] * diff * std::log2(f);
        d2 -= node_w_[j] * diff * diff / (f * kLn2);
      }
      const double next = std::clamp(e - d1 / d2, 0.0, 0.5);
      const bool done = std::abs(next - e) < 1e-14;
      e = next;
      if (done) break;
    }
    e = std::max(e, 1e-8);
    for (double& w : weights_) w *= 1.0 - e;
    points_.push_back(x);
    weights_.push_back(e);
    sort_points();
  }

  // Drops negligible weights and merges points that have met.
  void tidy() {
    sort_points();
    std::vector<double> p;
    std::vector<double> w;
    for (std::size_t k = 0; k < points_.size(); ++k) {
      if (weights_[k] < 1e-9 && points_.size() > 1) continue;
      if (!p.empty() && points_[k] - p.back() < 1e-3) {
        const double total = w.back() + weights_[k];
        if (points_[k] == A_) {
          p.back() = A_;
        } else if (p.back() != 0.0) {
          p.back() = (p.back() * w.back() + points_[k] * weights_[k]) / total;
        }
        w.back() = total;
      } else {
        p.push_back(points_[k]);
        w.push_back(weights_[k]);
      }
    }
    points_ = std::move(p);
    weights_ = std::move(w);
    normalize();
  }

  double newton_local_max(double a) const {
    for (int it = 0; it < 40; ++it) {
      const auto [g, h] = density_info_derivs(a);
      double step = h < 0.0 ? -g / h : (g > 0.0 ? 0.1 : -0.1);
      step = std::clamp(step, -0.25, 0.25);
      const double next = std::clamp(a + step, 0.0, A_);
      const bool done = std::abs(next - a) < 1e-12;
      a = next;
      if (done) break;
    }
    return a;
  }

  std::pair<double, double> global_max() const {
    const double step = std::min(0.02, A_ / 50.0);
    const int n = static_cast<int>(std::ceil(A_ / step));
    std::vector<double> xs(n + 1);
    std::vector<double> vals(n + 1);
    for (int i = 0; i <= n; ++i) {
      xs[i] = std::min(A_, i * step);
      vals[i] = density_info(xs[i]);
    }
    const double scan_top = *std::max_element(vals.begin(), vals.end());
    double best_x = 0.0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
      const bool left_ok = i == 0 || vals[i] >= vals[i - 1];
      const bool right_ok = i == n || vals[i] >= vals[i + 1];
      if (!(left_ok && right_ok) || vals[i] < scan_top - 1e-3) continue;
      double x = xs[i];
      double v = vals[i];
      if (i > 0 && i < n) {
        const double refined = newton_local_max(x);
        const double rv = density_info(refined);
        if (rv > v) {
          x = refined;
          v = rv;
        }
      }
      if (v > best_v) {
        best_v = v;
        best_x = x;
      }
    }
    return {best_x, best_v};
  }

  double distance_to_support(double x) const {
    double d = std::numeric_limits<double>::infinity();
    for (double a : points_) d = std::min(d, std::abs(a - x));
    return d;
  }

  SmithSolution result(double slack) const {
    SmithSolution s;
    s.amplitude_sq = S_;
    s.capacity = info_;
    s.kkt_slack = slack;
    s.insertions = insertions_;
    for (std::size_t k = points_.size(); k-- > 0;) {
      if (points_[k] > 0.0) {
        s.support.push_back(-points_[k]);
        s.probs.push_back(0.5 * weights_[k]);
      }
    }
    for (std::size_t k = 0; k < points_.size(); ++k) {
      s.support.push_back(points_[k]);
      s.probs.push_back(points_[k] > 0.0 ? 0.5 * weights_[k] : weights_[k]);
    }
    return s;
  }

  double S_;
  double A_;
  SmithOptions opt_;
  std::vector<double> nodes_;
  std::vector<double> node_w_;
  std::vector<double> log2f_;
  std::vector<double> points_;
  std::vector<double> weights_;
  double info_ = 0.0;
  int insertions_ = 0;
};

}  // namespace

SmithSolution smith_capacity(double S, const SmithOptions& options) {
  if (!(S > 0.0) || !std::isfinite(S)) throw InvalidParameter("smith_capacity: S must be positive");
  if (!(options.tol >= 1e-6)) throw InvalidParameter("smith_capacity: tol must be at least 1e-6");
  return SmithSolver(S, options).solve();
}

SmithSolution smith_capacity(double S, double tol) {
  SmithOptions opt;
  opt.tol = tol;
  return smith_capacity(S, opt);
}

namespace {

double awgn(double S) { return 0.5 * std::log2(1.0 + S); }

// Region-2 grid points are solved in fixed chunks; each chunk walks upward in
// S and starts every solve from its predecessor's law.
constexpr std::size_t kChunk = 20;

}  // namespace

EtaReport verify_eta(const EtaOptions& options) {
  if (options.region2_points < 2 || !(options.region2_low > 0.0) ||
      !(options.region2_low <= options.boundary_12) || !(options.boundary_12 < options.boundary_23) ||
      !(options.boundary_23 < options.boundary_34) || !(options.boundary_34 < options.boundary_45) ||
      !(options.region4_step > 0.0)) {
    throw InvalidParameter("verify_eta: inconsistent region layout");
  }
  EtaReport report;
  report.trivial_bound = 2.0 / (std::numbers::pi * std::numbers::e);

  // Region 1: C >= C_bin and 1/2 log2(1 + S) <= S / (2 ln 2), so the ratio is
  // at least R(S) >= R(boundary) once R is non-increasing.
  {
    auto& r = report.regions[0];
    r.region = 1;
    r.s_low = 0.0;
    r.s_high = options.boundary_12;
    r.value = binary_ratio(options.boundary_12);
    r.argmin_s = options.boundary_12;
    r.method = "binary input, monotone R(S)";
    bool monotone = true;
    double prev = std::numeric_limits<double>::infinity();
    const int steps = static_cast<int>(std::round(options.boundary_12 / 0.01));
    for (int i = 1; i <= steps; ++i) {
      const double R = binary_ratio(std::min(0.01 * i, options.boundary_12));
      if (R > prev + 1e-12) monotone = false;
      prev = R;
    }
    report.region1_monotone = monotone;
  }

  // Region 2: C is non-decreasing, so on [S_i, S_{i+1}] the ratio is at least
  // C(S_i) / (1/2 log2(1 + S_{i+1})).
  const int n2 = options.region2_points;
  std::vector<double> grid(n2);
  const double lo = std::log(options.region2_low);
  const double hi = std::log(options.boundary_23);
  for (int i = 0; i < n2; ++i) grid[i] = std::exp(lo + (hi - lo) * i / (n2 - 1));
  grid.back() = options.boundary_23;
  std::vector<SmithSolution> sols(n2);
  const std::size_t chunks = (grid.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const SmithSolution* prev = nullptr;
    for (std::size_t i = c * kChunk; i < std::min(grid.size(), (c + 1) * kChunk); ++i) {
      SmithOptions opt;
      opt.tol = options.smith_tol;
      opt.warm_start = prev;
      sols[i] = smith_capacity(grid[i], opt);
      prev = &sols[i];
    }
  });
  {
    auto& r = report.regions[1];
    r.region = 2;
    r.s_low = options.boundary_12;
    r.s_high = options.boundary_23;
    r.value = std::numeric_limits<double>::infinity();
    r.method = "Smith capacity, bracketing on a log grid";
    for (int i = 0; i + 1 < n2; ++i) {
      if (grid[i + 1] <= options.boundary_12) continue;
      const double v = sols[i].capacity / awgn(grid[i + 1]);
      if (v < r.value) {
        r.value = v;
        r.argmin_s = grid[i];
      }
    }
  }
  for (int i = 0; i < n2; ++i) {
    report.max_kkt_slack = std::max(report.max_kkt_slack, sols[i].kkt_slack);
    const double S = grid[i];
    report.curve.push_back({S, sols[i].capacity, epi_lower_bound(S), awgn(S), sols[i].capacity / awgn(S)});
  }

  // Region 3: one bracket from the last Smith point.
  {
    auto& r = report.regions[2];
    r.region = 3;
    r.s_low = options.boundary_23;
    r.s_high = options.boundary_34;
    r.value = sols.back().capacity / awgn(options.boundary_34);
    r.argmin_s = options.boundary_23;
    r.method = "Smith capacity at the lower edge";
  }

  // Region 4: the uniform input is suboptimal but cheap; bracket it the same way.
  {
    auto& r = report.regions[3];
    r.region = 4;
    r.s_low = options.boundary_34;
    r.s_high = options.boundary_45;
    r.method = "uniform input, bracketing";
    const int n4 = static_cast<int>(std::round((options.boundary_45 - options.boundary_34) / options.region4_step)) + 1;
    std::vector<double> c4(n4);
    parallel_for(static_cast<std::size_t>(n4),
                 [&](std::size_t j) { c4[j] = uniform_input_mi(options.boundary_34 + options.region4_step * j); });
    r.value = std::numeric_limits<double>::infinity();
    for (int j = 0; j + 1 < n4; ++j) {
      const double S = options.boundary_34 + options.region4_step * j;
      const double v = c4[j] / awgn(options.boundary_34 + options.region4_step * (j + 1));
      if (v < r.value) {
        r.value = v;
        r.argmin_s = S;
      }
    }
  }

  // Region 5: the additive EPI bound divided by 1/2 log2(1 + S) increases in S.
  {
    auto& r = report.regions[4];
    r.region = 5;
    r.s_low = options.boundary_45;
    r.s_high = std::numeric_limits<double>::infinity();
    r.value = 1.0 - std::log2(std::numbers::pi * std::numbers::e / 2.0) / std::log2(1.0 + options.boundary_45);
    r.argmin_s = options.boundary_45;
    r.method = "entropy power inequality";
  }

  report.eta = std::numeric_limits<double>::infinity();
  for (const auto& r : report.regions) {
    if (r.value < report.eta) {
      report.eta = r.value;
      report.argmin_region = r.region;
    }
  }
  return report;
}

std::string smith_to_json(const SmithSolution& s) {
  nlohmann::json j;
  j["amplitude_sq"] = s.amplitude_sq;
  j["capacity"] = s.capacity;
  j["kkt_slack"] = s.kkt_slack;
  j["support"] = s.support;
  j["probs"] = s.probs;
  j["insertions"] = s.insertions;
  return j.dump();
}

SmithSolution smith_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    SmithSolution s;
    s.amplitude_sq = j.at("amplitude_sq").get<double>();
    s.capacity = j.at("capacity").get<double>();
    s.kkt_slack = j.at("kkt_slack").get<double>();
    s.support = j.at("support").get<std::vector<double>>();
    s.probs = j.at("probs").get<std::vector<double>>();
    s.insertions = j.value("insertions", 0);
    if (s.support.size() != s.probs.size()) throw InvalidParameter("smith_from_json: length mismatch");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("smith_from_json: ") + e.what());
  }
}

std::string eta_report_to_json(const EtaReport& r) {
  nlohmann::json j;
  j["eta"] = r.eta;
  j["argmin_region"] = r.argmin_region;
  j["trivial_bound"] = r.trivial_bound;
  j["region1_monotone"] = r.region1_monotone;
  j["max_kkt_slack"] = r.max_kkt_slack;
  j["regions"] = nlohmann::json::array();
  for (const auto& reg : r.regions) {
    j["regions"].push_back({{"region", reg.region},
                            {"s_low", reg.s_low},
                            {"s_high", std::isfinite(reg.s_high) ? nlohmann::json(reg.s_high) : nlohmann::json("inf")},
                            {"value", reg.value},
                            {"argmin_s", reg.argmin_s},
                            {"method", reg.method}});
  }
  return j.dump();
}

std::string eta_curve_csv(const EtaReport& r) {
  std::ostringstream out;
  out.precision(12);
  out << "S,smith,epi,upper,ratio\n";
  for (const auto& p : r.curve) out << p.S << ',' << p.smith << ',' << p.epi << ',' << p.upper << ',' << p.ratio << '\n';
  return out.str();
}

}  // namespace ehcap
