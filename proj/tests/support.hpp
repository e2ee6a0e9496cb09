#pragma once

// Deterministic random instance generators shared by the unit and acceptance tests.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <random>
#include <vector>

#include "cyclostab/criterion.hpp"
#include "cyclostab/mobius.hpp"
#include "cyclostab/polynomial.hpp"
#include "cyclostab/systems.hpp"

namespace cyclostab::testing {

inline std::uint64_t base_seed() {
  if (const char* s = std::getenv("CYCLOSTAB_SEED")) return std::strtoull(s, nullptr, 10);
  return 20240917ULL;
}

class Gen {
 public:
  explicit Gen(std::uint64_t salt) : rng_(base_seed() ^ (salt * 0x9E3779B97F4A7C15ULL)) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

  Complex unit_disk_point() {
    const double r = std::sqrt(uniform(0.0, 1.0));
    return std::polar(r, uniform(-std::numbers::pi, std::numbers::pi));
  }
  Complex unit_circle_point() { return std::polar(1.0, uniform(-std::numbers::pi, std::numbers::pi)); }

  MobiusParams mobius(double range = 3.0) {
    for (;;) {
      const double a = uniform(-range, range), b = uniform(-range, range);
      const double c = uniform(-range, range), d = uniform(-range, range);
      if (std::abs(a * d - b * c) > 0.1 * range * range / 9.0) return {a, b, c, d};
    }
  }

  GammaList gammas(int n, double lo = 0.2, double hi = 5.0) {
    std::vector<double> g;
    for (int k = 0; k < n; ++k) g.push_back(log_uniform(lo, hi));
    return GammaList(std::move(g));
  }

  /// Roots strictly in the open left half-plane, conjugates paired.
  std::vector<Complex> stable_roots(int order) {
    std::vector<Complex> roots;
    while (static_cast<int>(roots.size()) < order) {
      if (order - static_cast<int>(roots.size()) >= 2 && uniform(0.0, 1.0) < 0.5) {
        const Complex r(-log_uniform(0.1, 5.0), log_uniform(0.1, 5.0));
        roots.push_back(r);
        roots.push_back(std::conj(r));
      } else {
        roots.push_back(-log_uniform(0.1, 5.0));
      }
    }
    return roots;
  }

  /// Stable proper rational system with random numerator coefficients.
  RationalSystem stable_system(int max_order = 4, bool strictly_proper = false) {
    const int order = integer(1, max_order);
    const auto poles = stable_roots(order);
    const RealPolynomial den = RealPolynomial::from_roots(poles);
    const int num_degree = integer(0, strictly_proper ? order - 1 : order);
    std::vector<double> num(static_cast<std::size_t>(num_degree + 1));
    for (auto& c : num) c = uniform(-2.0, 2.0);
    if (std::abs(num.back()) < 0.1) num.back() = 0.5;
    return RationalSystem(RealPolynomial(num), den);
  }

  /// Random stable state-space model of the given order (not necessarily minimal).
  StateSpace stable_state_space(int order) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(order, order);
    // Block-diagonal stable core, then a random similarity transform.
    const auto roots = stable_roots(order);
    for (int i = 0; i < order;) {
      const Complex r = roots[static_cast<std::size_t>(i)];
      if (r.imag() != 0.0 && i + 1 < order) {
        a(i, i) = r.real();
        a(i + 1, i + 1) = r.real();
        a(i, i + 1) = r.imag();
        a(i + 1, i) = -r.imag();
        i += 2;
      } else {
        a(i, i) = r.real();
        i += 1;
      }
    }
    Eigen::MatrixXd t(order, order);
    for (int i = 0; i < order; ++i)
      for (int j = 0; j < order; ++j) t(i, j) = (i == j ? 1.5 : 0.0) + uniform(-0.5, 0.5);
    a = t * a * t.inverse();
    Eigen::VectorXd b(order);
    Eigen::RowVectorXd c(order);
    for (int i = 0; i < order; ++i) {
      b(i) = uniform(-1.0, 1.0);
      c(i) = uniform(-1.0, 1.0);
    }
    return StateSpace(a, b, c, uniform(-0.5, 0.5));
  }

 private:
  std::mt19937_64 rng_;
};

/// |a - b| <= tol * max(1, |b|).
inline bool near_rel(Complex a, Complex b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace cyclostab::testing
