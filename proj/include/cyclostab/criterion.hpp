#pragma once

// The cyclic-interconnection inequality on the geometric mean of the
// subsystem indices, and the matrix facts behind it: the spectrum of Gamma*S,
// the exact structured singular value of g(Gamma*S), the diagonal scaling that
// makes Gamma*S normal, and explicit destabilising constructions when the
// inequality fails.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "cyclostab/error.hpp"
#include "cyclostab/mobius.hpp"
#include "cyclostab/polynomial.hpp"

namespace cyclostab {

class GammaList {
 public:
  explicit GammaList(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two indices");
    for (double g : values_) {
      if (!(g > 0.0) || !std::isfinite(g)) {
        throw Error(ErrorCode::kInvalidArgument, "indices must be positive and finite");
      }
    }
  }
  GammaList(std::initializer_list<double> values) : GammaList(std::vector<double>(values)) {}

  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int k) const { return values_[static_cast<std::size_t>(k)]; }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// The n x n matrix S: ones on the subdiagonal and -1 in the top-right corner.
class CyclicStructure {
 public:
  explicit CyclicStructure(int n) : n_(n) {
    if (n < 2) throw Error(ErrorCode::kInvalidArgument, "cyclic structure needs n >= 2");
  }
  int n() const { return n_; }
  Eigen::MatrixXd matrix() const {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n_, n_);
    for (int k = 1; k < n_; ++k) s(k, k - 1) = 1.0;
    s(0, n_ - 1) = -1.0;
    return s;
  }

 private:
  int n_;
};

// ---------------------------------------------------------------------------
// Intervals of admissible geometric means.

struct OpenInterval {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double x) const { return x > lo && x < hi; }
  friend bool operator==(const OpenInterval&, const OpenInterval&) = default;
};

/// Sorted, disjoint union of open intervals inside (0, inf).
class GammaIntervalSet {
 public:
  GammaIntervalSet() = default;
  explicit GammaIntervalSet(std::vector<OpenInterval> intervals) : intervals_(std::move(intervals)) {
    normalize();
  }

  static GammaIntervalSet positive_axis() { return GammaIntervalSet({OpenInterval{}}); }

  std::span<const OpenInterval> intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }

  bool contains(double x) const {
    return std::any_of(intervals_.begin(), intervals_.end(),
                       [x](const OpenInterval& iv) { return iv.contains(x); });
  }

  GammaIntervalSet intersect(const GammaIntervalSet& other) const {
    std::vector<OpenInterval> out;
    for (const auto& x : intervals_) {
      for (const auto& y : other.intervals_) {
        const double lo = std::max(x.lo, y.lo);
        const double hi = std::min(x.hi, y.hi);
        if (lo < hi) out.push_back({lo, hi});
      }
    }
    return GammaIntervalSet(std::move(out));
  }

  /// Lower interval touches 0 and (if more than one) the last reaches infinity.
  bool has_lower_branch() const { return !empty() && intervals_.front().lo == 0.0; }
  bool has_upper_branch() const { return !empty() && std::isinf(intervals_.back().hi); }

  friend bool operator==(const GammaIntervalSet&, const GammaIntervalSet&) = default;

 private:
  void normalize() {
    std::vector<OpenInterval> kept;
    for (auto iv : intervals_) {
      iv.lo = std::max(iv.lo, 0.0);
      if (iv.lo < iv.hi) kept.push_back(iv);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& x, const auto& y) { return x.lo < y.lo; });
    intervals_.clear();
    for (const auto& iv : kept) {
      // Open intervals sharing only an endpoint stay separate: the endpoint is excluded.
      if (!intervals_.empty() && iv.lo < intervals_.back().hi) {
        intervals_.back().hi = std::max(intervals_.back().hi, iv.hi);
      } else {
        intervals_.push_back(iv);
      }
    }
  }

  std::vector<OpenInterval> intervals_;
};

// ---------------------------------------------------------------------------
// The inequality.

struct BetaPair {
  double first;   // cos(pi/n)
  double second;  // cos(pi (2 ceil(n/2) - 1) / n)
};

inline BetaPair beta_values(int n) {
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "n must be at least 2");
  const double pi = std::numbers::pi;
  const int half_up = (n + 1) / 2;
  // cos(pi k / n), exact zero at k / n = 1/2 instead of 6e-17.
  const auto cos_frac = [&](int k) { return 2 * k == n ? 0.0 : std::cos(pi * k / n); };
  return {cos_frac(1), cos_frac(2 * half_up - 1)};
}

/// (b^2 - a^2) g^2 + 2 beta (ac - bd) g + d^2 - c^2
inline double criterion_quadratic(const MobiusParams& p, double beta, double gamma_bar) {
  const double quad = p.b() * p.b() - p.a() * p.a();
  const double lin = 2.0 * beta * (p.a() * p.c() - p.b() * p.d());
  const double cst = p.d() * p.d() - p.c() * p.c();
  return (quad * gamma_bar + lin) * gamma_bar + cst;
}

/// Magnitude of the largest term of the quadratic; the yardstick for "marginal".
inline double criterion_quadratic_scale(const MobiusParams& p, double beta, double gamma_bar) {
  const double quad = std::abs(p.b() * p.b() - p.a() * p.a()) * gamma_bar * gamma_bar;
  const double lin = std::abs(2.0 * beta * (p.a() * p.c() - p.b() * p.d())) * gamma_bar;
  const double cst = std::abs(p.d() * p.d() - p.c() * p.c());
  return std::max({quad, lin, cst});
}

/// Strict positivity for both beta values; boundary values fail.
inline bool inequality_holds(const MobiusParams& p, int n, double gamma_bar) {
  if (!(gamma_bar > 0.0)) throw Error(ErrorCode::kInvalidArgument, "gamma_bar must be positive");
  const BetaPair beta = beta_values(n);
  return criterion_quadratic(p, beta.first, gamma_bar) > 0.0 &&
         criterion_quadratic(p, beta.second, gamma_bar) > 0.0;
}

namespace detail {

// {g > 0 : A g^2 + B g + C > 0}
inline GammaIntervalSet positive_set_of_quadratic(double A, double B, double C) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double scale = std::max({std::abs(A), std::abs(B), std::abs(C)});
  if (scale == 0.0) return {};
  if (std::abs(A) <= 1e-14 * scale) {
    if (B == 0.0) return C > 0.0 ? GammaIntervalSet::positive_axis() : GammaIntervalSet{};
    const double root = -C / B;
    if (B > 0.0) return GammaIntervalSet({{std::max(root, 0.0), kInf}});
    return GammaIntervalSet({{0.0, root}});
  }
  const double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) return A > 0.0 ? GammaIntervalSet::positive_axis() : GammaIntervalSet{};
  const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
  double r1 = q != 0.0 ? q / A : 0.0;
  double r2 = q != 0.0 ? C / q : 0.0;
  if (r1 > r2) std::swap(r1, r2);
  if (A > 0.0) return GammaIntervalSet({{0.0, r1}, {r2, kInf}});
  return GammaIntervalSet({{r1, r2}});
}

}  // namespace detail

inline GammaIntervalSet admissible_gamma_set(const MobiusParams& p, int n) {
  const BetaPair beta = beta_values(n);
  const double quad = p.b() * p.b() - p.a() * p.a();
  const double cst = p.d() * p.d() - p.c() * p.c();
  const double cross = 2.0 * (p.a() * p.c() - p.b() * p.d());
  const auto first = detail::positive_set_of_quadratic(quad, beta.first * cross, cst);
  const auto second = detail::positive_set_of_quadratic(quad, beta.second * cross, cst);
  return first.intersect(second);
}

// ---------------------------------------------------------------------------
// Gamma * S.

inline double geometric_mean(const GammaList& gammas) {
  double log_sum = 0.0;
  for (double g : gammas.values()) log_sum += std::log(g);
  return std::exp(log_sum / gammas.size());
}

inline Eigen::MatrixXd gamma_s_matrix(const GammaList& gammas) {
  const int n = gammas.size();
  Eigen::MatrixXd gs = CyclicStructure(n).matrix();
  for (int k = 0; k < n; ++k) gs.row(k) *= gammas[k];
  return gs;
}

/// gamma_bar * exp(i pi (2k - 1) / n), k = 1..n.
inline std::vector<Complex> gamma_s_spectrum(const GammaList& gammas) {
  const int n = gammas.size();
  const double gbar = geometric_mean(gammas);
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) out.push_back(std::polar(gbar, std::numbers::pi * (2 * k - 1) / n));
  return out;
}

namespace detail {

inline double pole_tolerance(const MobiusParams& p, Complex lambda) {
  return 1e-12 * std::max({std::abs(p.b() * lambda), std::abs(p.d()), 1e-300});
}

}  // namespace detail

/// g(Z) = (-aZ + cI)(-bZ + dI)^{-1} evaluated densely at Z = Gamma*S.
inline Eigen::MatrixXcd g_of_gamma_s(const MobiusParams& p, const GammaList& gammas) {
  const int n = gammas.size();
  const Eigen::MatrixXcd gs = gamma_s_matrix(gammas).cast<Complex>();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd num = -p.a() * gs + p.c() * id;
  const Eigen::MatrixXcd den = -p.b() * gs + p.d() * id;
  return num * den.partialPivLu().inverse();
}

/// max |(-a lambda + c)/(-b lambda + d)| over the spectrum of Gamma*S, which is
/// the structured singular value of g(Gamma*S) for diagonal complex uncertainty.
inline double mu_cyclic(const MobiusParams& p, const GammaList& gammas) {
  double best = 0.0;
  for (const Complex& lambda : gamma_s_spectrum(gammas)) {
    const Complex den = -p.b() * lambda + p.d();
    if (std::abs(den) < detail::pole_tolerance(p, lambda)) {
      throw Error(ErrorCode::kPoleOnSpectrum, "d/b lies on the spectrum of Gamma*S; mu is unbounded");
    }
    best = std::max(best, std::abs((-p.a() * lambda + p.c()) / den));
  }
  return best;
}

/// h(D) = Gamma S D S^T Gamma / trace(.), acting on the diagonal of D.
inline Eigen::VectorXd dscale_map(const GammaList& gammas, const Eigen::VectorXd& diag) {
  const int n = gammas.size();
  Eigen::VectorXd out(n);
  // S D S^T = diag(d_n, d_1, ..., d_{n-1}).
  for (int k = 0; k < n; ++k) {
    const double shifted = diag((k + n - 1) % n);
    out(k) = gammas[k] * gammas[k] * shifted;
  }
  return out / out.sum();
}

struct DScaling {
  /// Diagonal of D with h(D) = D and unit trace.
  Eigen::VectorXd fixed_point;
  /// Diagonal of D^{-1}, renormalised to unit trace. This is the weight that
  /// attains the upper bound: ||W^{1/2} g W^{-1/2}|| = rho(g) for W = mu_weight.
  Eigen::VectorXd mu_weight;
  double residual = 0.0;
};

/// Fixed point of h. The map permutes the diagonal cyclically, so plain
/// iteration cycles with period n; the fixed point is solved in closed form
/// instead: d_k = d_{k-1} gamma_k^2 / gamma_bar^2 around the ring.
inline DScaling dscale_fixed_point(const GammaList& gammas) {
  const int n = gammas.size();
  const double log_gbar = std::log(geometric_mean(gammas));
  Eigen::VectorXd logs(n);
  logs(0) = 0.0;
  for (int k = 1; k < n; ++k) logs(k) = logs(k - 1) + 2.0 * (std::log(gammas[k]) - log_gbar);
  const double top = logs.maxCoeff();
  Eigen::VectorXd d = (logs.array() - top).exp();
  d /= d.sum();

  DScaling out;
  out.fixed_point = d;
  out.residual = (dscale_map(gammas, d) - d).cwiseAbs().maxCoeff();
  if (!(out.residual <= 1e-12)) {
    throw Error(ErrorCode::kNonConvergence, "diagonal scaling fixed point residual above 1e-12");
  }
  Eigen::VectorXd inv = d.cwiseInverse();
  out.mu_weight = inv / inv.sum();
  return out;
}

// ---------------------------------------------------------------------------
// The structured matrix R = [[diag(x), diag(y)], [I, S]].

inline Eigen::MatrixXcd r_matrix(std::span<const Complex> x, std::span<const Complex> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "x and y must have equal length n >= 2");
  }
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    r(k, k) = x[static_cast<std::size_t>(k)];
    r(k, n + k) = y[static_cast<std::size_t>(k)];
    r(n + k, k) = 1.0;
  }
  r.bottomRightCorner(n, n) = CyclicStructure(n).matrix().cast<Complex>();
  return r;
}

/// prod_k max(|x_k|, |y_k|); det R is bounded by twice this.
inline double r_matrix_scale(std::span<const Complex> x, std::span<const Complex> y) {
  double s = 1.0;
  for (std::size_t k = 0; k < x.size(); ++k) s *= std::max(std::abs(x[k]), std::abs(y[k]));
  return s;
}

struct RMatrixWitness {
  std::vector<Complex> x;
  std::vector<Complex> y;
  Complex det_value;
  double det_scale = 1.0;
  /// Spectrum point of Gamma*S that produced the witness.
  Complex lambda;
  /// Common unit-disk parameter: x_k / y_k = gamma_k f(delta).
  Complex delta;
};

/// A singular R with every x_k/y_k in its scaled disk, or nullopt when the
/// inequality holds (then none exists).
inline std::optional<RMatrixWitness> singularity_witness(const MobiusParams& p, const GammaList& gammas) {
  const int n = gammas.size();
  if (inequality_holds(p, n, geometric_mean(gammas))) return std::nullopt;

  // Spectrum point with the largest |g|; a pole on the spectrum wins outright.
  Complex lambda;
  Complex delta;
  double best = 0.0;
  for (const Complex& l : gamma_s_spectrum(gammas)) {
    const Complex den = -p.b() * l + p.d();
    const Complex num = -p.a() * l + p.c();
    if (std::abs(den) < detail::pole_tolerance(p, l)) {
      lambda = l;
      delta = 0.0;
      best = std::numeric_limits<double>::infinity();
      break;
    }
    const double mag = std::abs(num / den);
    if (mag > best) {
      best = mag;
      lambda = l;
      delta = -den / num;  // -1/g(lambda)
    }
  }
  // At the boundary rounding can leave |delta| a hair above 1.
  if (std::abs(delta) > 1.0) delta /= std::abs(delta);

  RMatrixWitness w;
  w.lambda = lambda;
  w.delta = delta;
  for (int k = 0; k < n; ++k) {
    w.x.push_back(gammas[k] * (p.a() * delta + p.b()));
    w.y.push_back(p.c() * delta + p.d());
  }
  w.det_value = r_matrix(w.x, w.y).partialPivLu().determinant();
  w.det_scale = r_matrix_scale(w.x, w.y);
  return w;
}

// ---------------------------------------------------------------------------
// Destabilising polynomial subsystems.

struct DestabilizingFactor {
  double alpha = 1.0;
  double theta = 0.0;  // in [-2 pi - 1e-6, 0)
  double phi = 0.0;    // tan(-theta/6)
  RealPolynomial num;  // N_k
  RealPolynomial den;  // M_k
};

struct DestabilizingConstruction {
  std::vector<DestabilizingFactor> factors;
  /// x_k / y_k targeted at s = i.
  std::vector<ExtendedComplex> target_ratio;
};

/// Polynomial pairs (N_k, M_k) with N_k/M_k inside the k-th scaled disk on the
/// closed right half-plane, whose cyclic loop has a closed-loop root at s = i.
inline std::optional<DestabilizingConstruction> destabilizing_subsystems(const MobiusParams& p,
                                                                  const GammaList& gammas) {
  const auto witness = singularity_witness(p, gammas);
  if (!witness) return std::nullopt;
  const double two_pi = 2.0 * std::numbers::pi;

  DestabilizingConstruction out;
  for (int k = 0; k < gammas.size(); ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const ExtendedComplex ratio =
        witness->y[kk] == Complex(0.0, 0.0)
            ? ExtendedComplex::infinity()
            : ExtendedComplex(witness->x[kk] / witness->y[kk]);
    out.target_ratio.push_back(ratio);

    const ExtendedComplex zk = inverse_map(p, gammas[k], ratio);
    Complex z = zk.infinite ? witness->delta : zk.value;
    if (std::abs(z) == 0.0) z = 1e-12;  // alpha must be positive
    DestabilizingFactor f;
    f.alpha = std::min(std::abs(z), 1.0);
    double theta = std::arg(z);  // (-pi, pi]
    while (theta >= 0.0) theta -= two_pi;
    // Near angle 0 the factor would collapse to a constant; wrapping once more keeps phi near tan(pi/3).
    if (theta > -1e-6) theta -= two_pi;
    f.theta = theta;

    const double ga = gammas[k] * p.a();
    const double gb = gammas[k] * p.b();
    f.phi = std::tan(-theta / 6.0);
    const RealPolynomial lag = RealPolynomial({1.0, -f.phi}).pow(3);   // (1 - phi s)^3
    const RealPolynomial lead = RealPolynomial({1.0, f.phi}).pow(3);   // (1 + phi s)^3
    f.num = (f.alpha * ga) * lag + gb * lead;
    f.den = (f.alpha * p.c()) * lag + p.d() * lead;
    out.factors.push_back(std::move(f));
  }
  return out;
}

}  // namespace cyclostab
