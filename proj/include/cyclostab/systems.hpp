#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <vector>

#include "cyclostab/criterion.hpp"
#include "cyclostab/error.hpp"
#include "cyclostab/mobius.hpp"
#include "cyclostab/polynomial.hpp"

namespace cyclostab {

/// Roots with real part >= -margin count as closed right half-plane.
inline constexpr double kStabilityMargin = 1e-9;

namespace detail {

// Two roots are "the same" when they agree to 1e-7 relative. Exact common
// factors computed through the same companion matrix agree far tighter.
inline bool roots_coincide(Complex x, Complex y) {
  return std::abs(x - y) <= 1e-7 * std::max({1.0, std::abs(x), std::abs(y)});
}

}  // namespace detail

/// G = num / den. Common factors are cancelled on construction; a common root
/// in the closed right half-plane makes the pair non-stabilizable and is rejected.
class RationalSystem {
 public:
  RationalSystem(RealPolynomial num, RealPolynomial den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw Error(ErrorCode::kInvalidArgument, "denominator is the zero polynomial");
    cancel_common_factors();
  }

  static RationalSystem gain(double k) { return {RealPolynomial::constant(k), RealPolynomial::constant(1.0)}; }

  const RealPolynomial& num() const { return num_; }
  const RealPolynomial& den() const { return den_; }

  bool is_proper() const { return num_.degree() <= den_.degree(); }
  bool is_constant() const { return den_.degree() == 0 && num_.degree() <= 0; }

  Complex eval(Complex s) const { return num_.eval(s) / den_.eval(s); }

  std::vector<Complex> poles() const { return den_.degree() >= 1 ? poly_roots(den_) : std::vector<Complex>{}; }
  std::vector<Complex> zeros() const { return num_.degree() >= 1 ? poly_roots(num_) : std::vector<Complex>{}; }

 private:
  void cancel_common_factors() {
    if (num_.is_zero()) {
      for (const Complex& r : poles()) {
        if (r.real() >= -kStabilityMargin) {
          throw Error(ErrorCode::kNotStabilizable,
                      "zero numerator with a closed right half-plane pole leaves N = M = 0 there");
        }
      }
      den_ = RealPolynomial::constant(1.0);
      return;
    }
    if (num_.degree() < 1 || den_.degree() < 1) return;
    std::vector<Complex> zs = poly_roots(num_);
    const std::vector<Complex> ps = poly_roots(den_);
    std::vector<bool> zero_used(zs.size(), false);
    std::vector<Complex> common;
    for (const Complex& p : ps) {
      for (std::size_t j = 0; j < zs.size(); ++j) {
        if (zero_used[j] || !detail::roots_coincide(p, zs[j])) continue;
        zero_used[j] = true;
        common.push_back(p);
        break;
      }
    }
    if (common.empty()) return;
    for (const Complex& r : common) {
      if (r.real() >= -kStabilityMargin) {
        throw Error(ErrorCode::kNotStabilizable,
                    "numerator and denominator share a closed right half-plane root");
      }
    }
    // Keep conjugate pairs together; drop unpaired complex strays from rounding.
    std::vector<Complex> paired;
    for (const Complex& r : common) {
      if (r.imag() == 0.0 || std::abs(r.imag()) < 1e-12 * std::max(1.0, std::abs(r))) {
        paired.emplace_back(r.real(), 0.0);
      } else if (r.imag() > 0.0) {
        const bool has_mate = std::any_of(common.begin(), common.end(), [&](const Complex& q) {
          return q.imag() < 0.0 && detail::roots_coincide(q, std::conj(r));
        });
        if (has_mate) {
          paired.push_back(r);
          paired.push_back(std::conj(r));
        }
      }
    }
    if (paired.empty()) return;
    const RealPolynomial g = RealPolynomial::from_roots(paired);
    num_ = num_.divide(g);
    den_ = den_.divide(g);
  }

  RealPolynomial num_;
  RealPolynomial den_;
};

/// A rational system followed by a pure delay exp(-tau s). Only its frequency
/// response is used; pole analysis of delayed loops goes through winding numbers.
class DelaySystem {
 public:
  DelaySystem(RationalSystem rational, double delay_tau = 0.0)  // NOLINT(implicit)
      : rational_(std::move(rational)), delay_(delay_tau) {
    if (!(delay_tau >= 0.0) || !std::isfinite(delay_tau)) {
      throw Error(ErrorCode::kInvalidArgument, "delay must be nonnegative and finite");
    }
  }

  const RationalSystem& rational() const { return rational_; }
  double delay() const { return delay_; }
  bool has_delay() const { return delay_ > 0.0; }

 private:
  RationalSystem rational_;
  double delay_;
};

/// x' = A x + B u, y = C x + D u (single input, single output).
struct StateSpace {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  double D = 0.0;

  StateSpace() = default;
  StateSpace(Eigen::MatrixXd a, Eigen::VectorXd b, Eigen::RowVectorXd c, double d)
      : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(d) {
    if (A.rows() != A.cols() || B.size() != A.rows() || C.size() != A.rows()) {
      throw Error(ErrorCode::kInvalidArgument, "state-space dimensions are inconsistent");
    }
  }

  int order() const { return static_cast<int>(A.rows()); }

  Complex eval(Complex s) const {
    if (order() == 0) return D;
    const int m = order();
    const Eigen::MatrixXcd resolvent = s * Eigen::MatrixXcd::Identity(m, m) - A.cast<Complex>();
    const Eigen::VectorXcd x = resolvent.partialPivLu().solve(B.cast<Complex>());
    return (C.cast<Complex>() * x)(0) + D;
  }

  bool is_hurwitz(double margin = kStabilityMargin) const {
    if (order() == 0) return true;
    const Eigen::VectorXcd ev = A.eigenvalues();
    return (ev.real().array() < -margin).all();
  }
};

struct Interconnection {
  std::vector<DelaySystem> subsystems;
  MobiusParams mobius;

  Interconnection(std::vector<DelaySystem> subs, MobiusParams params)
      : subsystems(std::move(subs)), mobius(params) {
    if (subsystems.size() < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two subsystems");
  }

  int size() const { return static_cast<int>(subsystems.size()); }
  bool has_delay() const {
    return std::any_of(subsystems.begin(), subsystems.end(), [](const auto& s) { return s.has_delay(); });
  }
};

// ---------------------------------------------------------------------------

/// G(i omega) including the delay factor.
inline Complex freq_response(const DelaySystem& sys, double omega) {
  const Complex s(0.0, omega);
  const RationalSystem& g = sys.rational();
  const Complex den = g.den().eval(s);
  if (std::abs(den) < 1e-12 * g.den().abs_eval(std::abs(omega))) {
    throw Error(ErrorCode::kPoleOnAxis, "pole on the imaginary axis at omega = " + std::to_string(omega));
  }
  Complex value = g.num().eval(s) / den;
  if (sys.has_delay()) value *= std::polar(1.0, -sys.delay() * omega);
  return value;
}

inline int count_crhp_roots(const RealPolynomial& p, double margin = kStabilityMargin) {
  if (p.degree() < 1) return 0;
  int count = 0;
  for (const Complex& r : poly_roots(p)) count += r.real() >= -margin ? 1 : 0;
  return count;
}

inline bool has_imaginary_axis_root(const RealPolynomial& p, double margin = kStabilityMargin) {
  if (p.degree() < 1) return false;
  const auto roots = poly_roots(p);
  return std::any_of(roots.begin(), roots.end(), [margin](const Complex& r) { return std::abs(r.real()) <= margin; });
}

/// Every pole strictly left of -1e-9.
inline bool is_stable(const RationalSystem& sys) { return count_crhp_roots(sys.den()) == 0; }

struct FactorPair {
  RealPolynomial num;  // N_k
  RealPolynomial den;  // M_k
};

/// det(M - N S) = prod M_k + prod N_k for diagonal N, M and the cyclic S.
inline RealPolynomial closed_loop_char_poly(std::span<const FactorPair> factors) {
  if (factors.size() < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two factor pairs");
  RealPolynomial pm = RealPolynomial::constant(1.0);
  RealPolynomial pn = RealPolynomial::constant(1.0);
  for (const auto& f : factors) {
    pm = pm * f.den;
    pn = pn * f.num;
  }
  // Coefficients below the rounding level of the two products are cancellation noise.
  const int deg = std::max(pm.degree(), pn.degree());
  std::vector<double> c(static_cast<std::size_t>(std::max(deg, 0) + 1), 0.0);
  for (int k = 0; k <= deg; ++k) {
    const double m = pm.coefficient(k);
    const double v = pn.coefficient(k);
    const double sum = m + v;
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(m), std::abs(v));
    c[static_cast<std::size_t>(k)] = std::abs(sum) <= noise ? 0.0 : sum;
  }
  return RealPolynomial(c);
}

inline std::vector<FactorPair> factor_pairs(const Interconnection& inter) {
  if (inter.has_delay()) {
    throw Error(ErrorCode::kDelayUnsupported, "closed-loop polynomial needs delay-free subsystems");
  }
  std::vector<FactorPair> out;
  for (const auto& s : inter.subsystems) out.push_back({s.rational().num(), s.rational().den()});
  return out;
}

inline RealPolynomial closed_loop_char_poly(const Interconnection& inter) {
  return closed_loop_char_poly(factor_pairs(inter));
}

enum class LoopVerdict { kStable, kUnstable, kMarginal };

inline const char* to_string(LoopVerdict v) {
  switch (v) {
    case LoopVerdict::kStable: return "stable";
    case LoopVerdict::kUnstable: return "unstable";
    case LoopVerdict::kMarginal: return "marginal";
  }
  return "unknown";
}

inline LoopVerdict classify_roots(const RealPolynomial& char_poly) {
  if (char_poly.is_zero()) throw Error(ErrorCode::kZeroPolynomial, "closed loop is ill-posed (zero polynomial)");
  if (char_poly.degree() == 0) return LoopVerdict::kStable;
  bool marginal = false;
  for (const Complex& r : poly_roots(char_poly)) {
    if (r.real() > kStabilityMargin) return LoopVerdict::kUnstable;
    if (r.real() >= -kStabilityMargin) marginal = true;
  }
  return marginal ? LoopVerdict::kMarginal : LoopVerdict::kStable;
}

inline LoopVerdict closed_loop_stable(const Interconnection& inter) {
  return classify_roots(closed_loop_char_poly(inter));
}

// ---------------------------------------------------------------------------
// Realisation.

namespace detail {

inline Eigen::MatrixXd orthonormal_range(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.cols() == 0 || m.rows() == 0) return Eigen::MatrixXd(m.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  const double top = sv.size() > 0 ? sv(0) : 0.0;
  for (int i = 0; i < sv.size(); ++i) rank += sv(i) > rel_tol * top ? 1 : 0;
  if (top == 0.0) rank = 0;
  return svd.matrixU().leftCols(rank);
}

}  // namespace detail

inline Eigen::MatrixXd controllability_matrix(const StateSpace& ss) {
  const int m = ss.order();
  Eigen::MatrixXd k(m, m);
  Eigen::VectorXd col = ss.B;
  for (int i = 0; i < m; ++i) {
    k.col(i) = col;
    col = ss.A * col;
  }
  return k;
}

inline Eigen::MatrixXd observability_matrix(const StateSpace& ss) {
  const int m = ss.order();
  Eigen::MatrixXd o(m, m);
  Eigen::RowVectorXd row = ss.C;
  for (int i = 0; i < m; ++i) {
    o.row(i) = row;
    row = row * ss.A;
  }
  return o;
}

/// Restrict to the controllable subspace, then quotient out the unobservable one.
inline StateSpace minimal_realization(const StateSpace& ss, double rel_tol = 1e-9) {
  if (ss.order() == 0) return ss;
  const Eigen::MatrixXd tc = detail::orthonormal_range(controllability_matrix(ss), rel_tol);
  StateSpace reduced(tc.transpose() * ss.A * tc, tc.transpose() * ss.B, ss.C * tc, ss.D);
  if (reduced.order() == 0) return reduced;
  const Eigen::MatrixXd to =
      detail::orthonormal_range(observability_matrix(reduced).transpose(), rel_tol);
  return StateSpace(to.transpose() * reduced.A * to, to.transpose() * reduced.B, reduced.C * to, reduced.D);
}

/// Controllable canonical form, then minimality reduction.
inline StateSpace realize(const RationalSystem& sys) {
  if (!sys.is_proper()) throw Error(ErrorCode::kImproperSystem, "numerator degree exceeds denominator degree");
  const int m = sys.den().degree();
  const double lead = sys.den().leading();
  const double d = sys.num().coefficient(m) / lead;
  if (m == 0) return StateSpace(Eigen::MatrixXd(0, 0), Eigen::VectorXd(0), Eigen::RowVectorXd(0), d);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i + 1 < m; ++i) a(i, i + 1) = 1.0;
  for (int j = 0; j < m; ++j) a(m - 1, j) = -sys.den().coefficient(j) / lead;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  b(m - 1) = 1.0;
  Eigen::RowVectorXd c(m);
  // Strictly proper remainder: num/lead - d * den/lead.
  for (int j = 0; j < m; ++j) c(j) = (sys.num().coefficient(j) - d * sys.den().coefficient(j)) / lead;
  return minimal_realization(StateSpace(a, b, c, d));
}

}  // namespace cyclostab
