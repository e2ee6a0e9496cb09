#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <span>
#include <vector>

#include "cyclostab/error.hpp"

namespace cyclostab {

/// Polynomial in s with real coefficients stored in ascending degree.
/// Trailing exact zeros are trimmed, so the zero polynomial has no coefficients.
class RealPolynomial {
 public:
  RealPolynomial() = default;
  RealPolynomial(std::initializer_list<double> coeffs) : coeffs_(coeffs) { trim(); }
  explicit RealPolynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

  static RealPolynomial constant(double value) { return RealPolynomial({value}); }
  static RealPolynomial monomial(int degree, double coeff = 1.0) {
    std::vector<double> c(static_cast<std::size_t>(degree) + 1, 0.0);
    c.back() = coeff;
    return RealPolynomial(std::move(c));
  }

  /// leading * prod (s - r). Complex roots must come in conjugate pairs; each
  /// pair contributes the real quadratic s^2 - 2 Re(r) s + |r|^2.
  static RealPolynomial from_roots(std::span<const std::complex<double>> roots, double leading = 1.0) {
    RealPolynomial p = constant(leading);
    std::vector<bool> used(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
      if (used[i]) continue;
      used[i] = true;
      const auto r = roots[i];
      if (r.imag() == 0.0) {
        p = p * RealPolynomial({-r.real(), 1.0});
        continue;
      }
      // Pair with the closest unused conjugate.
      std::size_t best = roots.size();
      double best_dist = 0.0;
      for (std::size_t j = i + 1; j < roots.size(); ++j) {
        if (used[j]) continue;
        const double dist = std::abs(roots[j] - std::conj(r));
        if (best == roots.size() || dist < best_dist) {
          best = j;
          best_dist = dist;
        }
      }
      if (best == roots.size() || best_dist > 1e-6 * std::max(1.0, std::abs(r))) {
        throw Error(ErrorCode::kInvalidArgument, "complex roots must appear in conjugate pairs");
      }
      used[best] = true;
      const auto mid = 0.5 * (r + std::conj(roots[best]));
      p = p * RealPolynomial({std::norm(mid), -2.0 * mid.real(), 1.0});
    }
    return p;
  }

  bool is_zero() const { return coeffs_.empty(); }
  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  double coefficient(int k) const {
    return k >= 0 && k <= degree() ? coeffs_[static_cast<std::size_t>(k)] : 0.0;
  }
  double leading() const { return coeffs_.empty() ? 0.0 : coeffs_.back(); }
  std::span<const double> coefficients() const { return coeffs_; }

  double scale() const {
    double s = 0.0;
    for (double c : coeffs_) s = std::max(s, std::abs(c));
    return s;
  }

  template <typename T>
  T eval(const T& s) const {
    T acc(0.0);
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + T(*it);
    return acc;
  }

  /// sum |c_k| |s|^k, the natural magnitude against which eval(s) is small.
  double abs_eval(double modulus) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * modulus + std::abs(*it);
    return acc;
  }

  RealPolynomial derivative() const {
    if (degree() < 1) return {};
    std::vector<double> c(coeffs_.size() - 1);
    for (std::size_t k = 1; k < coeffs_.size(); ++k) c[k - 1] = static_cast<double>(k) * coeffs_[k];
    return RealPolynomial(std::move(c));
  }

  /// Quotient of polynomial long division; the remainder is returned through `rem`.
  RealPolynomial divide(const RealPolynomial& divisor, RealPolynomial* rem = nullptr) const {
    if (divisor.is_zero()) throw Error(ErrorCode::kZeroPolynomial, "division by the zero polynomial");
    std::vector<double> r = coeffs_;
    const int dd = divisor.degree();
    if (degree() < dd) {
      if (rem) *rem = *this;
      return {};
    }
    std::vector<double> q(static_cast<std::size_t>(degree() - dd) + 1, 0.0);
    for (int k = degree() - dd; k >= 0; --k) {
      const double f = r[static_cast<std::size_t>(k + dd)] / divisor.leading();
      q[static_cast<std::size_t>(k)] = f;
      for (int j = 0; j <= dd; ++j) r[static_cast<std::size_t>(k + j)] -= f * divisor.coefficient(j);
    }
    r.resize(static_cast<std::size_t>(dd));
    if (rem) *rem = RealPolynomial(std::move(r));
    return RealPolynomial(std::move(q));
  }

  friend RealPolynomial operator+(const RealPolynomial& x, const RealPolynomial& y) {
    std::vector<double> c(std::max(x.coeffs_.size(), y.coeffs_.size()), 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      c[k] = x.coefficient(static_cast<int>(k)) + y.coefficient(static_cast<int>(k));
    }
    return RealPolynomial(std::move(c));
  }
  friend RealPolynomial operator-(const RealPolynomial& x, const RealPolynomial& y) { return x + (-1.0) * y; }
  friend RealPolynomial operator*(double s, const RealPolynomial& x) {
    std::vector<double> c = x.coeffs_;
    for (double& v : c) v *= s;
    return RealPolynomial(std::move(c));
  }
  friend RealPolynomial operator*(const RealPolynomial& x, const RealPolynomial& y) {
    if (x.is_zero() || y.is_zero()) return {};
    std::vector<double> c(x.coeffs_.size() + y.coeffs_.size() - 1, 0.0);
    for (std::size_t i = 0; i < x.coeffs_.size(); ++i) {
      for (std::size_t j = 0; j < y.coeffs_.size(); ++j) c[i + j] += x.coeffs_[i] * y.coeffs_[j];
    }
    return RealPolynomial(std::move(c));
  }

  RealPolynomial pow(int e) const {
    RealPolynomial out = constant(1.0);
    for (int k = 0; k < e; ++k) out = out * *this;
    return out;
  }

  friend bool operator==(const RealPolynomial&, const RealPolynomial&) = default;

 private:
  void trim() {
    while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
  }

  std::vector<double> coeffs_;
};

/// All roots with multiplicity, from the eigenvalues of the companion matrix
/// followed by a guarded Newton polish against the original coefficients.
inline std::vector<std::complex<double>> poly_roots(const RealPolynomial& p) {
  using C = std::complex<double>;
  if (p.is_zero()) throw Error(ErrorCode::kZeroPolynomial, "roots of the zero polynomial");
  std::vector<C> roots;
  // Exact zero roots first; they would make the companion matrix singular.
  int low = 0;
  while (p.coefficient(low) == 0.0) {
    roots.emplace_back(0.0, 0.0);
    ++low;
  }
  const int m = p.degree() - low;
  if (m <= 0) return roots;

  const double lead = p.leading();
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(m, m);
  for (int i = 1; i < m; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < m; ++i) companion(i, m - 1) = -p.coefficient(low + i) / lead;

  // Diagonal balancing (Parlett-Reinsch) keeps badly scaled coefficients from
  // wrecking the eigenvalue accuracy.
  Eigen::VectorXd scaling = Eigen::VectorXd::Ones(m);
  for (bool converged = false; !converged;) {
    converged = true;
    for (int i = 0; i < m; ++i) {
      const double col = companion.col(i).cwiseAbs().sum() - std::abs(companion(i, i));
      const double row = companion.row(i).cwiseAbs().sum() - std::abs(companion(i, i));
      if (col == 0.0 || row == 0.0) continue;
      double f = 1.0;
      double c = col;
      const double total = col + row;
      while (c < row / 2.0) { c *= 2.0; f *= 2.0; }
      while (c >= row * 2.0) { c /= 2.0; f /= 2.0; }
      if ((c + row / f) < 0.95 * total) {
        converged = false;
        scaling(i) *= f;
        companion.row(i) /= f;
        companion.col(i) *= f;
      }
    }
  }

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kNonConvergence, "companion eigenvalue iteration failed");
  }
  const RealPolynomial dp = p.derivative();
  for (int i = 0; i < m; ++i) {
    C r = solver.eigenvalues()(i);
    double res = std::abs(p.eval(r));
    for (int it = 0; it < 3; ++it) {
      const C d = dp.eval(r);
      if (d == C(0.0, 0.0)) break;
      const C candidate = r - p.eval(r) / d;
      const double cand_res = std::abs(p.eval(candidate));
      if (!(cand_res < res)) break;
      r = candidate;
      res = cand_res;
    }
    roots.push_back(r);
  }
  return roots;
}

}  // namespace cyclostab
