#pragma once

// H-infinity norm of a stable SISO realisation via the Hamiltonian
// imaginary-axis eigenvalue test, and the bounded-real storage matrix P.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cyclostab/error.hpp"
#include "cyclostab/systems.hpp"

namespace cyclostab {

struct HinfBracket {
  double lower = 0.0;  // attained by an actual evaluation |G(i peak_omega)|
  double upper = 0.0;  // Hamiltonian has no imaginary-axis eigenvalue at this level
  double peak_omega = 0.0;
};

namespace detail {

// Bruinsma-Steinbuch Hamiltonian for level gamma > |D|.
inline Eigen::MatrixXd bounded_real_hamiltonian(const StateSpace& ss, double gamma) {
  const int m = ss.order();
  const double r = ss.D * ss.D - gamma * gamma;  // R = S for SISO
  Eigen::MatrixXd h(2 * m, 2 * m);
  const Eigen::MatrixXd bc = ss.B * ss.C;
  h.topLeftCorner(m, m) = ss.A - (ss.D / r) * bc;
  h.topRightCorner(m, m) = (-gamma / r) * ss.B * ss.B.transpose();
  h.bottomLeftCorner(m, m) = (gamma / r) * ss.C.transpose() * ss.C;
  h.bottomRightCorner(m, m) = -ss.A.transpose() + (ss.D / r) * bc.transpose();
  return h;
}

inline std::vector<double> imaginary_axis_frequencies(const Eigen::MatrixXd& h) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(h, false);
  const double tol = 1e-8 * std::max(1.0, h.cwiseAbs().maxCoeff());
  std::vector<double> out;
  for (int i = 0; i < solver.eigenvalues().size(); ++i) {
    const Complex ev = solver.eigenvalues()(i);
    if (std::abs(ev.real()) <= tol && ev.imag() >= 0.0) out.push_back(ev.imag());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Two-sided bracket on the H-infinity norm (Boyd-Balakrishnan-Bruinsma-Steinbuch
/// iteration: each Hamiltonian solve either certifies an upper bound or yields
/// frequencies where the gain exceeds the current lower bound).
inline HinfBracket hinf_norm(const StateSpace& ss, double rel_tol = 1e-11) {
  HinfBracket out;
  if (ss.order() == 0) {
    out.lower = out.upper = std::abs(ss.D);
    return out;
  }
  if (!ss.is_hurwitz()) throw Error(ErrorCode::kNotHurwitz, "A has eigenvalues with real part >= -1e-9");

  auto gain = [&](double w) { return std::abs(ss.eval(Complex(0.0, w))); };
  out.lower = std::abs(ss.D);
  const auto consider = [&](double w) {
    const double g = gain(w);
    if (g > out.lower) {
      out.lower = g;
      out.peak_omega = w;
    }
  };
  consider(0.0);
  const Eigen::VectorXcd poles = ss.A.eigenvalues();
  for (int i = 0; i < poles.size(); ++i) {
    consider(std::abs(poles(i).imag()));
    consider(std::abs(poles(i)));
  }

  constexpr double kFloor = 1e-150;
  for (int iter = 0; iter < 200; ++iter) {
    const double level = std::max(out.lower, kFloor) * (1.0 + 2.0 * rel_tol);
    const std::vector<double> freqs =
        detail::imaginary_axis_frequencies(detail::bounded_real_hamiltonian(ss, level));
    if (freqs.empty()) {
      out.upper = level;
      return out;
    }
    const double before = out.lower;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      consider(freqs[i]);
      if (i + 1 < freqs.size()) {
        const double mid = freqs[i] > 0.0 ? std::sqrt(freqs[i] * freqs[i + 1]) : 0.5 * freqs[i + 1];
        consider(mid);
        consider(0.5 * (freqs[i] + freqs[i + 1]));
      }
    }
    if (!(out.lower > before * (1.0 + 0.1 * rel_tol))) {
      // Crossings persist but no higher gain is found: numerically converged.
      out.upper = level;
      return out;
    }
  }
  throw Error(ErrorCode::kNonConvergence, "H-infinity bracketing did not converge");
}

/// ||C (sI - A)^{-1} B + D||_inf <= 1, decided to within 1e-9 on the norm.
inline bool hinf_le_one(const StateSpace& ss) {
  const HinfBracket b = hinf_norm(ss);
  return b.lower <= 1.0;
}

/// The bounded-real block matrix for a candidate storage P.
inline Eigen::MatrixXd kyp_lmi_matrix(const StateSpace& ss, const Eigen::MatrixXd& p) {
  const int m = ss.order();
  Eigen::MatrixXd out(m + 1, m + 1);
  out.topLeftCorner(m, m) = ss.A.transpose() * p + p * ss.A + ss.C.transpose() * ss.C;
  const Eigen::VectorXd off = ss.C.transpose() * ss.D + p * ss.B;
  out.topRightCorner(m, 1) = off;
  out.bottomLeftCorner(1, m) = off.transpose();
  out(m, m) = ss.D * ss.D - 1.0;
  return out;
}

namespace detail {

// Newton iteration with determinant scaling for sign(H).
inline Eigen::MatrixXd matrix_sign(const Eigen::MatrixXd& h) {
  const int n = static_cast<int>(h.rows());
  Eigen::MatrixXd z = h;
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(z);
    const double logdet = lu.matrixLU().diagonal().cwiseAbs().array().log().sum();
    const double c = std::exp(-logdet / n);
    const Eigen::MatrixXd next = 0.5 * (c * z + lu.inverse() / c);
    const double change = (next - z).cwiseAbs().maxCoeff();
    z = next;
    if (change <= 1e-13 * std::max(1.0, z.cwiseAbs().maxCoeff())) return z;
  }
  throw Error(ErrorCode::kNonConvergence, "matrix sign iteration did not converge");
}

}  // namespace detail

/// Storage matrix P >= 0 making the bounded-real block matrix negative
/// semidefinite; the stabilising solution of the associated Riccati equation.
inline Eigen::MatrixXd kyp_certificate(const StateSpace& ss) {
  const HinfBracket b = hinf_norm(ss);
  if (b.lower > 1.0) throw Error(ErrorCode::kInfeasible, "H-infinity norm exceeds 1");
  if (b.upper > 1.0 - 1e-6) {
    throw Error(ErrorCode::kMarginalCase, "norm within 1e-6 of 1; certificate construction is ill-conditioned");
  }
  const int m = ss.order();
  if (m == 0) return Eigen::MatrixXd(0, 0);

  const double r = 1.0 - ss.D * ss.D;
  const Eigen::MatrixXd a_bar = ss.A + (ss.D / r) * ss.B * ss.C;
  Eigen::MatrixXd h(2 * m, 2 * m);
  h.topLeftCorner(m, m) = a_bar;
  h.topRightCorner(m, m) = ss.B * ss.B.transpose() / r;
  h.bottomLeftCorner(m, m) = -ss.C.transpose() * ss.C / r;
  h.bottomRightCorner(m, m) = -a_bar.transpose();

  const Eigen::MatrixXd w = detail::matrix_sign(h);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd lhs(2 * m, m);
  lhs << w.topRightCorner(m, m), w.bottomRightCorner(m, m) + id;
  Eigen::MatrixXd rhs(2 * m, m);
  rhs << w.topLeftCorner(m, m) + id, w.bottomLeftCorner(m, m);
  Eigen::MatrixXd p = lhs.colPivHouseholderQr().solve(-rhs);
  p = 0.5 * (p + p.transpose());
  return p;
}

}  // namespace cyclostab
