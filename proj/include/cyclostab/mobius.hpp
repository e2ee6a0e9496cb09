#pragma once

// Scaled Mobius maps f(z) = gamma (a z + b) / (c z + d) with real a, b, c, d,
// and the generalised disks they carve out of the extended plane.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "cyclostab/error.hpp"

namespace cyclostab {

using Complex = std::complex<double>;

/// A point of the extended complex plane. Arithmetic never happens on the
/// infinite point directly; callers branch on `infinite`.
struct ExtendedComplex {
  Complex value{};
  bool infinite = false;

  ExtendedComplex() = default;
  ExtendedComplex(Complex v) : value(v) {}  // NOLINT(implicit)
  ExtendedComplex(double v) : value(v) {}   // NOLINT(implicit)

  static ExtendedComplex infinity() {
    ExtendedComplex w;
    w.infinite = true;
    return w;
  }
};

class MobiusParams {
 public:
  MobiusParams(double a, double b, double c, double d) : a_(a), b_(b), c_(c), d_(d) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(d)) {
      throw Error(ErrorCode::kInvalidArgument, "Mobius coefficients must be finite");
    }
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
    if (!(std::abs(determinant()) > 1e-12 * scale * scale)) {
      throw Error(ErrorCode::kInvalidArgument, "Mobius map is degenerate (ad - bc = 0)");
    }
  }

  static MobiusParams identity() { return {1.0, 0.0, 0.0, 1.0}; }

  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }
  double d() const { return d_; }
  double determinant() const { return a_ * d_ - b_ * c_; }

  friend bool operator==(const MobiusParams&, const MobiusParams&) = default;

 private:
  double a_;
  double b_;
  double c_;
  double d_;
};

class ScaledMobiusDisk {
 public:
  ScaledMobiusDisk(MobiusParams params, double gamma) : params_(params), gamma_(gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
      throw Error(ErrorCode::kInvalidArgument, "disk scaling gamma must be positive and finite");
    }
  }

  const MobiusParams& params() const { return params_; }
  double gamma() const { return gamma_; }

 private:
  MobiusParams params_;
  double gamma_;
};

enum class DiskKind { kInterior, kExterior, kHalfplane };

inline const char* to_string(DiskKind kind) {
  switch (kind) {
    case DiskKind::kInterior: return "interior";
    case DiskKind::kExterior: return "exterior";
    case DiskKind::kHalfplane: return "halfplane";
  }
  return "unknown";
}

/// Closed region of the extended plane. For circles `center`/`radius` are
/// meaningful; for half-planes `boundary_point`/`inward_normal` are.
struct GeneralizedDisk {
  DiskKind kind = DiskKind::kInterior;
  Complex center{};
  double radius = 0.0;
  Complex boundary_point{};
  Complex inward_normal{1.0, 0.0};

  static GeneralizedDisk interior(Complex center, double radius) {
    return {DiskKind::kInterior, center, radius, {}, {1.0, 0.0}};
  }
  static GeneralizedDisk exterior(Complex center, double radius) {
    return {DiskKind::kExterior, center, radius, {}, {1.0, 0.0}};
  }
  static GeneralizedDisk halfplane(Complex boundary_point, Complex inward_normal) {
    return {DiskKind::kHalfplane, {}, 0.0, boundary_point, inward_normal / std::abs(inward_normal)};
  }

  bool contains_infinity() const { return kind != DiskKind::kInterior; }

  /// The region multiplied by gamma (a homothety about the origin).
  GeneralizedDisk scaled(double gamma) const {
    GeneralizedDisk out = *this;
    out.center *= gamma;
    out.radius *= gamma;
    out.boundary_point *= gamma;
    return out;
  }
};

inline ExtendedComplex mobius_eval(const MobiusParams& p, double gamma, Complex z) {
  const Complex den = p.c() * z + p.d();
  if (den == Complex(0.0, 0.0)) return ExtendedComplex::infinity();
  return ExtendedComplex(gamma * (p.a() * z + p.b()) / den);
}

inline ExtendedComplex mobius_eval(const MobiusParams& p, double gamma, const ExtendedComplex& z) {
  if (!z.infinite) return mobius_eval(p, gamma, z.value);
  if (p.c() == 0.0) return ExtendedComplex::infinity();
  return ExtendedComplex(Complex(gamma * p.a() / p.c(), 0.0));
}

/// z = (d w/gamma - b) / (-c w/gamma + a), the preimage of w.
inline ExtendedComplex inverse_map(const MobiusParams& p, double gamma, const ExtendedComplex& w) {
  if (w.infinite) {
    if (p.c() == 0.0) return ExtendedComplex::infinity();
    return ExtendedComplex(Complex(-p.d() / p.c(), 0.0));
  }
  const Complex u = w.value / gamma;
  const Complex den = -p.c() * u + p.a();
  if (den == Complex(0.0, 0.0)) return ExtendedComplex::infinity();
  return ExtendedComplex((p.d() * u - p.b()) / den);
}

namespace detail {

// |c| == |d| within 1e-12 relative; the pole -d/c then sits on the unit circle.
inline bool is_halfplane_case(const MobiusParams& p) {
  const double ac = std::abs(p.c());
  const double ad = std::abs(p.d());
  return std::abs(ac - ad) <= 1e-12 * std::max(ac, ad);
}

}  // namespace detail

/// Closed-form image of the closed unit disk under gamma * f.
inline GeneralizedDisk unit_disk_image(const ScaledMobiusDisk& disk) {
  const MobiusParams& p = disk.params();
  const double gamma = disk.gamma();
  if (detail::is_halfplane_case(p)) {
    // The pole sits at z = +1 or z = -1; the other endpoint maps to a finite
    // boundary point. Real coefficients make the boundary a vertical line.
    const double plus = std::abs(p.c() + p.d());
    const double minus = std::abs(-p.c() + p.d());
    const double z_finite = plus >= minus ? 1.0 : -1.0;
    const Complex boundary = gamma * (p.a() * z_finite + p.b()) / (p.c() * z_finite + p.d());
    const Complex inner = gamma * p.b() / p.d();  // image of z = 0, d != 0 here
    Complex normal = inner - boundary;
    normal = Complex(normal.real() >= 0.0 ? 1.0 : -1.0, 0.0);
    return GeneralizedDisk::halfplane(Complex(boundary.real(), 0.0), normal);
  }
  const double denom = p.d() * p.d() - p.c() * p.c();
  const Complex center(gamma * (p.b() * p.d() - p.a() * p.c()) / denom, 0.0);
  const double radius = gamma * std::abs(p.determinant()) / std::abs(denom);
  if (std::abs(p.c()) < std::abs(p.d())) return GeneralizedDisk::interior(center, radius);
  return GeneralizedDisk::exterior(center, radius);
}

/// Signed, scale-relative distance of w outside the closed region: <= 0 means
/// contained. Infinity maps to -inf (contained) or +inf (outside).
inline double disk_excess(const GeneralizedDisk& disk, const ExtendedComplex& w) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (w.infinite) return disk.contains_infinity() ? -kInf : kInf;
  switch (disk.kind) {
    case DiskKind::kInterior: {
      const double scale = disk.radius + std::abs(disk.center);
      return (std::abs(w.value - disk.center) - disk.radius) / scale;
    }
    case DiskKind::kExterior: {
      const double scale = disk.radius + std::abs(disk.center);
      return (disk.radius - std::abs(w.value - disk.center)) / scale;
    }
    case DiskKind::kHalfplane: {
      const double scale = std::max({std::abs(disk.boundary_point), std::abs(w.value),
                                     std::numeric_limits<double>::min()});
      const double signed_depth =
          (std::conj(disk.inward_normal) * (w.value - disk.boundary_point)).real();
      return -signed_depth / scale;
    }
  }
  return kInf;
}

/// Membership in the closed region, with an optional relative slack.
inline bool disk_contains(const GeneralizedDisk& disk, const ExtendedComplex& w,
                          double rel_tol = 0.0) {
  return disk_excess(disk, w) <= rel_tol;
}

}  // namespace cyclostab
