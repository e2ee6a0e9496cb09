#pragma once

// Per-subsystem index gamma_k: sample the Nyquist diagram of G_k, find the
// scaling of the Mobius image of the unit disk that contains it, and check
// that the transformed system H_k is stable by counting encirclements.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cyclostab/criterion.hpp"
#include "cyclostab/error.hpp"
#include "cyclostab/hinf.hpp"
#include "cyclostab/mobius.hpp"
#include "cyclostab/systems.hpp"

namespace cyclostab {

/// (d G/gamma - b) / (a - c G/gamma) at s = i omega.
inline Complex h_transform(const DelaySystem& sys, const MobiusParams& p, double gamma, double omega) {
  const Complex g = freq_response(sys, omega) / gamma;
  const Complex den = p.a() - p.c() * g;
  if (std::abs(den) < 1e-12 * std::max(std::abs(p.a()), std::abs(p.c() * g))) {
    throw Error(ErrorCode::kTransformPole, "G(i omega) sits on the preimage of the H pole");
  }
  return (p.d() * g - p.b()) / den;
}

/// H = (d N - b gamma M) / (a gamma M - c N) for G = N / M.
inline RationalSystem transformed_system(const RationalSystem& g, const MobiusParams& p, double gamma) {
  return RationalSystem(p.d() * g.num() - (p.b() * gamma) * g.den(),
                        (p.a() * gamma) * g.den() - p.c() * g.num());
}

// ---------------------------------------------------------------------------
// Nyquist curves.

struct NyquistSample {
  double omega;
  Complex value;
};

struct NyquistCurve {
  /// Ordered by omega.
  std::vector<NyquistSample> samples;
  /// Value approached as |omega| -> inf.
  Complex limit{};
  /// A delayed biproper system never settles: its tail circles the origin at
  /// radius |limit|.
  bool limit_is_ring = false;

  /// A closed polygon through the given points (used for plain curves).
  static NyquistCurve polygon(const std::vector<Complex>& points) {
    NyquistCurve c;
    for (std::size_t i = 0; i < points.size(); ++i) c.samples.push_back({static_cast<double>(i), points[i]});
    if (!points.empty()) c.limit = points.front();
    return c;
  }

  double scale() const {
    double s = std::abs(limit);
    for (const auto& x : samples) s = std::max(s, std::abs(x.value));
    return s;
  }

  /// Samples followed by the limit point; the contour closes back to the first sample.
  std::vector<Complex> contour() const {
    std::vector<Complex> out;
    out.reserve(samples.size() + 1);
    for (const auto& x : samples) out.push_back(x.value);
    if (!limit_is_ring) out.push_back(limit);
    return out;
  }

  /// Every point the containment scaling has to respect.
  std::vector<Complex> containment_points() const {
    std::vector<Complex> out = contour();
    if (limit_is_ring) {
      const double r = std::abs(limit);
      for (int k = 0; k < 360; ++k) out.push_back(std::polar(r, 2.0 * std::numbers::pi * k / 360.0));
    }
    return out;
  }
};

/// 10^3 times the largest pole/zero magnitude plus 1/tau.
inline double default_omega_max(const DelaySystem& sys) {
  double m = 0.0;
  for (const Complex& r : sys.rational().poles()) m = std::max(m, std::abs(r));
  for (const Complex& r : sys.rational().zeros()) m = std::max(m, std::abs(r));
  if (sys.has_delay()) m += 1.0 / sys.delay();
  return m > 0.0 ? 1e3 * m : 1e3;
}

inline NyquistCurve nyquist_sample(const DelaySystem& sys, double omega_max, int n_points) {
  const RationalSystem& g = sys.rational();
  NyquistCurve curve;
  if (g.is_constant() && !sys.has_delay()) {
    const Complex k = g.num().coefficient(0) / g.den().coefficient(0);
    curve.samples.push_back({0.0, k});
    curve.limit = k;
    return curve;
  }
  if (has_imaginary_axis_root(g.den())) {
    throw Error(ErrorCode::kPoleOnAxis, "system has imaginary-axis poles; the Nyquist contour needs indentation");
  }
  if (!(omega_max > 0.0)) throw Error(ErrorCode::kInvalidArgument, "omega_max must be positive");
  if (!g.is_proper()) throw Error(ErrorCode::kImproperSystem, "Nyquist sampling needs a proper system");

  const int half = std::max(n_points / 2, 8);
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(2 * half + 1));
  grid.push_back(0.0);
  const double log_lo = std::log10(omega_max) - 9.0;
  const double log_hi = std::log10(omega_max);
  for (int i = 0; i < half; ++i) {
    grid.push_back(std::pow(10.0, log_lo + (log_hi - log_lo) * i / (half - 1)));
    grid.push_back(omega_max * (i + 1) / half);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<NyquistSample> pos;
  pos.reserve(grid.size());
  for (double w : grid) pos.push_back({w, freq_response(sys, w)});

  double scale = std::numeric_limits<double>::min();
  for (const auto& x : pos) scale = std::max(scale, std::abs(x.value));
  for (int level = 0; level < 12; ++level) {
    std::vector<NyquistSample> refined;
    refined.reserve(pos.size() * 2);
    bool changed = false;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      refined.push_back(pos[i]);
      if (i + 1 == pos.size()) break;
      if (std::abs(pos[i + 1].value - pos[i].value) > 2e-3 * scale) {
        const double mid = 0.5 * (pos[i].omega + pos[i + 1].omega);
        refined.push_back({mid, freq_response(sys, mid)});
        changed = true;
      }
    }
    pos = std::move(refined);
    if (!changed) break;
  }

  curve.samples.reserve(2 * pos.size());
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) {
    if (it->omega == 0.0) continue;
    curve.samples.push_back({-it->omega, std::conj(it->value)});
  }
  curve.samples.insert(curve.samples.end(), pos.begin(), pos.end());

  const int dn = g.den().degree();
  const double direct = g.num().degree() == dn ? g.num().leading() / g.den().leading() : 0.0;
  curve.limit = direct;
  curve.limit_is_ring = sys.has_delay() && direct != 0.0;
  return curve;
}

// ---------------------------------------------------------------------------
// Containment scaling.

struct ClosedInterval {
  double lo;
  double hi;
};

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

// {gamma >= 0 : qa gamma^2 + qb gamma + qc >= 0}; `linear` forces qa = 0.
inline std::vector<ClosedInterval> nonnegative_set(double qa, double qb, double qc, bool linear) {
  if (linear || qa == 0.0) {
    if (qb == 0.0) return qc >= 0.0 ? std::vector<ClosedInterval>{{0.0, kInf}} : std::vector<ClosedInterval>{};
    const double root = -qc / qb;
    if (qb > 0.0) return {{std::max(root, 0.0), kInf}};
    if (root < 0.0) return {};
    return {{0.0, root}};
  }
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) return qa > 0.0 ? std::vector<ClosedInterval>{{0.0, kInf}} : std::vector<ClosedInterval>{};
  const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
  double r1 = q != 0.0 ? q / qa : 0.0;
  double r2 = q != 0.0 ? qc / q : 0.0;
  if (r1 > r2) std::swap(r1, r2);
  std::vector<ClosedInterval> out;
  if (qa > 0.0) {
    if (r1 >= 0.0) out.push_back({0.0, r1});
    out.push_back({std::max(r2, 0.0), kInf});
  } else if (r2 >= 0.0) {
    out.push_back({std::max(r1, 0.0), r2});
  }
  return out;
}

inline std::vector<ClosedInterval> intersect(const std::vector<ClosedInterval>& x,
                                             const std::vector<ClosedInterval>& y) {
  std::vector<ClosedInterval> out;
  for (const auto& u : x) {
    for (const auto& v : y) {
      const double lo = std::max(u.lo, v.lo);
      const double hi = std::min(u.hi, v.hi);
      if (lo <= hi) out.push_back({lo, hi});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
  return out;
}

}  // namespace detail

/// Closed set of gamma >= 0 for which the single point w lies in the scaled region.
inline std::vector<ClosedInterval> point_containment_set(const GeneralizedDisk& unit_image, Complex w) {
  if (unit_image.kind == DiskKind::kHalfplane) {
    // Re(conj(n) (w - gamma p)) >= 0.
    const Complex n = unit_image.inward_normal;
    return detail::nonnegative_set(0.0, -(std::conj(n) * unit_image.boundary_point).real(),
                                   (std::conj(n) * w).real(), true);
  }
  // |w - gamma c|^2 versus gamma^2 r^2.
  const double c2 = std::norm(unit_image.center);
  const double r2 = unit_image.radius * unit_image.radius;
  const bool linear = std::abs(r2 - c2) <= 1e-14 * (r2 + c2);
  const double qa = r2 - c2;
  const double qb = 2.0 * (w * std::conj(unit_image.center)).real();
  const double qc = -std::norm(w);
  if (unit_image.kind == DiskKind::kInterior) return detail::nonnegative_set(qa, qb, qc, linear);
  return detail::nonnegative_set(-qa, -qb, -qc, linear);
}

/// Intersection over every curve point: the scalings that contain the whole diagram.
inline std::vector<ClosedInterval> containment_set(const NyquistCurve& curve, const MobiusParams& p) {
  const GeneralizedDisk image = unit_disk_image(ScaledMobiusDisk(p, 1.0));
  std::vector<ClosedInterval> set{{0.0, detail::kInf}};
  for (const Complex& w : curve.containment_points()) {
    set = detail::intersect(set, point_containment_set(image, w));
    if (set.empty()) break;
  }
  // gamma = 0 alone is not a scaling.
  std::erase_if(set, [](const ClosedInterval& iv) { return !(iv.hi > 0.0); });
  return set;
}

/// Smallest scaling whose region contains the whole curve.
inline double min_containing_gamma(const NyquistCurve& curve, const MobiusParams& p) {
  const auto set = containment_set(curve, p);
  if (set.empty()) throw Error(ErrorCode::kUnboundable, "no scaling of the disk contains the Nyquist diagram");
  return std::max(set.front().lo, std::numeric_limits<double>::min());
}

/// Largest scaling whose region contains the whole curve.
inline double max_containing_gamma(const NyquistCurve& curve, const MobiusParams& p) {
  const auto set = containment_set(curve, p);
  if (set.empty()) throw Error(ErrorCode::kUnboundable, "no scaling of the disk contains the Nyquist diagram");
  if (std::isinf(set.back().hi)) throw Error(ErrorCode::kUnboundable, "containment holds for arbitrarily large gamma");
  if (!(set.back().hi > 0.0)) throw Error(ErrorCode::kUnboundable, "only gamma = 0 contains the Nyquist diagram");
  return set.back().hi;
}

// ---------------------------------------------------------------------------
// Encirclements.

inline double distance_to_contour(const std::vector<Complex>& pts, Complex point) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Complex a = pts[i];
    const Complex b = pts[(i + 1) % pts.size()];
    const Complex ab = b - a;
    double t = 0.0;
    if (std::norm(ab) > 0.0) t = std::clamp(((point - a) * std::conj(ab)).real() / std::norm(ab), 0.0, 1.0);
    best = std::min(best, std::abs(a + t * ab - point));
  }
  return best;
}

/// Counterclockwise winding of the closed contour about `point`.
inline int winding_number(const NyquistCurve& curve, Complex point) {
  const std::vector<Complex> pts = curve.contour();
  if (pts.empty()) throw Error(ErrorCode::kInvalidArgument, "empty curve");
  if (curve.limit_is_ring && std::abs(point) <= std::abs(curve.limit)) {
    throw Error(ErrorCode::kPointOnCurve, "point lies inside the delayed high-frequency ring; winding is undefined");
  }
  const double scale = std::max({curve.scale(), std::abs(point), std::numeric_limits<double>::min()});
  if (distance_to_contour(pts, point) <= 1e-9 * scale) {
    throw Error(ErrorCode::kPointOnCurve, "point lies on the Nyquist contour");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Complex a = pts[i] - point;
    const Complex b = pts[(i + 1) % pts.size()] - point;
    total += std::arg(b / a);
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

// ---------------------------------------------------------------------------
// The index.

enum class Direction { kMinimize, kMaximize, kBoth };

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::kMinimize: return "minimize";
    case Direction::kMaximize: return "maximize";
    case Direction::kBoth: return "both";
  }
  return "unknown";
}

/// Direction implied by the shape of the admissible set: small indices help
/// when it starts at 0, large ones when it reaches infinity, both when mixed.
inline Direction direction_for(const GammaIntervalSet& admissible) {
  const bool lower = admissible.has_lower_branch();
  const bool upper = admissible.has_upper_branch();
  if (lower && upper && admissible.intervals().size() > 1) return Direction::kBoth;
  if (upper && !lower) return Direction::kMaximize;
  if (!lower && !upper && !admissible.empty()) return Direction::kBoth;
  return Direction::kMinimize;
}

struct IndexBound {
  double gamma = 0.0;
  bool stability_check_passed = false;
  int winding = 0;
  int required_winding = 0;
  bool marginal = false;
};

struct IndexResult {
  double gamma_k = 0.0;
  Direction direction = Direction::kMinimize;
  bool stability_check_passed = false;
  bool marginal = false;
  std::optional<IndexBound> lower;
  std::optional<IndexBound> upper;
  std::string diagnostics;
};

struct IndexOptions {
  double omega_max = 0.0;  // 0: default_omega_max
  int n_points = 4000;
  bool strict = false;     // throw StabilityCheckFailed instead of reporting it
};

namespace detail {

inline IndexBound check_transform_stability(const DelaySystem& sys, const NyquistCurve& curve,
                                            const MobiusParams& p, double gamma, std::ostringstream& diag) {
  IndexBound b;
  b.gamma = gamma;
  const int open_loop_unstable = count_crhp_roots(sys.rational().den());
  b.required_winding = open_loop_unstable;
  if (p.c() == 0.0) {
    // H = (d G / gamma - b) / a inherits the poles of G.
    b.stability_check_passed = open_loop_unstable == 0;
    return b;
  }
  const Complex point(p.a() * gamma / p.c(), 0.0);
  const double scale = std::max(curve.scale(), std::abs(point));
  const double dist = distance_to_contour(curve.contour(), point);
  b.marginal = dist <= 1e-6 * scale;
  try {
    b.winding = winding_number(curve, point);
    b.stability_check_passed = b.winding == b.required_winding;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kPointOnCurve) throw;
    b.marginal = true;
    b.stability_check_passed = false;
    diag << "pole preimage " << point.real() << " on the contour; ";
  }
  return b;
}

}  // namespace detail

inline IndexResult subsystem_index(const DelaySystem& sys, const MobiusParams& p, Direction want,
                                   const IndexOptions& options = {}) {
  const double omega_max = options.omega_max > 0.0 ? options.omega_max : default_omega_max(sys);
  const NyquistCurve curve = nyquist_sample(sys, omega_max, options.n_points);
  const auto set = containment_set(curve, p);
  if (set.empty()) throw Error(ErrorCode::kUnboundable, "no scaling of the disk contains the Nyquist diagram");

  std::ostringstream diag;
  diag.precision(12);
  diag << "omega_max=" << omega_max << "; samples=" << curve.samples.size() << "; ";

  IndexResult out;
  out.direction = want;
  if (want == Direction::kMinimize || want == Direction::kBoth) {
    double g = set.front().lo;
    if (!(g > 0.0)) {
      g = std::numeric_limits<double>::min();
      diag << "diagram fits at every scale; index clamped to the smallest positive double; ";
    }
    out.lower = detail::check_transform_stability(sys, curve, p, g, diag);
  }
  if (want == Direction::kMaximize || want == Direction::kBoth) {
    const double g = set.back().hi;
    if (std::isinf(g) || !(g > 0.0)) {
      if (want == Direction::kMaximize) {
        throw Error(ErrorCode::kUnboundable, "no finite largest scaling contains the Nyquist diagram");
      }
      diag << "no finite largest scaling; ";
    } else {
      out.upper = detail::check_transform_stability(sys, curve, p, g, diag);
    }
  }
  const IndexBound& chosen = out.lower ? *out.lower : *out.upper;
  out.gamma_k = chosen.gamma;
  out.stability_check_passed = chosen.stability_check_passed;
  out.marginal = chosen.marginal;
  if (!out.stability_check_passed) {
    diag << "transformed system unstable: winding " << chosen.winding << ", required " << chosen.required_winding
         << "; ";
  }
  out.diagnostics = diag.str();
  if (options.strict && !out.stability_check_passed) {
    throw Error(ErrorCode::kStabilityCheckFailed,
                "winding " + std::to_string(chosen.winding) + " != required " +
                    std::to_string(chosen.required_winding));
  }
  return out;
}

}  // namespace cyclostab
