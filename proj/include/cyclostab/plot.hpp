#pragma once

// Nyquist diagram export: a CSV of samples and a self-contained 800x800 SVG
// with the unit-scale and index-scale disk images.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "cyclostab/analysis.hpp"
#include "cyclostab/indexing.hpp"
#include "cyclostab/mobius.hpp"

namespace cyclostab {

struct NyquistPlot {
  int subsystem = 1;  // 1-based
  MobiusParams mobius = MobiusParams::identity();
  NyquistCurve curve;
  double gamma = 1.0;
  GeneralizedDisk unit_image;
  GeneralizedDisk scaled_image;
};

inline NyquistPlot make_nyquist_plot(const DelaySystem& sys, const MobiusParams& p, int subsystem, double gamma,
                                     double omega_max, int n_points) {
  NyquistPlot plot;
  plot.subsystem = subsystem;
  plot.mobius = p;
  plot.curve = nyquist_sample(sys, omega_max > 0.0 ? omega_max : default_omega_max(sys), n_points);
  plot.gamma = gamma;
  plot.unit_image = unit_disk_image(ScaledMobiusDisk(p, 1.0));
  plot.scaled_image = unit_disk_image(ScaledMobiusDisk(p, gamma));
  return plot;
}

/// Columns omega,re,im; negative frequencies first, then increasing omega.
inline std::string nyquist_csv(const NyquistCurve& curve) {
  std::string out = "omega,re,im\n";
  char buf[96];
  for (const auto& s : curve.samples) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", s.omega, s.value.real(), s.value.imag());
    out += buf;
  }
  return out;
}

namespace detail {

struct Viewport {
  double x0 = -1.0, y0 = -1.0, span = 2.0;
  static constexpr double kSize = 800.0;
  static constexpr double kMargin = 40.0;

  double px(double x) const { return kMargin + (x - x0) / span * (kSize - 2 * kMargin); }
  double py(double y) const { return kSize - kMargin - (y - y0) / span * (kSize - 2 * kMargin); }
  double len(double r) const { return r / span * (kSize - 2 * kMargin); }
};

inline void extend(double& lo, double& hi, double v) {
  if (!std::isfinite(v)) return;
  lo = std::min(lo, v);
  hi = std::max(hi, v);
}

inline Viewport fit_viewport(const NyquistPlot& plot) {
  double xlo = 0.0, xhi = 0.0, ylo = 0.0, yhi = 0.0;
  for (const Complex& z : plot.curve.contour()) {
    extend(xlo, xhi, z.real());
    extend(ylo, yhi, z.imag());
  }
  for (const GeneralizedDisk* d : {&plot.unit_image, &plot.scaled_image}) {
    if (d->kind == DiskKind::kHalfplane) {
      extend(xlo, xhi, d->boundary_point.real());
      extend(ylo, yhi, d->boundary_point.imag());
    } else {
      extend(xlo, xhi, d->center.real() - d->radius);
      extend(xlo, xhi, d->center.real() + d->radius);
      extend(ylo, yhi, d->center.imag() - d->radius);
      extend(ylo, yhi, d->center.imag() + d->radius);
    }
  }
  Viewport v;
  v.span = std::max({xhi - xlo, yhi - ylo, 1e-12}) * 1.1;
  v.x0 = 0.5 * (xlo + xhi) - 0.5 * v.span;
  v.y0 = 0.5 * (ylo + yhi) - 0.5 * v.span;
  return v;
}

inline std::string fmt(double x, const char* format = "%.2f") {
  char buf[48];
  std::snprintf(buf, sizeof buf, format, x);
  return buf;
}

inline std::string disk_svg(const GeneralizedDisk& d, const Viewport& v, const std::string& id, double gamma,
                            const char* fill, const char* stroke) {
  std::string meta = "id=\"" + id + "\" data-kind=\"" + to_string(d.kind) + "\" data-gamma=\"" +
                     fmt(gamma, "%.12g") + "\"";
  const double s = Viewport::kSize;
  if (d.kind == DiskKind::kHalfplane) {
    // Clip the half-plane to a large square around the viewport.
    const Complex n = d.inward_normal;
    const Complex t(-n.imag(), n.real());
    const double far = 4.0 * v.span + std::abs(d.boundary_point - Complex(v.x0, v.y0));
    const Complex p = d.boundary_point;
    const Complex corners[4] = {p - far * t, p + far * t, p + far * t + far * n, p - far * t + far * n};
    std::string pts;
    for (const Complex& c : corners) pts += fmt(v.px(c.real())) + "," + fmt(v.py(c.imag())) + " ";
    pts.pop_back();
    return "<polygon " + meta + " data-boundary-re=\"" + fmt(p.real(), "%.12g") + "\" data-boundary-im=\"" +
           fmt(p.imag(), "%.12g") + "\" data-normal-re=\"" + fmt(n.real(), "%.12g") + "\" data-normal-im=\"" +
           fmt(n.imag(), "%.12g") + "\" points=\"" + pts + "\" fill=\"" + fill + "\" fill-opacity=\"0.35\" stroke=\"" +
           stroke + "\"/>\n";
  }
  const std::string cx = fmt(v.px(d.center.real()));
  const std::string cy = fmt(v.py(d.center.imag()));
  const std::string r = fmt(v.len(d.radius));
  meta += " data-center-re=\"" + fmt(d.center.real(), "%.12g") + "\" data-center-im=\"" +
          fmt(d.center.imag(), "%.12g") + "\" data-radius=\"" + fmt(d.radius, "%.12g") + "\"";
  if (d.kind == DiskKind::kInterior) {
    return "<circle " + meta + " cx=\"" + cx + "\" cy=\"" + cy + "\" r=\"" + r + "\" fill=\"" + fill +
           "\" fill-opacity=\"0.35\" stroke=\"" + stroke + "\"/>\n";
  }
  // Exterior: shade the viewport minus the hole, then draw the boundary circle.
  const double rr = v.len(d.radius);
  const double xc = v.px(d.center.real());
  const double yc = v.py(d.center.imag());
  std::string path = "M0,0 H" + fmt(s) + " V" + fmt(s) + " H0 Z M" + fmt(xc - rr) + "," + fmt(yc) + " A" +
                     fmt(rr) + "," + fmt(rr) + " 0 1 0 " + fmt(xc + rr) + "," + fmt(yc) + " A" + fmt(rr) + "," +
                     fmt(rr) + " 0 1 0 " + fmt(xc - rr) + "," + fmt(yc) + " Z";
  return "<path d=\"" + path + "\" fill-rule=\"evenodd\" fill=\"" + fill + "\" fill-opacity=\"0.35\"/>\n" +
         "<circle " + meta + " cx=\"" + cx + "\" cy=\"" + cy + "\" r=\"" + r + "\" fill=\"none\" stroke=\"" + stroke +
         "\"/>\n";
}

}  // namespace detail

inline std::string nyquist_svg(const NyquistPlot& plot) {
  const detail::Viewport v = detail::fit_viewport(plot);
  using detail::fmt;
  std::string out =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">\n";
  out += "<metadata id=\"cyclostab\">{\"subsystem\":" + std::to_string(plot.subsystem) +
         ",\"gamma\":" + fmt(plot.gamma, "%.12g") + ",\"samples\":" + std::to_string(plot.curve.samples.size()) +
         "}</metadata>\n";
  out += "<rect width=\"800\" height=\"800\" fill=\"white\"/>\n";
  out += "<defs><clipPath id=\"view\"><rect width=\"800\" height=\"800\"/></clipPath></defs>\n";
  out += "<g clip-path=\"url(#view)\">\n";
  out += detail::disk_svg(plot.unit_image, v, "unit-disk", 1.0, "#c8c8c8", "#909090");
  out += detail::disk_svg(plot.scaled_image, v, "scaled-disk", plot.gamma, "#606060", "#303030");

  // Axes through the origin.
  out += "<line id=\"axis-re\" x1=\"0\" y1=\"" + fmt(v.py(0.0)) + "\" x2=\"800\" y2=\"" + fmt(v.py(0.0)) +
         "\" stroke=\"#000\" stroke-width=\"0.5\"/>\n";
  out += "<line id=\"axis-im\" x1=\"" + fmt(v.px(0.0)) + "\" y1=\"0\" x2=\"" + fmt(v.px(0.0)) +
         "\" y2=\"800\" stroke=\"#000\" stroke-width=\"0.5\"/>\n";

  const std::vector<Complex> pts = plot.curve.contour();
  if (plot.curve.samples.size() <= 1) {
    out += "<circle id=\"nyquist-point\" cx=\"" + fmt(v.px(pts[0].real())) + "\" cy=\"" + fmt(v.py(pts[0].imag())) +
           "\" r=\"4\" fill=\"#0050c8\"/>\n";
  } else {
    out += "<polyline id=\"nyquist\" fill=\"none\" stroke=\"#0050c8\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) out += ' ';
      out += fmt(v.px(pts[i].real())) + "," + fmt(v.py(pts[i].imag()));
    }
    out += "\"/>\n";
  }
  if (plot.mobius.c() != 0.0) {
    const double x = v.px(plot.mobius.a() * plot.gamma / plot.mobius.c());
    const double y = v.py(0.0);
    out += "<path id=\"pole-preimage\" d=\"M" + fmt(x - 5) + "," + fmt(y - 5) + " L" + fmt(x + 5) + "," +
           fmt(y + 5) + " M" + fmt(x - 5) + "," + fmt(y + 5) + " L" + fmt(x + 5) + "," + fmt(y - 5) +
           "\" stroke=\"#c80000\" stroke-width=\"1.5\"/>\n";
  }
  out += "</g>\n";

  out += "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"13\">\n";
  out += "<text x=\"12\" y=\"20\">G" + std::to_string(plot.subsystem) + "(i omega), " +
         std::to_string(plot.curve.samples.size()) + " samples</text>\n";
  out += "<text x=\"12\" y=\"38\" fill=\"#606060\">unit-scale disk image (gamma = 1, " +
         std::string(to_string(plot.unit_image.kind)) + ")</text>\n";
  out += "<text x=\"12\" y=\"56\" fill=\"#303030\">index-scale disk image (gamma = " + format_number(plot.gamma) +
         ")</text>\n";
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace cyclostab
