#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "cyclostab/hinf.hpp"
#include "cyclostab/indexing.hpp"
#include "support.hpp"

namespace cyclostab {
namespace {

constexpr double kPi = std::numbers::pi;

const MobiusParams kExample(2, 1, 1, 3);
const RealPolynomial kOne({1.0});
const RealPolynomial kSPlusOne({1.0, 1.0});

DelaySystem example_g1() { return {RationalSystem(RealPolynomial({4.0}), kSPlusOne), 0.7}; }

// 10^5 log-spaced samples, then a golden-section polish between the best sample's neighbours.
double sweep_peak(const RationalSystem& g) {
  const auto gain = [&](double w) { return std::abs(g.eval(Complex(0.0, w))); };
  double peak = gain(0.0);
  if (g.num().degree() == g.den().degree()) peak = std::max(peak, std::abs(g.num().leading() / g.den().leading()));
  constexpr int kPoints = 100000;
  const auto grid = [](int i) { return std::pow(10.0, -4.0 + 8.0 * i / (kPoints - 1)); };
  int best = 0;
  for (int i = 0; i < kPoints; ++i) {
    if (gain(grid(i)) > gain(grid(best))) best = i;
  }
  double lo = grid(std::max(best - 1, 0));
  double hi = grid(std::min(best + 1, kPoints - 1));
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 100; ++it) {
    const double m1 = hi - r * (hi - lo);
    const double m2 = lo + r * (hi - lo);
    if (gain(m1) < gain(m2)) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  return std::max({peak, gain(grid(best)), gain(0.5 * (lo + hi))});
}

TEST(HTransform, Examples) {
  const DelaySystem lag(RationalSystem(kOne, kSPlusOne));
  for (double w : {0.0, 0.5, 3.0}) {
    EXPECT_NEAR(std::abs(h_transform(lag, MobiusParams::identity(), 1.0, w) - freq_response(lag, w)), 0.0, 1e-15);
  }
  const DelaySystem unit(RationalSystem::gain(1.0));
  EXPECT_NEAR(std::abs(h_transform(unit, MobiusParams(1, 1, 0, 2), 1.0, 0.0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(h_transform(example_g1(), kExample, 16.0 / 3.0, 0.0)), 1.0, 1e-9);
}

TEST(HTransform, PoleOfTransform) {
  // a - c G / gamma = 0 when G = a gamma / c.
  const DelaySystem k(RationalSystem::gain(4.0));
  try {
    h_transform(k, kExample, 2.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTransformPole);
  }
}

TEST(NyquistSample, ConstantIsSinglePoint) {
  const NyquistCurve c = nyquist_sample(DelaySystem(RationalSystem::gain(0.3)), 10.0, 100);
  ASSERT_EQ(c.samples.size(), 1u);
  EXPECT_EQ(c.samples[0].value, Complex(0.3, 0.0));
}

TEST(NyquistSample, FirstOrderLagLiesOnCircle) {
  const NyquistCurve c = nyquist_sample(DelaySystem(RationalSystem(kOne, kSPlusOne)), 1000.0, 2000);
  ASSERT_GT(c.samples.size(), 1000u);
  for (const auto& s : c.samples) EXPECT_NEAR(std::abs(s.value - 0.5), 0.5, 1e-10);
  EXPECT_EQ(c.limit, Complex(0.0, 0.0));
  EXPECT_FALSE(c.limit_is_ring);
  for (std::size_t i = 1; i < c.samples.size(); ++i) EXPECT_LT(c.samples[i - 1].omega, c.samples[i].omega);
}

TEST(NyquistSample, ExampleSystemPeaksAtDc) {
  const NyquistCurve c = nyquist_sample(example_g1(), default_omega_max(example_g1()), 4000);
  const auto peak = std::max_element(c.samples.begin(), c.samples.end(),
                                     [](const auto& x, const auto& y) { return std::abs(x.value) < std::abs(y.value); });
  EXPECT_NEAR(std::abs(peak->value), 4.0, 1e-12);
  EXPECT_EQ(peak->omega, 0.0);
}

TEST(NyquistSample, ConjugateSymmetric) {
  testing::Gen gen(40);
  for (int trial = 0; trial < 20; ++trial) {
    const DelaySystem sys(gen.stable_system(4), gen.uniform(0.0, 1.0));
    const NyquistCurve c = nyquist_sample(sys, default_omega_max(sys), 500);
    const std::size_t n = c.samples.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = c.samples[i];
      const auto& b = c.samples[n - 1 - i];
      EXPECT_EQ(a.omega, -b.omega);
      EXPECT_LE(std::abs(a.value - std::conj(b.value)), 1e-9 * std::max(1.0, std::abs(a.value)));
    }
  }
}

TEST(NyquistSample, RejectsAxisPoles) {
  const DelaySystem integ(RationalSystem(kOne, RealPolynomial({0.0, 1.0})));
  try {
    nyquist_sample(integ, 10.0, 100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPoleOnAxis);
  }
}

TEST(Containment, UnitGainSmallGain) {
  const NyquistCurve c = nyquist_sample(DelaySystem(RationalSystem::gain(1.0)), 1.0, 16);
  EXPECT_NEAR(min_containing_gamma(c, MobiusParams::identity()), 1.0, 1e-15);
}

TEST(Containment, ExampleSystem) {
  const NyquistCurve c = nyquist_sample(example_g1(), default_omega_max(example_g1()), 4000);
  EXPECT_NEAR(min_containing_gamma(c, kExample), 16.0 / 3.0, 1e-3);
}

TEST(Containment, ConstantGainClosedForm) {
  for (double k : {0.1, 0.3, 0.375, 0.4, 2.0}) {
    const NyquistCurve c = nyquist_sample(DelaySystem(RationalSystem::gain(k)), 1.0, 16);
    EXPECT_NEAR(min_containing_gamma(c, kExample), 4.0 * k / 3.0, 1e-14 * k);
  }
}

TEST(Containment, ExteriorKindMaximizes) {
  const NyquistCurve c = nyquist_sample(DelaySystem(RationalSystem::gain(2.0)), 1.0, 16);
  EXPECT_NEAR(max_containing_gamma(c, MobiusParams(0, 1, 1, 0)), 2.0, 1e-14);
  EXPECT_THROW(max_containing_gamma(c, MobiusParams::identity()), Error);
}

TEST(Containment, UnboundableCurve) {
  // The exterior of |w| = gamma never holds the limit point 0 of a strictly proper system.
  const NyquistCurve c = nyquist_sample(DelaySystem(RationalSystem(kOne, kSPlusOne)), 100.0, 200);
  EXPECT_THROW(min_containing_gamma(c, MobiusParams(0, 1, 1, 0)), Error);
}

TEST(ContainmentProperty, ExactBoundaryContact) {
  testing::Gen gen(41);
  int checked = 0;
  for (int trial = 0; trial < 400 && checked < 60; ++trial) {
    const MobiusParams p = gen.mobius();
    const GeneralizedDisk unit = unit_disk_image(ScaledMobiusDisk(p, 1.0));
    if (unit.kind != DiskKind::kInterior || std::abs(unit.center) < 1e-3) continue;
    const DelaySystem sys(gen.stable_system(3));
    const NyquistCurve c = nyquist_sample(sys, default_omega_max(sys), 400);
    const auto set = containment_set(c, p);
    if (set.empty() || !(set.front().lo > 0.0)) continue;
    const double g = set.front().lo;
    if (!(set.front().hi > g * (1 + 1e-6))) continue;
    const auto pts = c.containment_points();
    const GeneralizedDisk above = unit_disk_image(ScaledMobiusDisk(p, g * (1 + 1e-9)));
    for (const Complex& w : pts) EXPECT_TRUE(disk_contains(above, w, 1e-12)) << "trial " << trial;
    const GeneralizedDisk below = unit_disk_image(ScaledMobiusDisk(p, g * (1 - 1e-6)));
    const bool some_outside =
        std::any_of(pts.begin(), pts.end(), [&](const Complex& w) { return !disk_contains(below, w); });
    EXPECT_TRUE(some_outside) << "trial " << trial;
    ++checked;
  }
  EXPECT_EQ(checked, 60);
}

NyquistCurve unit_circle(int n, bool reverse = false) {
  std::vector<Complex> pts;
  for (int i = 0; i < n; ++i) pts.push_back(std::polar(1.0, (reverse ? -1.0 : 1.0) * 2.0 * kPi * i / n));
  return NyquistCurve::polygon(pts);
}

TEST(WindingNumber, Examples) {
  EXPECT_EQ(winding_number(unit_circle(100), 0.0), 1);
  EXPECT_EQ(winding_number(unit_circle(100), 3.0), 0);
  const NyquistCurve g1 = nyquist_sample(example_g1(), default_omega_max(example_g1()), 4000);
  EXPECT_EQ(winding_number(g1, 32.0 / 3.0), 0);
}

TEST(WindingNumber, PointOnCurve) {
  try {
    winding_number(unit_circle(100), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPointOnCurve);
  }
}

TEST(WindingNumberProperty, ReversalAndConcatenation) {
  testing::Gen gen(42);
  for (int trial = 0; trial < 100; ++trial) {
    const Complex p(gen.uniform(-0.9, 0.9) * 0.7, gen.uniform(-0.9, 0.9) * 0.7);
    EXPECT_EQ(winding_number(unit_circle(64), p), 1);
    EXPECT_EQ(winding_number(unit_circle(64, true), p), -1);
    // Two laps of the circle concatenated.
    std::vector<Complex> twice;
    for (int lap = 0; lap < 2; ++lap)
      for (int i = 0; i < 64; ++i) twice.push_back(std::polar(1.0, 2.0 * kPi * i / 64));
    EXPECT_EQ(winding_number(NyquistCurve::polygon(twice), p), 2);
    const Complex far(gen.uniform(2, 5), gen.uniform(-5, 5));
    EXPECT_EQ(winding_number(unit_circle(64), far), 0);
  }
}

TEST(WindingNumber, CountsClockwiseNyquistEncirclement) {
  // 3/(s+1)^3 crosses the negative real axis at -3/8 for omega = +-sqrt(3).
  // 1 + 5G has two right-half-plane roots, so -0.2 is encircled twice clockwise.
  const DelaySystem g(RationalSystem(RealPolynomial({3.0}), RealPolynomial({1.0, 1.0}).pow(3)));
  const NyquistCurve c = nyquist_sample(g, default_omega_max(g), 4000);
  EXPECT_EQ(winding_number(c, -0.2), -2);
  EXPECT_EQ(winding_number(c, -1.0), 0);
}

TEST(SubsystemIndex, ExampleSystem) {
  const IndexResult r = subsystem_index(example_g1(), kExample, Direction::kMinimize);
  EXPECT_NEAR(r.gamma_k, 16.0 / 3.0, 1e-3);
  EXPECT_TRUE(r.stability_check_passed);
  EXPECT_FALSE(r.marginal);
  ASSERT_TRUE(r.lower.has_value());
  EXPECT_EQ(r.lower->winding, 0);
}

TEST(SubsystemIndex, ConstantGain) {
  for (double k : {0.3, 0.4}) {
    const IndexResult r = subsystem_index(DelaySystem(RationalSystem::gain(k)), kExample, Direction::kMinimize);
    EXPECT_NEAR(r.gamma_k, 4.0 * k / 3.0, 1e-14);
    EXPECT_TRUE(r.stability_check_passed);
  }
}

TEST(SubsystemIndex, IdentityParamsGiveHinfNorm) {
  const DelaySystem lag(RationalSystem(kOne, kSPlusOne));
  const IndexResult r = subsystem_index(lag, MobiusParams::identity(), Direction::kMinimize);
  EXPECT_NEAR(r.gamma_k, sweep_peak(lag.rational()), 1e-6);
  EXPECT_NEAR(r.gamma_k, 1.0, 1e-12);
}

TEST(SubsystemIndex, OpenLoopUnstableFailsCheckWithIdentity) {
  const DelaySystem unstable(RationalSystem(RealPolynomial({0.5}), RealPolynomial({-1.0, 1.0})));
  const IndexResult r = subsystem_index(unstable, MobiusParams::identity(), Direction::kMinimize);
  EXPECT_FALSE(r.stability_check_passed);
}

TEST(SubsystemIndex, MaximizeForLargeGain) {
  const IndexResult r =
      subsystem_index(DelaySystem(RationalSystem(RealPolynomial({6.0, 1.0}), RealPolynomial({2.0, 1.0}))),
                      MobiusParams(0, 1, 1, 0), Direction::kMaximize);
  EXPECT_NEAR(r.gamma_k, 1.0, 1e-9);
  ASSERT_TRUE(r.upper.has_value());
  EXPECT_TRUE(r.stability_check_passed);
}

TEST(SubsystemIndexProperty, MatchesHinfNormForIdentity) {
  testing::Gen gen(43);
  for (int trial = 0; trial < 30; ++trial) {
    const RationalSystem g = gen.stable_system(4);
    const IndexResult r = subsystem_index(DelaySystem(g), MobiusParams::identity(), Direction::kMinimize);
    const HinfBracket b = hinf_norm(realize(g));
    EXPECT_NEAR(r.gamma_k, sweep_peak(g), 1e-6 * std::max(1.0, r.gamma_k)) << "trial " << trial;
    EXPECT_NEAR(r.gamma_k, b.lower, 1e-6 * std::max(1.0, b.lower)) << "trial " << trial;
    EXPECT_TRUE(r.stability_check_passed);
  }
}

TEST(SubsystemIndexProperty, HinfOfTransformAgreesWithIndex) {
  testing::Gen gen(44);
  int checked = 0;
  for (int trial = 0; trial < 400 && checked < 40; ++trial) {
    const MobiusParams p = gen.mobius();
    if (unit_disk_image(ScaledMobiusDisk(p, 1.0)).kind != DiskKind::kInterior) continue;
    const RationalSystem g = gen.stable_system(3);
    IndexResult r;
    try {
      r = subsystem_index(DelaySystem(g), p, Direction::kMinimize);
    } catch (const Error&) {
      continue;
    }
    if (!r.stability_check_passed || r.marginal) continue;
    const double gk = r.gamma_k;
    const NyquistCurve c = nyquist_sample(DelaySystem(g), default_omega_max(DelaySystem(g)), 4000);
    const auto set = containment_set(c, p);
    for (double factor : {1.0 + 1e-5, 1.0 - 1e-3}) {
      const double gamma = gk * factor;
      const RationalSystem h = transformed_system(g, p, gamma);
      if (!is_stable(h) || !h.is_proper()) continue;
      const StateSpace ss = realize(h);
      const bool inside = factor > 1.0 && set.front().hi > gamma;
      if (factor > 1.0 && !inside) continue;
      EXPECT_EQ(hinf_le_one(ss), inside) << "trial " << trial << " factor " << factor;
    }
    ++checked;
  }
  EXPECT_GE(checked, 20);
}

TEST(PointwiseEquivalenceProperty, DiskMembershipIffTransformBounded) {
  testing::Gen gen(45);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const MobiusParams p = gen.mobius();
    const double gamma = gen.log_uniform(0.2, 5.0);
    const DelaySystem sys(gen.stable_system(4));
    const GeneralizedDisk d = unit_disk_image(ScaledMobiusDisk(p, gamma));
    for (int i = 0; i < 200; ++i) {
      const double w = std::pow(10.0, -3.0 + 6.0 * i / 199.0);
      const Complex g = freq_response(sys, w);
      Complex h;
      try {
        h = h_transform(sys, p, gamma, w);
      } catch (const Error&) {
        continue;
      }
      const double mag = std::abs(h);
      if (std::abs(mag - 1.0) <= 1e-9) continue;
      EXPECT_EQ(disk_contains(d, g), mag <= 1.0) << "trial " << trial << " omega " << w;
      ++checked;
    }
  }
  EXPECT_GT(checked, 19000);
}

TEST(DirectionFor, FollowsAdmissibleShape) {
  EXPECT_EQ(direction_for(admissible_gamma_set(MobiusParams::identity(), 3)), Direction::kMinimize);
  EXPECT_EQ(direction_for(admissible_gamma_set(MobiusParams(0, 1, 1, 0), 3)), Direction::kMaximize);
  EXPECT_EQ(direction_for(admissible_gamma_set(MobiusParams(1, 16, 1, 9.0 / 8.0), 3)), Direction::kBoth);
}

}  // namespace
}  // namespace cyclostab
