#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "cyclostab/hinf.hpp"
#include "support.hpp"

namespace cyclostab {
namespace {

StateSpace first_order(double gain) {
  // gain / (s + 1)
  return StateSpace(Eigen::MatrixXd::Constant(1, 1, -1.0), Eigen::VectorXd::Constant(1, 1.0),
                    Eigen::RowVectorXd::Constant(1, gain), 0.0);
}

// Dense frequency sweep: 10^5 log-spaced points plus omega = 0 and infinity.
double sweep_peak(const StateSpace& ss) {
  double peak = std::max(std::abs(ss.D), std::abs(ss.eval(Complex(0.0, 0.0))));
  for (int i = 0; i < 100000; ++i) {
    const double w = std::pow(10.0, -5.0 + 10.0 * i / 99999.0);
    peak = std::max(peak, std::abs(ss.eval(Complex(0.0, w))));
  }
  return peak;
}

double max_eigenvalue(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (m + m.transpose())).eigenvalues().maxCoeff();
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (m + m.transpose())).eigenvalues().minCoeff();
}

double lmi_scale(const StateSpace& ss, const Eigen::MatrixXd& p) {
  return std::max({1.0, (ss.A.transpose() * p + p * ss.A).norm(), (ss.C.transpose() * ss.C).norm(),
                   (p * ss.B).norm()});
}

void expect_valid_certificate(const StateSpace& ss, const Eigen::MatrixXd& p) {
  ASSERT_EQ(p.rows(), ss.order());
  if (ss.order() == 0) return;
  EXPECT_GE(min_eigenvalue(p), -1e-9 * std::max(1.0, p.norm()));
  EXPECT_LE(max_eigenvalue(kyp_lmi_matrix(ss, p)), 1e-8 * lmi_scale(ss, p));
}

TEST(HinfLeOne, Examples) {
  const StateSpace feedthrough(Eigen::MatrixXd::Constant(1, 1, -1.0), Eigen::VectorXd::Zero(1),
                               Eigen::RowVectorXd::Zero(1), 0.5);
  EXPECT_TRUE(hinf_le_one(feedthrough));
  EXPECT_FALSE(hinf_le_one(first_order(2.0)));
}

TEST(HinfLeOne, BoundaryFeedthrough) {
  const StateSpace unit(Eigen::MatrixXd::Constant(1, 1, -1.0), Eigen::VectorXd::Zero(1),
                        Eigen::RowVectorXd::Zero(1), 1.0);
  EXPECT_TRUE(hinf_le_one(unit));
  EXPECT_TRUE(hinf_le_one(first_order(1.0)));
}

TEST(HinfLeOne, RejectsNonHurwitz) {
  const StateSpace unstable(Eigen::MatrixXd::Constant(1, 1, 0.5), Eigen::VectorXd::Constant(1, 1.0),
                            Eigen::RowVectorXd::Constant(1, 1.0), 0.0);
  try {
    hinf_le_one(unstable);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotHurwitz);
  }
}

TEST(HinfNorm, ResonantPeak) {
  // 1 / (s^2 + 0.2 s + 1) peaks at 1/(0.2 sqrt(1 - 0.01)).
  Eigen::MatrixXd a(2, 2);
  a << 0.0, 1.0, -1.0, -0.2;
  const StateSpace ss(a, Eigen::Vector2d(0.0, 1.0), Eigen::RowVector2d(1.0, 0.0), 0.0);
  const HinfBracket b = hinf_norm(ss);
  const double expect = 1.0 / (0.2 * std::sqrt(0.99));
  EXPECT_NEAR(b.lower, expect, 1e-9 * expect);
  EXPECT_GE(b.upper, b.lower);
  EXPECT_NEAR(b.upper, expect, 1e-9 * expect);
}

TEST(KypCertificate, Examples) {
  const StateSpace zero(Eigen::MatrixXd::Constant(1, 1, -1.0), Eigen::VectorXd::Constant(1, 1.0),
                        Eigen::RowVectorXd::Zero(1), 0.0);
  const Eigen::MatrixXd p0 = kyp_certificate(zero);
  expect_valid_certificate(zero, p0);
  EXPECT_LE(max_eigenvalue(kyp_lmi_matrix(zero, Eigen::MatrixXd::Zero(1, 1))), 0.0);

  const StateSpace half = first_order(0.5);
  const Eigen::MatrixXd p = kyp_certificate(half);
  expect_valid_certificate(half, p);

  try {
    kyp_certificate(first_order(2.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasible);
  }
}

TEST(KypCertificate, MarginalNorm) {
  try {
    kyp_certificate(first_order(1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMarginalCase);
  }
}

TEST(HinfProperty, MatchesDenseSweep) {
  testing::Gen gen(50);
  int disagreements = 0;
  for (int trial = 0; trial < 60; ++trial) {
    StateSpace ss = gen.stable_state_space(gen.integer(1, 6));
    const double raw = sweep_peak(ss);
    if (raw < 1e-6) continue;
    const double target = gen.uniform(0.5, 1.5);
    ss.C *= target / raw;
    ss.D *= target / raw;
    const double peak = sweep_peak(ss);
    const bool verdict = hinf_le_one(ss);
    if (std::abs(peak - 1.0) > 1e-6 && verdict != (peak <= 1.0)) ++disagreements;
    const HinfBracket b = hinf_norm(ss);
    EXPECT_GE(b.lower, peak * (1.0 - 1e-9)) << "trial " << trial;
    EXPECT_LE(b.lower, b.upper);
  }
  EXPECT_EQ(disagreements, 0);
}

TEST(KypCertificateProperty, RandomContractions) {
  testing::Gen gen(51);
  for (int trial = 0; trial < 60; ++trial) {
    StateSpace ss = gen.stable_state_space(gen.integer(1, 6));
    const double norm = hinf_norm(ss).upper;
    if (norm < 1e-9) continue;
    const double target = gen.uniform(0.1, 0.99);
    ss.C *= target / norm;
    ss.D *= target / norm;
    const Eigen::MatrixXd p = kyp_certificate(ss);
    expect_valid_certificate(ss, p);
  }
}

}  // namespace
}  // namespace cyclostab
