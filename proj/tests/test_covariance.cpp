#include <gtest/gtest.h>

#include <numbers>

#include "harvest/covariance.hpp"

namespace {

using namespace harvest;
constexpr double pi = std::numbers::pi;

const FieldStateSpec kLine = FieldStateSpec::massive_1p1(1.0);

DetectorConfig det(DetectorLabel l, double x, double sigma, double lambda, InitialStateSpec init) {
  DetectorConfig d;
  d.label = l;
  d.position = {x, 0.0, 0.0};
  d.smearing_width = sigma;
  d.gap = 2.0;
  d.coupling = lambda;
  d.initial = init;
  return d;
}

InitialStateSpec angles(double a, double b = 0.0) { return InitialStateSpec(PureStateAngles(a, b)); }

NonCovariantReport report(double sigma, double lambda, InitialStateSpec ia, InitialStateSpec ib, double d = 0.0) {
  return non_covariant_report(kLine, det(DetectorLabel::A, 0.0, sigma, lambda, ia),
                              det(DetectorLabel::B, d, sigma, lambda, ib), FrameSpec(0.5), FrameSpec{});
}

double max_abs(const Matrix4c& m) { return m.cwiseAbs().maxCoeff(); }

TEST(Covariance, GroundStatesAreFrameIndependent) {
  const auto r = report(0.5, 0.01, angles(0.0), angles(0.0), 1.0);
  EXPECT_EQ(max_abs(r.delta_rho), 0.0);
  EXPECT_EQ(r.negativity_t, r.negativity_s);
}

TEST(Covariance, SuperposedStatesDependOnFrame) {
  const auto r = report(0.5, 0.01, angles(pi / 4), angles(pi / 4));
  EXPECT_GT(max_abs(r.delta_rho), 100.0 * r.quad_error);
  EXPECT_TRUE(r.fit.applicable);
  EXPECT_LT(r.fit.residual, r.quad_error + 1e-12 * r.delta_rho.norm());
  EXPECT_LT(std::abs(r.negativity_t - r.negativity_s), 1e-8);
}

TEST(Covariance, FrameDependenceIsSecondOrderInCoupling) {
  const double small = max_abs(report(0.5, 0.01, angles(pi / 4), angles(pi / 4)).delta_rho);
  const double big = max_abs(report(0.5, 0.1, angles(pi / 4), angles(pi / 4)).delta_rho);
  EXPECT_NEAR(big / small, 100.0, 1.0);
}

TEST(Covariance, OnlySuperposedDetectorContributes) {
  const auto r = report(0.5, 0.01, angles(pi / 3, 1.0), angles(0.0));
  ASSERT_TRUE(r.fit.applicable);
  EXPECT_EQ(r.fit.b, cplx(0.0));
  EXPECT_GT(std::abs(r.fit.a), 0.0);
  EXPECT_EQ(r.X_t, r.X_s);
  EXPECT_LT(r.fit.residual, r.quad_error + 1e-12 * r.delta_rho.norm());
}

TEST(Covariance, FrameIndependentBlocksAgree) {
  const auto a = det(DetectorLabel::A, 0.0, 0.5, 0.01, angles(0.7, 2.0));
  const auto b = det(DetectorLabel::B, 1.0, 0.5, 0.01, angles(1.2, 0.5));
  const auto t = evaluate_in_frame(kLine, a, b, FrameSpec(0.5));
  const auto s = evaluate_in_frame(kLine, a, b, FrameSpec{});
  EXPECT_EQ(t.blocks.L_gen, s.blocks.L_gen);
  EXPECT_EQ(t.blocks.M_gen, s.blocks.M_gen);
  EXPECT_EQ(t.negativity_closed, s.negativity_closed);
}

TEST(Covariance, PointlikeLimitShrinksFrameDependence) {
  double prev = std::numeric_limits<double>::infinity();
  for (double sigma : {0.5, 0.25, 0.125}) {
    const double d = max_abs(report(sigma, 0.01, angles(pi / 4), angles(pi / 4)).delta_rho);
    EXPECT_LT(d, prev) << sigma;
    prev = d;
  }
}

TEST(Covariance, FitNotApplicableForGroundStates) {
  const auto r = report(0.5, 0.01, angles(0.0), angles(0.0));
  EXPECT_FALSE(r.fit.applicable);
}

}  // namespace
