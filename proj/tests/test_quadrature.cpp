#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "harvest/errors.hpp"
#include "harvest/quadrature.hpp"

namespace {

using harvest::quad::CVector;

TEST(Quadrature, GaussianOnFiniteInterval) {
  auto f = [](double x) { return CVector{std::exp(-x * x)}; };
  const auto r = harvest::quad::integrate(f, -8.0, 8.0, 1, {});
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.value[0].real(), std::sqrt(std::numbers::pi), 1e-13);
}

TEST(Quadrature, HalfLineVectorIntegrand) {
  // \int_0^inf e^{-k} cos(a k) dk = 1 / (1 + a^2), and sin gives a / (1 + a^2).
  const double a = 1.7;
  auto f = [&](double k) {
    return CVector{std::exp(-k) * std::cos(a * k), std::exp(-k) * std::sin(a * k)};
  };
  const auto r = harvest::quad::integrate_half_line(f, 1.0, 2, {});
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.value[0].real(), 1.0 / (1.0 + a * a), 1e-12);
  EXPECT_NEAR(r.value[1].real(), a / (1.0 + a * a), 1e-12);
}

TEST(Quadrature, ErrorEstimateBoundsActualError) {
  auto f = [](double x) { return CVector{std::sqrt(x)}; };
  const auto r = harvest::quad::integrate(f, 0.0, 1.0, 1, {1e-10, 1e-15, 500});
  ASSERT_TRUE(r.converged);
  EXPECT_LE(std::abs(r.value[0].real() - 2.0 / 3.0), std::max(r.error[0], 1e-15));
}

TEST(Quadrature, NonConvergenceIsReported) {
  auto f = [](double x) { return CVector{std::sin(1.0 / (x + 1e-9))}; };
  const auto r = harvest::quad::integrate(f, 0.0, 1.0, 1, {1e-14, 0.0, 8});
  EXPECT_FALSE(r.converged);
  EXPECT_THROW(harvest::quad::require_converged(r, "oscillatory"), harvest::NumericalError);
}

}  // namespace
