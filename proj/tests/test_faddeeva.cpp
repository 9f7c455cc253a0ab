#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "harvest/faddeeva.hpp"

namespace {

struct RefPoint {
  double x, y, re, im;
};

const RefPoint kReference[] = {
#include "data/faddeeva_reference.inc"
};

using cplx = std::complex<double>;

TEST(Faddeeva, MatchesHighPrecisionReference) {
  double worst = 0.0;
  for (const auto& p : kReference) {
    const cplx got = harvest::special::faddeeva_w({p.x, p.y});
    const cplx want{p.re, p.im};
    const double rel = std::abs(got - want) / std::max(std::abs(want), 1e-300);
    worst = std::max(worst, rel);
    EXPECT_LT(rel, 1e-13) << "z = " << p.x << " + " << p.y << "i";
  }
  RecordProperty("worst_relative_error", std::to_string(worst));
}

TEST(Faddeeva, ErfcOnRealAxisMatchesStd) {
  for (double x = -5.0; x <= 5.0; x += 0.37) {
    const cplx got = harvest::special::erfc(cplx(x, 0.0));
    EXPECT_NEAR(got.real(), std::erfc(x), 1e-14 * std::max(1.0, std::erfc(x)));
    EXPECT_NEAR(got.imag(), 0.0, 1e-14);
  }
}

TEST(Faddeeva, ScaledErfcAvoidsOverflow) {
  // erfc(z) e^{shift} with |z|^2 large and a compensating shift stays finite.
  const cplx z{-30.0, 2.0};
  const cplx shift{-800.0, 0.0};
  const cplx v = harvest::special::scaled_erfc(z, shift);
  EXPECT_TRUE(std::isfinite(v.real()) && std::isfinite(v.imag()));
  EXPECT_NEAR(std::abs(v), 2.0 * std::exp(-800.0), 1e-300);
}

TEST(Faddeeva, ReflectionIdentity) {
  // w(-z) = 2 e^{-z^2} - w(z)
  for (double x : {-2.0, -0.3, 0.0, 1.1, 3.0})
    for (double y : {0.1, 0.7, 2.5}) {
      const cplx z{x, y};
      const cplx lhs = harvest::special::faddeeva_w(-z);
      const cplx rhs = 2.0 * std::exp(-z * z) - harvest::special::faddeeva_w(z);
      EXPECT_LT(std::abs(lhs - rhs), 1e-13 * std::max(1.0, std::abs(lhs)));
    }
}

}  // namespace
