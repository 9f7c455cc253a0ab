#pragma once

// Faddeeva function w(z) = exp(-z^2) erfc(-iz) and the complex
// complementary error function built on it.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace harvest::special {

namespace detail {

// Weideman's rational expansion in Z = (L + iz)/(L - iz), valid for Im z >= 0.
struct WeidemanTable {
  static constexpr int N = 40;
  double L;
  std::array<double, N> a;

  WeidemanTable() {
    constexpr int M = 2 * N;
    L = std::sqrt(N / std::sqrt(2.0));
    a.fill(0.0);
    for (int k = -M + 1; k <= M - 1; ++k) {
      const double theta = k * std::numbers::pi / M;
      const double t = L * std::tan(theta / 2.0);
      const double f = std::exp(-t * t) * (L * L + t * t);
      for (int n = 1; n <= N; ++n) a[n - 1] += f * std::cos(n * theta);
    }
    for (auto& c : a) c /= 2.0 * M;
  }
};

inline const WeidemanTable& weideman_table() {
  static const WeidemanTable table;
  return table;
}

// Laplace continued fraction, accurate for large |z| in the upper half plane.
inline std::complex<double> w_continued_fraction(std::complex<double> z) {
  constexpr int depth = 60;
  std::complex<double> tail = z;
  for (int k = depth; k >= 1; --k) tail = z - (0.5 * k) / tail;
  return std::complex<double>(0.0, 1.0 / std::sqrt(std::numbers::pi)) / tail;
}

inline std::complex<double> w_upper(std::complex<double> z) {
  using namespace std::complex_literals;
  if (std::abs(z) > 12.0) return w_continued_fraction(z);
  const auto& tab = weideman_table();
  const std::complex<double> denom = tab.L - 1i * z;
  const std::complex<double> Z = (tab.L + 1i * z) / denom;
  std::complex<double> p = 0.0;
  for (int n = WeidemanTable::N - 1; n >= 0; --n) p = p * Z + tab.a[n];
  return 2.0 * p / (denom * denom) + (1.0 / std::sqrt(std::numbers::pi)) / denom;
}

}  // namespace detail

/// Faddeeva function. For Im z < 0 uses w(z) = 2 exp(-z^2) - w(-z).
inline std::complex<double> faddeeva_w(std::complex<double> z) {
  if (z.imag() >= 0.0) return detail::w_upper(z);
  return 2.0 * std::exp(-z * z) - detail::w_upper(-z);
}

/// exp(shift) * erfc(z), evaluated without forming exp(-z^2) on its own.
/// `shift` lets callers fold a Gaussian prefactor into the exponent so
/// that large cancelling exponentials never materialize.
inline std::complex<double> scaled_erfc(std::complex<double> z,
                                        std::complex<double> shift = 0.0) {
  using namespace std::complex_literals;
  if (z.real() >= 0.0) return std::exp(shift - z * z) * detail::w_upper(1i * z);
  return 2.0 * std::exp(shift) - std::exp(shift - z * z) * detail::w_upper(-1i * z);
}

inline std::complex<double> erfc(std::complex<double> z) { return scaled_erfc(z); }

}  // namespace harvest::special
