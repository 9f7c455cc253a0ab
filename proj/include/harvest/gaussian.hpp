#pragma once

// Closed-form spacetime integrals of a single plane wave against the
// Gaussian switching/smearing profiles of two static detectors, with or
// without a boosted ordering step function.
//
//   I = \int dt dt' dx dx'  chi_i(t) F_i(x) chi_j(t') F_j(x')
//         exp(i (a t + b t' + p x + q x'))  [theta(s (t - t' - v (x - x')))]
//
// Time profiles integrate to sqrt(pi) T; spatial profiles are normalized,
// so each coordinate behaves as a Gaussian variable with variance
// T^2/2 resp. sigma^2/2. For a Gaussian vector z ~ N(0, D) and a real
// direction c,
//   E[e^{i beta.z} theta(c.z + c0)] = e^{-beta.D.beta/2} erfc(-(c0 + i c.D.beta) / sqrt(2 c.D.c)) / 2.

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>

#include "harvest/detector.hpp"
#include "harvest/faddeeva.hpp"

namespace harvest {

/// Switching/smearing data for the (i at x, j at x') pair. Spatial entries
/// are zero when the spatial dependence is carried by the mode weights
/// (3+1 dimensions, where boosts are not supported).
struct PairGeometry {
  double ti = 0.0, tj = 0.0;
  double Ti = 1.0, Tj = 1.0;
  double xi = 0.0, xj = 0.0;
  double var_xi = 0.0, var_xj = 0.0;

  static PairGeometry make(const DetectorConfig& i, const DetectorConfig& j, bool spatial_1d) {
    PairGeometry g;
    g.ti = i.switching_center;
    g.tj = j.switching_center;
    g.Ti = i.switching_width;
    g.Tj = j.switching_width;
    if (spatial_1d) {
      g.xi = i.position[0];
      g.xj = j.position[0];
      g.var_xi = i.position_variance();
      g.var_xj = j.position_variance();
    }
    return g;
  }
};

/// theta(sign * (t - t' - v (x - x'))); sign = +1 orders x after x'.
struct Ordering {
  double v = 0.0;
  int sign = +1;
};

inline cplx plane_wave_integral(const PairGeometry& g, double a, double b, double p, double q,
                                const std::optional<Ordering>& ord = std::nullopt) {
  using namespace std::complex_literals;
  const double D[4] = {0.5 * g.Ti * g.Ti, 0.5 * g.Tj * g.Tj, g.var_xi, g.var_xj};
  const double beta[4] = {a, b, p, q};
  double quad = 0.0;
  for (int m = 0; m < 4; ++m) quad += D[m] * beta[m] * beta[m];
  const double phase = a * g.ti + b * g.tj + p * g.xi + q * g.xj;
  const double norm = std::numbers::pi * g.Ti * g.Tj;
  const cplx log_prefactor = 1i * phase - 0.5 * quad;
  if (!ord) return norm * std::exp(log_prefactor);

  const double sgn = ord->sign >= 0 ? 1.0 : -1.0;
  const double c[4] = {sgn, -sgn, -sgn * ord->v, sgn * ord->v};
  const double c0 = sgn * ((g.ti - g.tj) - ord->v * (g.xi - g.xj));
  double kappa = 0.0, s2 = 0.0;
  for (int m = 0; m < 4; ++m) {
    kappa += c[m] * D[m] * beta[m];
    s2 += c[m] * c[m] * D[m];
  }
  const cplx zeta = -(c0 + 1i * kappa) / std::sqrt(2.0 * s2);
  return norm * 0.5 * special::scaled_erfc(zeta, log_prefactor);
}

}  // namespace harvest
