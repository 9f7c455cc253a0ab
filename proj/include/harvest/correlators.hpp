#pragma once

// Two-point functions of the supported quasifree field states, and their
// reduction to mode spectra for a pair of smeared static detectors.
//
// Mode convention. For a detector pair (i at x, j at x') the Wightman
// function is written as a superposition of plane waves
//   W(x', x) = sum/int  w  exp(i omega (t - t') + i (p x + q x'))
//   W(x, x') = conj(W(x', x)).
// In 3+1 dimensions only static, unboosted use is supported: the spatial
// smearing form factors and the angular integral (a sinc of the detector
// separation) are folded into w and p = q = 0.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "harvest/detector.hpp"
#include "harvest/errors.hpp"
#include "harvest/gaussian.hpp"
#include "harvest/quadrature.hpp"

namespace harvest {

enum class FieldKind {
  MinkowskiVacuum3p1Massless,
  MinkowskiVacuum1p1Massive,
  Thermal3p1Massless,
  CavityVacuum1p1,
};

inline const char* to_string(FieldKind k) {
  switch (k) {
    case FieldKind::MinkowskiVacuum3p1Massless: return "minkowski_vacuum_3p1_massless";
    case FieldKind::MinkowskiVacuum1p1Massive: return "minkowski_vacuum_1p1_massive";
    case FieldKind::Thermal3p1Massless: return "thermal_3p1_massless";
    case FieldKind::CavityVacuum1p1: return "cavity_vacuum_1p1";
  }
  return "?";
}

struct FieldStateSpec {
  FieldKind kind = FieldKind::MinkowskiVacuum3p1Massless;
  double mass = 0.0;
  double temperature = 0.0;
  double cavity_length = 1.0;
  int n_modes = 1;
  double epsilon = 1e-3;  // i-epsilon regulator for position-space evaluation

  static FieldStateSpec vacuum_3p1() { return {}; }
  static FieldStateSpec massive_1p1(double m) {
    FieldStateSpec s;
    s.kind = FieldKind::MinkowskiVacuum1p1Massive;
    s.mass = m;
    return s;
  }
  static FieldStateSpec thermal_3p1(double temperature) {
    FieldStateSpec s;
    s.kind = FieldKind::Thermal3p1Massless;
    s.temperature = temperature;
    return s;
  }
  static FieldStateSpec cavity(double length, int modes) {
    FieldStateSpec s;
    s.kind = FieldKind::CavityVacuum1p1;
    s.cavity_length = length;
    s.n_modes = modes;
    return s;
  }

  int spatial_dims() const {
    return kind == FieldKind::MinkowskiVacuum3p1Massless || kind == FieldKind::Thermal3p1Massless ? 3 : 1;
  }
  bool is_discrete() const { return kind == FieldKind::CavityVacuum1p1; }
  bool translation_invariant() const { return !is_discrete(); }

  void validate() const {
    if (!(epsilon > 0.0)) throw ValidationError("field epsilon regulator must be > 0");
    switch (kind) {
      case FieldKind::MinkowskiVacuum1p1Massive:
        if (!(mass > 0.0))
          throw ValidationError("massless 1+1D Minkowski vacuum is infrared divergent: mass must be > 0");
        break;
      case FieldKind::Thermal3p1Massless:
        if (!(temperature > 0.0)) throw ValidationError("thermal state requires temperature > 0");
        break;
      case FieldKind::CavityVacuum1p1:
        if (n_modes < 1) throw ValidationError("cavity requires n_modes >= 1");
        if (!(cavity_length > 0.0)) throw ValidationError("cavity length must be > 0");
        break;
      case FieldKind::MinkowskiVacuum3p1Massless:
        break;
    }
  }

  double mode_frequency(int n) const { return n * std::numbers::pi / cavity_length; }
  double dispersion(double k) const { return std::sqrt(k * k + mass * mass); }
};

/// A spacetime point: time plus up to three spatial coordinates.
struct Event {
  double t = 0.0;
  std::array<double, 3> x{0.0, 0.0, 0.0};
};

struct PlaneWave {
  cplx weight;
  double omega;
  double p = 0.0;
  double q = 0.0;
};

inline double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0 + x * x * x * x / 120.0;
  return std::sin(x) / x;
}

/// Bose occupation 1 / (e^{omega / Theta} - 1).
inline double bose_occupation(double omega, double temperature) {
  return 1.0 / std::expm1(omega / temperature);
}

/// Plane-wave decomposition of W for one detector pair.
class ModeSpectrum {
 public:
  ModeSpectrum(const FieldStateSpec& state, const DetectorConfig& di, const DetectorConfig& dj)
      : state_(state) {
    state.validate();
    if (state.spatial_dims() == 3) {
      separation_ = distance(di, dj);
      smear_sum_ = di.smearing_width * di.smearing_width + dj.smearing_width * dj.smearing_width;
    }
    if (state.is_discrete()) {
      const double L = state.cavity_length;
      for (int n = 1; n <= state.n_modes; ++n) {
        const double w = state.mode_frequency(n);
        const double k = w;
        // sin(kx) sin(kx') = -1/4 sum_{a,b=+-1} a b e^{i(a k x + b k x')}
        for (int a : {+1, -1})
          for (int b : {+1, -1}) discrete_.push_back({-a * b / (4.0 * w * L), w, a * k, b * k});
      }
    }
    scale_ = 2.0 / std::min(di.switching_width, dj.switching_width) + std::abs(di.gap) + std::abs(dj.gap) +
             state.mass;
  }

  bool discrete() const { return state_.is_discrete(); }
  const std::vector<PlaneWave>& discrete_modes() const { return discrete_; }
  double momentum_scale() const { return scale_; }
  const FieldStateSpec& state() const { return state_; }

  /// Waves carried by radial momentum k >= 0 (already including dk measure).
  void waves_at(double k, std::vector<PlaneWave>& out) const {
    out.clear();
    switch (state_.kind) {
      case FieldKind::MinkowskiVacuum3p1Massless: {
        const double w = k / (4.0 * std::numbers::pi * std::numbers::pi) * sinc(k * separation_) *
                         std::exp(-0.25 * k * k * smear_sum_);
        out.push_back({w, k});
        break;
      }
      case FieldKind::Thermal3p1Massless: {
        const double w = k / (4.0 * std::numbers::pi * std::numbers::pi) * sinc(k * separation_) *
                         std::exp(-0.25 * k * k * smear_sum_);
        const double n = k > 0.0 ? bose_occupation(k, state_.temperature) : 0.0;
        // k * n(k) -> Theta as k -> 0; the weight stays finite.
        const double wn = k > 0.0 ? w * n
                                  : state_.temperature / (4.0 * std::numbers::pi * std::numbers::pi);
        out.push_back({w + wn, k});
        out.push_back({wn, -k});
        break;
      }
      case FieldKind::MinkowskiVacuum1p1Massive: {
        const double omega = state_.dispersion(k);
        const double w = 1.0 / (4.0 * std::numbers::pi * omega);
        out.push_back({w, omega, -k, k});
        out.push_back({w, omega, k, -k});
        break;
      }
      case FieldKind::CavityVacuum1p1:
        out = discrete_;
        break;
    }
  }

  /// Integrates a per-wave functional over the spectrum. `fill(wave, acc)`
  /// adds the wave's contribution into `acc` (size `dim`).
  template <class Fill>
  quad::Result integrate(std::size_t dim, const Fill& fill, const quad::Options& opt) const {
    if (discrete()) {
      quad::Result r;
      r.value.assign(dim, 0.0);
      r.error.assign(dim, 0.0);
      for (const auto& w : discrete_) fill(w, r.value);
      for (std::size_t c = 0; c < dim; ++c)
        r.error[c] = 16.0 * std::numeric_limits<double>::epsilon() * std::abs(r.value[c]);
      r.evaluations = static_cast<long>(discrete_.size());
      r.converged = true;
      return r;
    }
    auto integrand = [&](double k) {
      thread_local std::vector<PlaneWave> waves;
      waves_at(k, waves);
      quad::CVector acc(dim, 0.0);
      for (const auto& w : waves) fill(w, acc);
      return acc;
    };
    return quad::integrate_half_line(integrand, scale_, dim, opt);
  }

 private:
  FieldStateSpec state_;
  double separation_ = 0.0;
  double smear_sum_ = 0.0;
  double scale_ = 1.0;
  std::vector<PlaneWave> discrete_;
};

/// W(x, x') = <phi(x) phi(x')> for unsmeared points, with the distributional
/// regulator t - t' -> t - t' - i epsilon. Thermal states are only
/// available in momentum form (see wightman_momentum).
inline cplx wightman_position(const FieldStateSpec& state, const Event& x, const Event& xp) {
  using namespace std::complex_literals;
  state.validate();
  const double eps = state.epsilon;
  const double dt = x.t - xp.t;
  switch (state.kind) {
    case FieldKind::MinkowskiVacuum3p1Massless: {
      double r2 = 0.0;
      for (int c = 0; c < 3; ++c) r2 += (x.x[c] - xp.x[c]) * (x.x[c] - xp.x[c]);
      const cplx s = dt - 1i * eps;
      return 1.0 / (4.0 * std::numbers::pi * std::numbers::pi * (r2 - s * s));
    }
    case FieldKind::MinkowskiVacuum1p1Massive: {
      const double dx = x.x[0] - xp.x[0];
      auto f = [&](double k) {
        const double w = state.dispersion(k);
        return quad::CVector{std::cos(k * dx) * std::exp(-1i * w * dt - w * eps) /
                             (2.0 * std::numbers::pi * w)};
      };
      const auto r = quad::integrate_half_line(f, state.mass + 1.0 / eps, 1, {1e-11, 1e-15, 20000});
      return quad::require_converged(r, "wightman_position(1+1 massive)").value[0];
    }
    case FieldKind::CavityVacuum1p1: {
      cplx sum = 0.0;
      for (int n = 1; n <= state.n_modes; ++n) {
        const double w = state.mode_frequency(n);
        sum += std::sin(w * x.x[0]) * std::sin(w * xp.x[0]) * std::exp(-1i * w * dt - w * eps) /
               (w * state.cavity_length);
      }
      return sum;
    }
    case FieldKind::Thermal3p1Massless:
      throw ValidationError("thermal two-point function is only available in momentum form");
  }
  return {};
}

/// Momentum-space evaluation of W(x, x') for translation-invariant states,
/// damped by exp(-omega epsilon).
inline cplx wightman_momentum(const FieldStateSpec& state, const Event& x, const Event& xp,
                              double rel_tol = 1e-11) {
  using namespace std::complex_literals;
  state.validate();
  const double eps = state.epsilon;
  const double dt = x.t - xp.t;
  switch (state.kind) {
    case FieldKind::MinkowskiVacuum3p1Massless:
    case FieldKind::Thermal3p1Massless: {
      double r2 = 0.0;
      for (int c = 0; c < 3; ++c) r2 += (x.x[c] - xp.x[c]) * (x.x[c] - xp.x[c]);
      const double r = std::sqrt(r2);
      const bool thermal = state.kind == FieldKind::Thermal3p1Massless;
      // angular integral: int dOmega e^{i k.r} = 4 pi sinc(k r)
      auto f = [&](double k) {
        const double dens = k / (4.0 * std::numbers::pi * std::numbers::pi) * sinc(k * r);
        cplx v = dens * std::exp(-1i * k * dt - k * eps);
        if (thermal) {
          const double kn = k > 0.0 ? k * bose_occupation(k, state.temperature) : state.temperature;
          const double dn = kn / (4.0 * std::numbers::pi * std::numbers::pi) * sinc(k * r);
          v += dn * (std::exp(-1i * k * dt) + std::exp(1i * k * dt)) * std::exp(-k * eps);
        }
        return quad::CVector{v};
      };
      const auto res = quad::integrate_half_line(f, 1.0 / eps, 1, {rel_tol, 1e-15, 20000});
      return quad::require_converged(res, "wightman_momentum(3+1)").value[0];
    }
    case FieldKind::MinkowskiVacuum1p1Massive:
      return wightman_position(state, x, xp);
    case FieldKind::CavityVacuum1p1:
      return wightman_position(state, x, xp);
  }
  return {};
}

/// One frequency component of a smeared kernel's radial profile.
struct KernelTerm {
  double omega;
  cplx amplitude;
};

/// Spatially smeared two-point function of a static detector pair,
///   W_ij(t, t') = \int dx dx' F_i(x) F_j(x') W((t, x), (t', x'))
///              = \int_0^inf dk  sum_terms rho_ij(k) e^{-i omega (t - t')}
/// (a finite mode sum in the cavity).
class SmearedKernel {
 public:
  SmearedKernel(const FieldStateSpec& state, const DetectorConfig& di, const DetectorConfig& dj)
      : spectrum_(state, di, dj),
        geometry_(PairGeometry::make(di, dj, state.spatial_dims() == 1)),
        label_i_(di.label),
        label_j_(dj.label) {
    di.validate();
    dj.validate();
  }

  const ModeSpectrum& spectrum() const { return spectrum_; }
  const PairGeometry& geometry() const { return geometry_; }
  std::pair<DetectorLabel, DetectorLabel> pair() const { return {label_i_, label_j_}; }

  /// rho_ij(k): amplitudes of e^{-i omega (t - t')} carried by radial momentum k.
  std::vector<KernelTerm> profile(double k) const {
    std::vector<PlaneWave> waves;
    spectrum_.waves_at(k, waves);
    return collect(waves);
  }

  /// Terms of the cavity mode sum.
  std::vector<KernelTerm> mode_sum_terms() const { return collect(spectrum_.discrete_modes()); }

  cplx evaluate(double t, double tp, double rel_tol = 1e-10) const {
    using namespace std::complex_literals;
    auto fill = [&](const PlaneWave& w, quad::CVector& acc) {
      acc[0] += conj_smeared(w) * std::exp(-1i * w.omega * (t - tp));
    };
    const auto r = spectrum_.integrate(1, fill, {rel_tol, 1e-16, 20000});
    return quad::require_converged(r, "smeared_time_kernel").value[0];
  }

 private:
  // Contribution of one wave to W(x, x') after averaging over both smearings.
  cplx conj_smeared(const PlaneWave& w) const {
    using namespace std::complex_literals;
    const double spread = 0.5 * (w.p * w.p * geometry_.var_xi + w.q * w.q * geometry_.var_xj);
    return std::conj(w.weight) * std::exp(-1i * (w.p * geometry_.xi + w.q * geometry_.xj) - spread);
  }

  std::vector<KernelTerm> collect(const std::vector<PlaneWave>& waves) const {
    std::vector<KernelTerm> out;
    for (const auto& w : waves) {
      const cplx amp = conj_smeared(w);
      bool merged = false;
      for (auto& t : out)
        if (t.omega == w.omega) {
          t.amplitude += amp;
          merged = true;
        }
      if (!merged) out.push_back({w.omega, amp});
    }
    return out;
  }

  ModeSpectrum spectrum_;
  PairGeometry geometry_;
  DetectorLabel label_i_, label_j_;
};

inline SmearedKernel smeared_time_kernel(const FieldStateSpec& state, const DetectorConfig& di,
                                         const DetectorConfig& dj) {
  return SmearedKernel(state, di, dj);
}

}  // namespace harvest
