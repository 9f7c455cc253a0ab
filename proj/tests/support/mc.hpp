#pragma once

// Monte Carlo reference for double integrals of the form
//   \int dt dt' chi_i(t) chi_j(t') K(t, t') e^{i (a t + b t')} [theta(t - t')]
// where K is a smeared two-point function of the static pair. Static
// detectors make K depend on t - t' only, so it is tabulated once from the
// momentum-space kernel and interpolated.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "harvest/correlators.hpp"

namespace harvest::oracle {

class KernelTable {
 public:
  // u -> K(u, 0) on [-half_width, half_width].
  KernelTable(const SmearedKernel& k, double half_width, int points) : lo_(-half_width), n_(points) {
    h_ = 2.0 * half_width / (points - 1);
    values_.resize(points);
    for (int m = 0; m < points; ++m) values_[m] = k.evaluate(lo_ + m * h_, 0.0, 1e-8);
  }

  std::complex<double> operator()(double u) const {
    const double s = (u - lo_) / h_;
    if (s <= 0.0) return values_.front();
    if (s >= n_ - 1) return values_.back();
    const int m = int(s);
    const double f = s - m;
    return (1.0 - f) * values_[m] + f * values_[m + 1];
  }

 private:
  double lo_, h_;
  int n_;
  std::vector<std::complex<double>> values_;
};

struct McEstimate {
  std::complex<double> mean;
  double sigma;  // standard error of |.| per component, combined
};

/// pi Ti Tj E[f(t, t')] with t ~ chi_i, t' ~ chi_j read as Gaussian densities.
template <class F>
McEstimate mc_double_integral(const F& f, double ti, double Ti, double tj, double Tj, long samples,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gi(ti, Ti / std::sqrt(2.0)), gj(tj, Tj / std::sqrt(2.0));
  std::complex<double> sum = 0.0;
  double s2r = 0.0, s2i = 0.0;
  for (long n = 0; n < samples; ++n) {
    const double t = gi(rng), tp = gj(rng);
    const std::complex<double> v = f(t, tp);
    sum += v;
    s2r += v.real() * v.real();
    s2i += v.imag() * v.imag();
  }
  const double N = double(samples);
  const std::complex<double> mean = sum / N;
  const double var = (s2r / N - mean.real() * mean.real()) + (s2i / N - mean.imag() * mean.imag());
  const double norm = std::numbers::pi * Ti * Tj;
  return {norm * mean, norm * std::sqrt(std::max(var, 0.0) / N)};
}

}  // namespace harvest::oracle
