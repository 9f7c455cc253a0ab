#pragma once

// Globally adaptive Gauss-Kronrod (10/21) quadrature for vector-valued
// complex integrands. Every component shares the same subdivision, so a
// family of related integrals (e.g. the four sign patterns of one
// detector pair) costs one pass over the momentum axis.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "harvest/errors.hpp"

namespace harvest::quad {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

struct Options {
  double rel_tol = 1e-8;
  double abs_tol = 1e-15;
  int max_intervals = 2000;
};

struct Result {
  CVector value;
  std::vector<double> error;
  long evaluations = 0;
  bool converged = false;
};

namespace detail {

struct Segment {
  double a, b;
  CVector value;
  std::vector<double> error;
  double priority;  // worst tolerance ratio among components
  bool operator<(const Segment& o) const { return priority < o.priority; }
};

template <class F>
Segment gk21(const F& f, double a, double b, std::size_t dim) {
  using kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;
  using gauss = boost::math::quadrature::gauss<double, 10>;
  const auto& xk = kronrod::abscissa();
  const auto& wk = kronrod::weights();
  const auto& wg = gauss::weights();

  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  CVector kron(dim, 0.0), gsum(dim, 0.0);
  CVector fp = f(mid);
  for (std::size_t c = 0; c < dim; ++c) kron[c] = fp[c] * wk[0];
  // 10-point Gauss rule has no centre node: Gauss nodes sit at odd indices.
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const CVector plus = f(mid + half * xk[i]);
    const CVector minus = f(mid - half * xk[i]);
    for (std::size_t c = 0; c < dim; ++c) {
      const cplx s = plus[c] + minus[c];
      kron[c] += s * wk[i];
      if (i % 2 == 1) gsum[c] += s * wg[i / 2];
    }
  }
  Segment seg{a, b, CVector(dim), std::vector<double>(dim), 0.0};
  for (std::size_t c = 0; c < dim; ++c) {
    seg.value[c] = kron[c] * half;
    seg.error[c] = std::max(std::abs((kron[c] - gsum[c]) * half),
                            50.0 * std::numeric_limits<double>::epsilon() *
                                std::abs(seg.value[c]));
  }
  return seg;
}

}  // namespace detail

/// Integrates `f` over [a, b]. `f(x)` must return a CVector of size `dim`.
/// Subdivision continues until every component satisfies
/// err <= max(abs_tol, rel_tol * |value|), or the interval budget runs out.
template <class F>
Result integrate(const F& f, double a, double b, std::size_t dim, const Options& opt = {}) {
  std::priority_queue<detail::Segment> heap;
  Result res;
  res.value.assign(dim, 0.0);
  res.error.assign(dim, 0.0);

  auto tolerance_ratio = [&](const CVector& total, const detail::Segment& s) {
    double worst = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(total[c]));
      worst = std::max(worst, s.error[c] / tol);
    }
    return worst;
  };

  auto first = detail::gk21(f, a, b, dim);
  res.evaluations += 21;
  CVector total = first.value;
  std::vector<double> err_total = first.error;
  first.priority = tolerance_ratio(total, first);
  heap.push(first);

  auto done = [&] {
    for (std::size_t c = 0; c < dim; ++c) {
      const double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(total[c]));
      if (err_total[c] > tol) return false;
    }
    return true;
  };

  int intervals = 1;
  while (!done() && intervals < opt.max_intervals) {
    detail::Segment worst = heap.top();
    heap.pop();
    const double m = 0.5 * (worst.a + worst.b);
    if (!(m > worst.a && m < worst.b)) {  // interval exhausted at double precision
      worst.priority = 0.0;
      heap.push(worst);
      break;
    }
    auto left = detail::gk21(f, worst.a, m, dim);
    auto right = detail::gk21(f, m, worst.b, dim);
    res.evaluations += 42;
    for (std::size_t c = 0; c < dim; ++c) {
      total[c] += left.value[c] + right.value[c] - worst.value[c];
      err_total[c] += left.error[c] + right.error[c] - worst.error[c];
    }
    left.priority = tolerance_ratio(total, left);
    right.priority = tolerance_ratio(total, right);
    heap.push(std::move(left));
    heap.push(std::move(right));
    ++intervals;
  }

  // Re-sum from the leaves to shed accumulated update round-off.
  std::fill(total.begin(), total.end(), cplx(0.0));
  std::fill(err_total.begin(), err_total.end(), 0.0);
  while (!heap.empty()) {
    const auto& s = heap.top();
    for (std::size_t c = 0; c < dim; ++c) {
      total[c] += s.value[c];
      err_total[c] += s.error[c];
    }
    heap.pop();
  }
  res.value = total;
  res.error = err_total;
  res.converged = done();
  return res;
}

/// Integrates over [0, inf) through k = scale * u / (1 - u).
template <class F>
Result integrate_half_line(const F& f, double scale, std::size_t dim, const Options& opt = {}) {
  auto mapped = [&](double u) {
    const double one_minus = 1.0 - u;
    if (one_minus <= 0.0) return CVector(dim, 0.0);
    const double k = scale * u / one_minus;
    const double jac = scale / (one_minus * one_minus);
    CVector v = f(k);
    for (auto& x : v) x *= jac;
    return v;
  };
  return integrate(mapped, 0.0, 1.0, dim, opt);
}

/// Throws NumericalError naming `what` when `r` did not converge.
inline const Result& require_converged(const Result& r, const std::string& what) {
  if (!r.converged) {
    double worst = 0.0;
    std::size_t at = 0;
    for (std::size_t c = 0; c < r.error.size(); ++c) {
      const double rel = r.error[c] / std::max(std::abs(r.value[c]), 1e-300);
      if (rel > worst) {
        worst = rel;
        at = c;
      }
    }
    throw NumericalError(what, r.value.empty() ? cplx{} : r.value[at],
                         r.error.empty() ? 0.0 : r.error[at]);
  }
  return r;
}

}  // namespace harvest::quad
