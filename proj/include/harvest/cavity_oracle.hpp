#pragma once

// Nonperturbative reference: two qubits coupled to a mode-truncated 1+1D
// Dirichlet cavity, evolved in the interaction picture.
//
//   H_I(t) = sum_i l_i chi_i(t) mu_i(t) (x) sum_n f_in (a_n e^{-i w_n t} + h.c.)
//   f_in   = \int F_i(x) sin(k_n x) / sqrt(w_n L) dx = sin(k_n x_i) e^{-s_i^2 k_n^2 / 4} / sqrt(w_n L)
//
// Detector basis is {g, e} internally; results are returned in the
// {psi, chi} basis to match the perturbative assembly.

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "harvest/correlators.hpp"
#include "harvest/detector.hpp"
#include "harvest/errors.hpp"
#include "harvest/qcore.hpp"

namespace harvest {

struct CavityModel {
  double cavity_length = 4.0;
  int n_modes = 3;
  int fock_cutoff = 3;  // levels 0 .. fock_cutoff - 1 per mode
  double time_step = 0.01;
  int integrator_order = 4;
  double tail_widths = 7.0;  // window half-width in units of T
  long max_dimension = 1 << 16;

  void validate() const {
    if (!(cavity_length > 0.0)) throw ValidationError("cavity_length must be > 0");
    if (n_modes < 1) throw ValidationError("n_modes must be >= 1");
    if (fock_cutoff < 2) throw ValidationError("fock_cutoff must be >= 2");
    if (!(time_step > 0.0)) throw ValidationError("time_step must be > 0");
    if (integrator_order != 2 && integrator_order != 4) throw ValidationError("integrator_order must be 2 or 4");
    if (dimension() > max_dimension) throw ValidationError("cavity Hilbert space exceeds the memory budget");
  }

  long dimension() const {
    long d = 4;
    for (int n = 0; n < n_modes; ++n) d *= fock_cutoff;
    return d;
  }

  double frequency(int n) const { return n * std::numbers::pi / cavity_length; }

  FieldStateSpec field() const { return FieldStateSpec::cavity(cavity_length, n_modes); }
};

struct ExactResult {
  Matrix4c rho_psichi;
  Matrix4c rho_energy;
  double max_norm_drift = 0.0;
  double top_level_population = 0.0;  // max over modes
  bool leakage_warning = false;
  long steps = 0;
};

/// Switching override: chi_i(t) for each detector. Defaults to the
/// Gaussian profile of the DetectorConfig.
using SwitchingFn = std::function<double(int detector, double t)>;

namespace detail {

using SpMat = Eigen::SparseMatrix<cplx>;
using VecX = Eigen::VectorXcd;

class CavitySystem {
 public:
  CavitySystem(const CavityModel& m, const DetectorConfig& da, const DetectorConfig& db) : m_(m) {
    dim_ = m.dimension();
    const std::array<const DetectorConfig*, 2> det{&da, &db};
    for (int i = 0; i < 2; ++i) {
      gap_[i] = det[i]->gap;
      lambda_[i] = det[i]->coupling;
      for (int n = 1; n <= m.n_modes; ++n) {
        const double w = m.frequency(n);
        const double k = w;
        const double s = det[i]->smearing_width;
        f_[i].push_back(std::sin(k * det[i]->position[0]) * std::exp(-0.25 * s * s * k * k) / std::sqrt(w * m.cavity_length));
      }
    }
    // Products sigma^{+}_i (x) a_n; the other operator orderings follow by adjoint.
    for (int i = 0; i < 2; ++i)
      for (int n = 0; n < m.n_modes; ++n) {
        plus_lower_[i].push_back(build(i, +1, n, false));
        plus_raise_[i].push_back(build(i, +1, n, true));
      }
  }

  long dim() const { return dim_; }

  /// H_I(t) applied to v.
  VecX apply(double t, const std::array<double, 2>& chi, const VecX& v) const {
    using namespace std::complex_literals;
    VecX out = VecX::Zero(dim_);
    for (int i = 0; i < 2; ++i) {
      if (lambda_[i] == 0.0 || chi[i] == 0.0) continue;
      for (int n = 0; n < m_.n_modes; ++n) {
        const double w = m_.frequency(n + 1);
        const cplx c = lambda_[i] * chi[i] * f_[i][n];
        // s+ a e^{i(W - w)t}, s+ a^dag e^{i(W + w)t}, and their adjoints.
        const cplx e1 = c * std::exp(1i * (gap_[i] - w) * t);
        const cplx e2 = c * std::exp(1i * (gap_[i] + w) * t);
        out.noalias() += e1 * (plus_lower_[i][n] * v);
        out.noalias() += e2 * (plus_raise_[i][n] * v);
        out.noalias() += std::conj(e1) * (plus_lower_[i][n].adjoint() * v);
        out.noalias() += std::conj(e2) * (plus_raise_[i][n].adjoint() * v);
      }
    }
    return out;
  }

  /// Population of the highest retained Fock level, per mode, maximized.
  double top_level_population(const VecX& v) const {
    double worst = 0.0;
    for (int n = 0; n < m_.n_modes; ++n) {
      double p = 0.0;
      for (long idx = 0; idx < dim_; ++idx)
        if (digit(idx, n) == m_.fock_cutoff - 1) p += std::norm(v(idx));
      worst = std::max(worst, p);
    }
    return worst;
  }

  /// Reduced detector state (energy basis, index 2 a + b).
  Matrix4c reduced(const VecX& v) const {
    const long field_dim = dim_ / 4;
    Matrix4c r = Matrix4c::Zero();
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q) {
        cplx s = 0.0;
        for (long f = 0; f < field_dim; ++f) s += v(p * field_dim + f) * std::conj(v(q * field_dim + f));
        r(p, q) = s;
      }
    return r;
  }

 private:
  int digit(long idx, int mode) const {
    long field = idx % (dim_ / 4);
    for (int n = m_.n_modes - 1; n > mode; --n) field /= m_.fock_cutoff;
    return int(field % m_.fock_cutoff);
  }

  // index = det * field_dim + sum_n occ_n * cutoff^(n_modes - 1 - n)
  SpMat build(int detector, int sign, int mode, bool raise) const {
    const long field_dim = dim_ / 4;
    long stride = 1;
    for (int n = m_.n_modes - 1; n > mode; --n) stride *= m_.fock_cutoff;
    std::vector<Eigen::Triplet<cplx>> trip;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        int bits[2] = {a, b};
        // sigma^+ = |e><g|: needs g (0) on `detector`, maps to e (1).
        if (sign > 0 && bits[detector] != 0) continue;
        if (sign < 0 && bits[detector] != 1) continue;
        int out_bits[2] = {a, b};
        out_bits[detector] = sign > 0 ? 1 : 0;
        const long din = 2 * a + b;
        const long dout = 2 * out_bits[0] + out_bits[1];
        for (long f = 0; f < field_dim; ++f) {
          const int occ = int((f / stride) % m_.fock_cutoff);
          const int nocc = raise ? occ + 1 : occ - 1;
          if (nocc < 0 || nocc >= m_.fock_cutoff) continue;
          const double amp = std::sqrt(double(raise ? occ + 1 : occ));
          const long fout = f + (nocc - occ) * stride;
          trip.emplace_back(dout * field_dim + fout, din * field_dim + f, amp);
        }
      }
    SpMat s(dim_, dim_);
    s.setFromTriplets(trip.begin(), trip.end());
    return s;
  }

  CavityModel m_;
  long dim_ = 0;
  std::array<double, 2> gap_{}, lambda_{};
  std::array<std::vector<double>, 2> f_;
  std::array<std::vector<SpMat>, 2> plus_lower_, plus_raise_;
};

/// exp(A) v for an operator given as a matvec, by Taylor series.
template <class Op>
VecX expm_apply(const Op& a, const VecX& v) {
  VecX term = v, sum = v;
  for (int k = 1; k < 60; ++k) {
    term = a(term) / double(k);
    sum += term;
    if (term.norm() < 1e-18 * sum.norm()) break;
  }
  return sum;
}

}  // namespace detail

/// Exact (up to truncation and time stepping) reduced state after the
/// switching has run its course. Pure initial states are propagated
/// directly; mixed ones as an ensemble of product basis states.
inline ExactResult exact_evolve(const CavityModel& model, const DetectorConfig& da, const DetectorConfig& db,
                                const std::optional<SwitchingFn>& switching = std::nullopt,
                                std::optional<std::pair<double, double>> window = std::nullopt) {
  using namespace std::complex_literals;
  model.validate();
  da.validate();
  db.validate();
  const std::array<const DetectorConfig*, 2> det{&da, &db};
  const detail::CavitySystem sys(model, da, db);

  SwitchingFn chi = switching ? *switching : SwitchingFn([&](int i, double t) {
    const double u = (t - det[i]->switching_center) / det[i]->switching_width;
    return std::exp(-u * u);
  });
  double t0, t1;
  if (window) {
    t0 = window->first;
    t1 = window->second;
  } else {
    t0 = std::min(da.switching_center - model.tail_widths * da.switching_width,
                  db.switching_center - model.tail_widths * db.switching_width);
    t1 = std::max(da.switching_center + model.tail_widths * da.switching_width,
                  db.switching_center + model.tail_widths * db.switching_width);
  }
  const long steps = std::max<long>(1, long(std::ceil((t1 - t0) / model.time_step)));
  const double h = (t1 - t0) / double(steps);

  // Ensemble over the {psi, chi} product basis weighted by mixedness.
  const Matrix2c ua = basis_change_matrix(da.initial.angles());
  const Matrix2c ub = basis_change_matrix(db.initial.angles());
  const double pa[2] = {1.0 - da.initial.mixedness(), da.initial.mixedness()};
  const double pb[2] = {1.0 - db.initial.mixedness(), db.initial.mixedness()};

  ExactResult res;
  res.steps = steps;
  res.rho_energy = Matrix4c::Zero();
  const long field_dim = sys.dim() / 4;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const double w = pa[a] * pb[b];
      if (w == 0.0) continue;
      detail::VecX v = detail::VecX::Zero(sys.dim());
      // Column a of U_A holds the energy coordinates of psi (a=0) or chi (a=1).
      for (int ga = 0; ga < 2; ++ga)
        for (int gb = 0; gb < 2; ++gb) v((2 * ga + gb) * field_dim) = ua(ga, a) * ub(gb, b);

      for (long s = 0; s < steps; ++s) {
        const double ts = t0 + s * h;
        if (model.integrator_order == 2) {
          const double tm = ts + 0.5 * h;
          const std::array<double, 2> c{chi(0, tm), chi(1, tm)};
          auto op = [&](const detail::VecX& x) -> detail::VecX { return (-1i * h) * sys.apply(tm, c, x); };
          v = detail::expm_apply(op, v);
        } else {
          const double off = std::sqrt(3.0) / 6.0;
          const double t_1 = ts + (0.5 - off) * h, t_2 = ts + (0.5 + off) * h;
          const std::array<double, 2> c1{chi(0, t_1), chi(1, t_1)}, c2{chi(0, t_2), chi(1, t_2)};
          const double kc = std::sqrt(3.0) / 12.0 * h * h;
          auto op = [&](const detail::VecX& x) -> detail::VecX {
            const detail::VecX h1x = sys.apply(t_1, c1, x);
            const detail::VecX h2x = sys.apply(t_2, c2, x);
            return (-0.5i * h) * (h1x + h2x) + kc * (sys.apply(t_1, c1, h2x) - sys.apply(t_2, c2, h1x));
          };
          v = detail::expm_apply(op, v);
        }
        const double drift = std::abs(v.norm() - 1.0);
        res.max_norm_drift = std::max(res.max_norm_drift, drift);
        if (drift > 1e-8) {
          std::ostringstream os;
          os << "state norm drifted by " << drift << " at t = " << ts + h << " with time_step " << h
             << "; reduce time_step";
          throw NumericalError("exact_evolve", os.str());
        }
      }
      res.top_level_population = std::max(res.top_level_population, sys.top_level_population(v));
      res.rho_energy += w * sys.reduced(v);
    }
  res.leakage_warning = res.top_level_population > 1e-6;
  const Matrix4c u = joint_basis_change(da.initial.angles(), db.initial.angles());
  res.rho_psichi = u.adjoint() * res.rho_energy * u;
  return res;
}

/// Trace norm distance (1/2) ||a - b||_1 of two Hermitian matrices.
inline double trace_distance(const Matrix4c& a, const Matrix4c& b) {
  const Matrix4c d = 0.5 * ((a - b) + (a - b).adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(d, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

struct ConvergenceRow {
  std::string knob;
  double value = 0.0;
  double max_entry_delta = 0.0;  // vs the previous row of the same knob; NaN for the first
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  bool converged = false;
  bool non_monotone = false;

  void write_csv(std::ostream& os) const {
    os << "knob,value,max_entry_delta\n";
    os.precision(17);
    for (const auto& r : rows) os << r.knob << ',' << r.value << ',' << r.max_entry_delta << '\n';
  }
};

/// Refines fock_cutoff, time_step and n_modes one at a time from `model`
/// and tabulates the change in the reduced state between refinements.
inline ConvergenceReport convergence_sweep(const CavityModel& model, const DetectorConfig& da,
                                           const DetectorConfig& db, int refinements = 2,
                                           double threshold = 1e-7) {
  ConvergenceReport rep;
  rep.converged = true;
  auto run_knob = [&](const std::string& knob, auto mutate, auto value_of) {
    CavityModel m = model;
    std::optional<Matrix4c> prev;
    double prev_delta = std::numeric_limits<double>::infinity();
    double last_delta = std::numeric_limits<double>::quiet_NaN();
    for (int r = 0; r <= refinements; ++r) {
      if (r > 0) mutate(m);
      const Matrix4c rho = exact_evolve(m, da, db).rho_psichi;
      double delta = std::numeric_limits<double>::quiet_NaN();
      if (prev) {
        delta = (rho - *prev).cwiseAbs().maxCoeff();
        if (delta > prev_delta) rep.non_monotone = true;
        prev_delta = delta;
        last_delta = delta;
      }
      rep.rows.push_back({knob, value_of(m), delta});
      prev = rho;
    }
    if (!(last_delta < threshold)) rep.converged = false;
  };
  run_knob("fock_cutoff", [](CavityModel& m) { m.fock_cutoff += 1; }, [](const CavityModel& m) { return double(m.fock_cutoff); });
  run_knob("time_step", [](CavityModel& m) { m.time_step *= 0.5; }, [](const CavityModel& m) { return m.time_step; });
  run_knob("n_modes", [](CavityModel& m) { m.n_modes += 1; }, [](const CavityModel& m) { return double(m.n_modes); });
  return rep;
}

}  // namespace harvest
