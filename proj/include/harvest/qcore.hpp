#pragma once

// Two-qubit state algebra: initial-state parameterization, basis changes,
// partial transposition and negativity.
//
// Joint basis ordering used throughout the library:
//   { |psi_A psi_B>, |psi_A chi_B>, |chi_A psi_B>, |chi_A chi_B> }
// i.e. index = 2 * a + b with a, b in {0 = psi, 1 = chi}. The same
// ordering with {g, e} replacing {psi, chi} is used for the energy basis.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "harvest/errors.hpp"

namespace harvest {

using cplx = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;

/// Angles (alpha, beta) fixing |psi> and its orthogonal partner |chi>
/// through
///   |g> =  cos(alpha) |psi> + e^{i beta} sin(alpha) |chi>
///   |e> = -e^{-i beta} sin(alpha) |psi> + cos(alpha) |chi>.
class PureStateAngles {
 public:
  PureStateAngles() = default;
  PureStateAngles(double alpha, double beta) : alpha_(alpha), beta_(beta) {
    if (!(alpha >= 0.0 && alpha < std::numbers::pi))
      throw ValidationError("alpha must lie in [0, pi), got " + std::to_string(alpha));
    if (!(beta >= 0.0 && beta < 2.0 * std::numbers::pi))
      throw ValidationError("beta must lie in [0, 2pi), got " + std::to_string(beta));
  }

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

  bool operator==(const PureStateAngles&) const = default;

 private:
  double alpha_ = 0.0;
  double beta_ = 0.0;
};

/// (1 - p) |psi><psi| + p |chi><chi|.
class InitialStateSpec {
 public:
  InitialStateSpec() = default;
  explicit InitialStateSpec(PureStateAngles angles, double mixedness_p = 0.0)
      : angles_(angles), p_(mixedness_p) {
    if (!(mixedness_p >= 0.0 && mixedness_p < 1.0))
      throw ValidationError("mixedness p must lie in [0, 1), got " + std::to_string(mixedness_p));
  }

  const PureStateAngles& angles() const noexcept { return angles_; }
  double mixedness() const noexcept { return p_; }

  bool operator==(const InitialStateSpec&) const = default;

 private:
  PureStateAngles angles_{};
  double p_ = 0.0;
};

enum class BasisTag { PsiChi, EnergyEigen };

/// Hermitian, unit-trace 4x4 state. Positivity is only required up to the
/// perturbative budget supplied at construction: truncated Dyson states
/// carry O(lambda^4) negative eigenvalues.
class JointState {
 public:
  static constexpr double kHermitianTol = 1e-12;
  static constexpr double kTraceTol = 1e-12;

  JointState(const Matrix4c& m, BasisTag basis, int valid_order, double positivity_budget)
      : m_(m), basis_(basis), order_(valid_order), budget_(positivity_budget) {
    const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (herm > kHermitianTol) {
      std::ostringstream os;
      os << "joint state is not Hermitian (max deviation " << herm << ")";
      throw ValidationError(os.str());
    }
    const cplx tr = m.trace();
    if (std::abs(tr - 1.0) > kTraceTol) {
      std::ostringstream os;
      os << "joint state trace is " << tr.real() << " (expected 1)";
      throw ValidationError(os.str());
    }
    const double lo = min_eigenvalue();
    if (lo < -budget_) {
      std::ostringstream os;
      os << "joint state eigenvalue " << lo << " below the positivity budget -" << budget_;
      throw ValidationError(os.str());
    }
  }

  const Matrix4c& matrix() const noexcept { return m_; }
  BasisTag basis() const noexcept { return basis_; }
  int valid_order() const noexcept { return order_; }
  double positivity_budget() const noexcept { return budget_; }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix4c> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

 private:
  Matrix4c m_;
  BasisTag basis_;
  int order_;
  double budget_;
};

/// sigma_z = |g><g| - |e><e| in the {g, e} ordering.
inline Matrix2c pauli_z() {
  Matrix2c z = Matrix2c::Zero();
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  return z;
}

/// sigma^+ = |e><g| and sigma^- = |g><e| in the {g, e} ordering.
inline Matrix2c sigma_plus() {
  Matrix2c s = Matrix2c::Zero();
  s(1, 0) = 1.0;
  return s;
}
inline Matrix2c sigma_minus() { return sigma_plus().adjoint(); }

/// Unitary taking {psi, chi} coordinates to {g, e} coordinates:
/// rows are <g| and <e| expressed in the {psi, chi} basis.
inline Matrix2c basis_change_matrix(const PureStateAngles& a) {
  using namespace std::complex_literals;
  const double c = std::cos(a.alpha());
  const double s = std::sin(a.alpha());
  const cplx ph = std::exp(1i * a.beta());
  Matrix2c u;
  u << c, std::conj(ph) * s,
      -ph * s, c;
  return u;
}

/// U_A (x) U_B for the joint ordering above.
inline Matrix4c joint_basis_change(const PureStateAngles& a, const PureStateAngles& b) {
  const Matrix2c ua = basis_change_matrix(a);
  const Matrix2c ub = basis_change_matrix(b);
  Matrix4c u;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) u(2 * i + k, 2 * j + l) = ua(i, j) * ub(k, l);
  return u;
}

inline Matrix4c kron(const Matrix2c& a, const Matrix2c& b) {
  Matrix4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return out;
}

inline Matrix4c partial_transpose_B(const Matrix4c& rho) {
  Matrix4c out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int ap = 0; ap < 2; ++ap)
        for (int bp = 0; bp < 2; ++bp) out(2 * a + b, 2 * ap + bp) = rho(2 * a + bp, 2 * ap + b);
  return out;
}

inline Matrix4c partial_transpose_A(const Matrix4c& rho) {
  Matrix4c out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int ap = 0; ap < 2; ++ap)
        for (int bp = 0; bp < 2; ++bp) out(2 * a + b, 2 * ap + bp) = rho(2 * ap + b, 2 * a + bp);
  return out;
}

inline Matrix4c partial_transpose_B(const JointState& rho) { return partial_transpose_B(rho.matrix()); }

/// Sum of (|x| - x) / 2 over the eigenvalues of the partial transpose.
inline double negativity_eigen(const Matrix4c& rho) {
  const Matrix4c pt = partial_transpose_B(rho);
  // Symmetrize so the solver sees an exactly Hermitian input.
  const Matrix4c herm = 0.5 * (pt + pt.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(herm, Eigen::EigenvaluesOnly);
  double n = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double x = es.eigenvalues()(i);
    n += 0.5 * (std::abs(x) - x);
  }
  return n;
}

inline double negativity_eigen(const JointState& rho) { return negativity_eigen(rho.matrix()); }

/// Leading-order negativity candidate
///   sqrt((La - Lb)^2 / 4 + |M|^2) - (La + Lb) / 2
/// with the local noise La = L_AA^gen + p_A, Lb = L_BB^gen + p_B.
/// Not clamped at zero.
inline double leading_negativity_raw(double l_aa, double l_bb, cplx m_gen, double p_a = 0.0,
                                     double p_b = 0.0) {
  const double la = l_aa + p_a;
  const double lb = l_bb + p_b;
  const double d = 0.5 * (la - lb);
  return std::sqrt(d * d + std::norm(m_gen)) - 0.5 * (la + lb);
}

inline double leading_negativity(double l_aa, double l_bb, cplx m_gen, double p_a = 0.0,
                                 double p_b = 0.0) {
  return std::max(0.0, leading_negativity_raw(l_aa, l_bb, m_gen, p_a, p_b));
}

/// Product state of the two initial detector states, in the psi/chi basis.
inline Matrix4c initial_product_state(const InitialStateSpec& a, const InitialStateSpec& b) {
  Matrix2c ra = Matrix2c::Zero(), rb = Matrix2c::Zero();
  ra(0, 0) = 1.0 - a.mixedness();
  ra(1, 1) = a.mixedness();
  rb(0, 0) = 1.0 - b.mixedness();
  rb(1, 1) = b.mixedness();
  return kron(ra, rb);
}

/// Moves a psi/chi-basis matrix into the energy eigenbasis.
inline Matrix4c to_energy_basis(const Matrix4c& m_psichi, const PureStateAngles& a,
                                const PureStateAngles& b) {
  const Matrix4c u = joint_basis_change(a, b);
  return u * m_psichi * u.adjoint();
}

}  // namespace harvest
