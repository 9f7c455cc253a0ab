#pragma once

// Second-order joint state for arbitrary pure (and low-mixedness) initial
// detector states, in the {psi, chi} product basis.

#include <cmath>
#include <complex>
#include <iostream>
#include <string>

#include "harvest/integrals.hpp"
#include "harvest/qcore.hpp"

namespace harvest {

struct GeneralizedBlocks {
  Matrix2c L_gen = Matrix2c::Zero();
  cplx M_gen{};
  cplx I_AA{}, I_BB{};
  cplx J1{}, J2{};
  cplx X{}, Y{};
  // Propagated absolute error bounds.
  double err_L_AA = 0.0, err_L_BB = 0.0, err_L_AB = 0.0, err_M = 0.0, err_X = 0.0, err_Y = 0.0;
};

namespace detail {

/// Accumulates sum_k c_k v_k together with sum_k |c_k| err_k.
struct Combo {
  cplx value{};
  double error = 0.0;

  void add(cplx c, const Estimate& e) {
    value += c * e.value;
    error += std::abs(c) * e.error;
  }
  void add(cplx c, cplx v, double err) {
    value += c * v;
    error += std::abs(c) * err;
  }
};

}  // namespace detail

/// Trigonometric combinations of the integrals for the given initial
/// angles. The mixedness parameters do not enter here.
inline GeneralizedBlocks general_blocks(const HarvestIntegrals& in, const InitialStateSpec& init_a,
                                        const InitialStateSpec& init_b) {
  using namespace std::complex_literals;
  const std::array<const PureStateAngles*, 2> ang{&init_a.angles(), &init_b.angles()};
  double c[2], s[2];
  cplx ph[2];  // e^{i beta}
  for (int i = 0; i < 2; ++i) {
    c[i] = std::cos(ang[i]->alpha());
    s[i] = std::sin(ang[i]->alpha());
    ph[i] = std::exp(1i * ang[i]->beta());
  }
  const double la = in.lambda[0], lb = in.lambda[1];
  const double lam[2] = {la, lb};

  GeneralizedBlocks out;
  double err_l[2][2];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      detail::Combo t;
      const double ll = lam[i] * lam[j];
      t.add(ll * c[i] * c[i] * c[j] * c[j], in.L[i][j]);
      t.add(-ll * c[i] * c[i] * s[j] * s[j] * std::conj(ph[j] * ph[j]), in.P[i][j]);
      t.add(-ll * s[i] * s[i] * c[j] * c[j] * ph[i] * ph[i], in.K[i][j]);
      t.add(ll * s[i] * s[i] * s[j] * s[j] * ph[i] * ph[i] * std::conj(ph[j] * ph[j]), in.Q[i][j]);
      out.L_gen(i, j) = t.value;
      err_l[i][j] = t.error;
    }
  out.err_L_AA = err_l[0][0];
  out.err_L_BB = err_l[1][1];
  out.err_L_AB = err_l[0][1];

  const double lab = la * lb;
  {
    detail::Combo m;
    m.add(lab * c[0] * c[0] * c[1] * c[1], in.M);
    m.add(-lab * c[0] * c[0] * s[1] * s[1] * ph[1] * ph[1], in.R);
    m.add(-lab * s[0] * s[0] * c[1] * c[1] * ph[0] * ph[0], in.S);
    m.add(lab * s[0] * s[0] * s[1] * s[1] * ph[0] * ph[0] * ph[1] * ph[1], in.V);
    out.M_gen = m.value;
    out.err_M = m.error;
  }

  // Local first-row terms.
  detail::Combo local[2];
  for (int i = 0; i < 2; ++i) {
    const double l2 = lam[i] * lam[i];
    const double c3s = c[i] * c[i] * c[i] * s[i];
    const double cs3 = c[i] * s[i] * s[i] * s[i];
    local[i].add(-l2 * c3s * std::conj(ph[i]), in.P[i][i]);
    local[i].add(-l2 * c3s * ph[i], in.L[i][i]);
    local[i].add(l2 * cs3 * ph[i], in.Q[i][i]);
    local[i].add(l2 * cs3 * ph[i] * ph[i] * ph[i], in.K[i][i]);
    local[i].add(ph[i] * s[i] * c[i], conj(in.eta[i]));
    local[i].add(-ph[i] * s[i] * c[i], conj(in.gamma[i]));
  }
  out.I_AA = local[0].value;
  out.I_BB = local[1].value;

  // Cross first-row terms. J1 pairs <psi_A|mu_A|psi_A> with <chi_B|mu_B|psi_B>.
  const Estimate& L = in.L[0][1];
  const Estimate& P = in.P[0][1];
  const Estimate& K = in.K[0][1];
  const Estimate& Q = in.Q[0][1];
  detail::Combo j1, j2;
  {
    const cplx pre = lab * 0.5 * std::sin(2.0 * ang[0]->alpha()) * std::conj(ph[0]);
    const cplx a2 = ph[0] * ph[0], b2 = ph[1] * ph[1];
    const double cb2 = c[1] * c[1], sb2 = s[1] * s[1];
    j1.add(-pre * cb2, in.M);
    j1.add(-pre * cb2, conj(K));
    j1.add(-pre * cb2 * a2, in.S);
    j1.add(-pre * cb2 * a2, conj(L));
    j1.add(pre * b2 * sb2, in.R);
    j1.add(pre * b2 * sb2, conj(Q));
    j1.add(pre * b2 * sb2 * a2, in.V);
    j1.add(pre * b2 * sb2 * a2, conj(P));
  }
  {
    const cplx pre = lab * 0.5 * std::sin(2.0 * ang[1]->alpha()) * std::conj(ph[1]);
    const cplx a2 = ph[0] * ph[0], b2 = ph[1] * ph[1];
    const double ca2 = c[0] * c[0], sa2 = s[0] * s[0];
    j2.add(-pre * ca2, in.M);
    j2.add(-pre * ca2, P);
    j2.add(-pre * ca2 * b2, in.R);
    j2.add(-pre * ca2 * b2, L);
    j2.add(pre * a2 * sa2, in.S);
    j2.add(pre * a2 * sa2, Q);
    j2.add(pre * a2 * sa2 * b2, in.V);
    j2.add(pre * a2 * sa2 * b2, K);
  }
  out.J1 = j1.value;
  out.J2 = j2.value;
  out.X = out.I_BB + out.J1;
  out.Y = out.I_AA + out.J2;
  out.err_X = local[1].error + j1.error;
  out.err_Y = local[0].error + j2.error;
  return out;
}

namespace detail {

inline double positivity_budget(const Matrix4c& second_order) {
  return 4.0 * second_order.squaredNorm() + 1e-14;
}

inline Matrix4c second_order_part(const GeneralizedBlocks& b) {
  const double laa = b.L_gen(0, 0).real();
  const double lbb = b.L_gen(1, 1).real();
  const cplx lab = b.L_gen(0, 1);
  Matrix4c r = Matrix4c::Zero();
  r(0, 0) = -laa - lbb;
  r(1, 0) = b.X;
  r(2, 0) = b.Y;
  r(3, 0) = b.M_gen;
  r(0, 1) = std::conj(b.X);
  r(0, 2) = std::conj(b.Y);
  r(0, 3) = std::conj(b.M_gen);
  r(1, 1) = lbb;
  r(2, 2) = laa;
  r(1, 2) = std::conj(lab);
  r(2, 1) = lab;
  return r;
}

}  // namespace detail

/// The 4x4 second-order state for pure initial states. The local noise
/// entries use the real parts of L_gen_ii, which are real up to quadrature
/// error.
inline JointState assemble_pure(const GeneralizedBlocks& b) {
  const Matrix4c r2 = detail::second_order_part(b);
  if (1.0 + r2(0, 0).real() < 0.0)
    throw ValidationError("1 - L_gen_AA - L_gen_BB < 0: coupling too strong for second-order assembly");
  Matrix4c rho = r2;
  rho(0, 0) += 1.0;
  return JointState(rho, BasisTag::PsiChi, 2, detail::positivity_budget(r2));
}

/// Mixed initial states (1 - p) |psi><psi| + p |chi><chi|: the mixedness
/// enters the diagonal only, to the order kept here.
inline JointState assemble_mixed(const GeneralizedBlocks& b, double p_a, double p_b, std::ostream* warn = &std::cerr) {
  for (double p : {p_a, p_b})
    if (!(p >= 0.0 && p < 1.0)) throw ValidationError("mixedness p must lie in [0, 1)");
  const double scale = std::max({std::abs(b.L_gen(0, 0)), std::abs(b.L_gen(1, 1)), std::abs(b.M_gen), 1e-300});
  if (warn && std::max(p_a, p_b) > 100.0 * scale)
    *warn << "warning: mixedness " << std::max(p_a, p_b)
          << " is far above the second-order noise scale " << scale
          << "; the low-mixedness assembly and closed-form negativity are not reliable here\n";
  const Matrix4c r2 = detail::second_order_part(b);
  if (1.0 + r2(0, 0).real() - p_a - p_b < 0.0)
    throw ValidationError("1 - L_gen_AA - L_gen_BB - p_A - p_B < 0: outside the perturbative regime");
  Matrix4c rho = r2;
  rho(0, 0) += 1.0 - p_a - p_b;
  rho(1, 1) += p_b;
  rho(2, 2) += p_a;
  return JointState(rho, BasisTag::PsiChi, 2, detail::positivity_budget(r2) + 4.0 * p_a * p_b);
}

/// Leading-order negativity from L_gen and M_gen, including mixedness.
inline double negativity_closed_form(const GeneralizedBlocks& b, double p_a = 0.0, double p_b = 0.0) {
  const double tol_floor = 1e-15;
  if (std::abs(b.L_gen(0, 0).imag()) > b.err_L_AA + tol_floor ||
      std::abs(b.L_gen(1, 1).imag()) > b.err_L_BB + tol_floor) {
    std::ostringstream os;
    os << "local noise terms must be real: Im L_gen_AA = " << b.L_gen(0, 0).imag()
       << ", Im L_gen_BB = " << b.L_gen(1, 1).imag();
    throw NumericalError("L_gen", os.str());
  }
  return leading_negativity(b.L_gen(0, 0).real(), b.L_gen(1, 1).real(), b.M_gen, p_a, p_b);
}

inline double negativity_closed_form(const HarvestIntegrals& in, const InitialStateSpec& init_a,
                                     const InitialStateSpec& init_b) {
  return negativity_closed_form(general_blocks(in, init_a, init_b), init_a.mixedness(), init_b.mixedness());
}

/// Assembles pure or mixed according to the initial-state specs.
inline JointState assemble(const HarvestIntegrals& in, const InitialStateSpec& init_a,
                           const InitialStateSpec& init_b, std::ostream* warn = &std::cerr) {
  const auto blocks = general_blocks(in, init_a, init_b);
  if (init_a.mixedness() == 0.0 && init_b.mixedness() == 0.0) return assemble_pure(blocks);
  return assemble_mixed(blocks, init_a.mixedness(), init_b.mixedness(), warn);
}

}  // namespace harvest
