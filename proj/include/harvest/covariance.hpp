#pragma once

// Foliation dependence of the second-order state: the same pipeline run
// with time ordering along two boosted time functions.

#include <future>
#include <optional>

#include <Eigen/Dense>

#include "harvest/assembly.hpp"

namespace harvest {

struct FrameResult {
  HarvestIntegrals integrals;
  GeneralizedBlocks blocks;
  Matrix4c rho_psichi;
  double negativity_eigen = 0.0;
  double negativity_closed = 0.0;
};

inline FrameResult evaluate_in_frame(const FieldStateSpec& state, const DetectorConfig& da, const DetectorConfig& db,
                                     const FrameSpec& frame, const IntegralOptions& opt = {},
                                     IntegralCache* cache = nullptr) {
  FrameResult r;
  r.integrals = compute_all(state, da, db, frame, opt, cache);
  r.blocks = general_blocks(r.integrals, da.initial, db.initial);
  const JointState js = assemble(r.integrals, da.initial, db.initial);
  r.rho_psichi = js.matrix();
  r.negativity_eigen = negativity_eigen(js);
  r.negativity_closed = negativity_closed_form(r.blocks, da.initial.mixedness(), db.initial.mixedness());
  return r;
}

/// Assembled state whose gamma/eta terms use the ordering of `frame`.
inline JointState rho_in_frame(const FieldStateSpec& state, const DetectorConfig& da, const DetectorConfig& db,
                               const FrameSpec& frame, const IntegralOptions& opt = {}) {
  return assemble(compute_all(state, da, db, frame, opt), da.initial, db.initial);
}

struct CommutatorFit {
  bool applicable = false;
  cplx a{}, b{};
  double residual = 0.0;  // Frobenius norm of delta - model
};

struct NonCovariantReport {
  FrameSpec frame_t, frame_s;
  Matrix4c rho_t, rho_s;  // energy eigenbasis
  Matrix4c delta_rho;     // rho_t - rho_s, energy eigenbasis
  CommutatorFit fit;
  double negativity_t = 0.0, negativity_s = 0.0;
  double negativity_closed_t = 0.0, negativity_closed_s = 0.0;
  cplx X_t{}, X_s{}, Y_t{}, Y_s{};
  double quad_error = 0.0;  // combined error bound on delta_rho entries
};

/// Single-detector initial state in the energy basis.
inline Matrix2c local_initial_energy(const InitialStateSpec& init) {
  Matrix2c r = Matrix2c::Zero();
  r(0, 0) = 1.0 - init.mixedness();
  r(1, 1) = init.mixedness();
  const Matrix2c u = basis_change_matrix(init.angles());
  return u * r * u.adjoint();
}

/// Least-squares fit of delta to a [rho_A, s_z] (x) rho_B + b rho_A (x) [rho_B, s_z].
inline CommutatorFit fit_commutator_model(const Matrix4c& delta, const InitialStateSpec& ia,
                                          const InitialStateSpec& ib) {
  const Matrix2c ra = local_initial_energy(ia);
  const Matrix2c rb = local_initial_energy(ib);
  const Matrix2c z = pauli_z();
  const Matrix4c ca = kron(ra * z - z * ra, rb);
  const Matrix4c cb = kron(ra, rb * z - z * rb);
  const double tiny = 1e-14;
  const bool use_a = ca.norm() > tiny, use_b = cb.norm() > tiny;
  CommutatorFit fit;
  if (!use_a && !use_b) {
    fit.residual = delta.norm();
    return fit;
  }
  fit.applicable = true;
  const int ncols = int(use_a) + int(use_b);
  Eigen::MatrixXcd design(16, ncols);
  Eigen::VectorXcd rhs(16);
  for (int k = 0; k < 16; ++k) {
    int col = 0;
    if (use_a) design(k, col++) = ca(k / 4, k % 4);
    if (use_b) design(k, col++) = cb(k / 4, k % 4);
    rhs(k) = delta(k / 4, k % 4);
  }
  const Eigen::VectorXcd coef = design.colPivHouseholderQr().solve(rhs);
  int col = 0;
  if (use_a) fit.a = coef(col++);
  if (use_b) fit.b = coef(col++);
  fit.residual = (design * coef - rhs).norm();
  return fit;
}

/// rho under frame_t minus rho under frame_s, the commutator-model fit and
/// both negativities. The two frames are evaluated concurrently.
inline NonCovariantReport non_covariant_report(const FieldStateSpec& state, const DetectorConfig& da,
                                               const DetectorConfig& db, const FrameSpec& frame_t,
                                               const FrameSpec& frame_s, const IntegralOptions& opt = {},
                                               IntegralCache* cache = nullptr) {
  const auto policy = opt.jobs > 1 ? std::launch::async : std::launch::deferred;
  auto ft = std::async(policy, [&] { return evaluate_in_frame(state, da, db, frame_t, opt, cache); });
  auto fs = std::async(policy, [&] { return evaluate_in_frame(state, da, db, frame_s, opt, cache); });
  const FrameResult t = ft.get();
  const FrameResult s = fs.get();

  NonCovariantReport rep;
  rep.frame_t = frame_t;
  rep.frame_s = frame_s;
  const auto& aa = da.initial.angles();
  const auto& ab = db.initial.angles();
  rep.rho_t = to_energy_basis(t.rho_psichi, aa, ab);
  rep.rho_s = to_energy_basis(s.rho_psichi, aa, ab);
  rep.delta_rho = rep.rho_t - rep.rho_s;
  rep.negativity_t = t.negativity_eigen;
  rep.negativity_s = s.negativity_eigen;
  rep.negativity_closed_t = t.negativity_closed;
  rep.negativity_closed_s = s.negativity_closed;
  rep.X_t = t.blocks.X;
  rep.X_s = s.blocks.X;
  rep.Y_t = t.blocks.Y;
  rep.Y_s = s.blocks.Y;
  // X and Y carry all frame dependence; each appears twice (conjugate pair)
  // and the unitary basis change cannot enlarge the Frobenius norm.
  rep.quad_error = 2.0 * (t.blocks.err_X + s.blocks.err_X + t.blocks.err_Y + s.blocks.err_Y);
  rep.fit = fit_commutator_model(rep.delta_rho, da.initial, db.initial);
  return rep;
}

}  // namespace harvest
