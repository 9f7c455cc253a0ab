#include <gtest/gtest.h>

#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "harvest/assembly.hpp"
#include "harvest/cavity_oracle.hpp"

namespace {

using namespace harvest;
using namespace std::complex_literals;

DetectorConfig det(DetectorLabel l, double x, double gap, double lambda, InitialStateSpec init) {
  DetectorConfig d;
  d.label = l;
  d.position = {x, 0.0, 0.0};
  d.smearing_width = 0.2;
  d.gap = gap;
  d.coupling = lambda;
  d.initial = init;
  return d;
}

InitialStateSpec angles(double a, double b) { return InitialStateSpec(PureStateAngles(a, b)); }

std::pair<DetectorConfig, DetectorConfig> pair(double lambda) {
  return {det(DetectorLabel::A, 1.5, 2.0, lambda, angles(0.6, 0.4)),
          det(DetectorLabel::B, 2.5, 1.7, lambda, angles(0.3, 2.0))};
}

TEST(CavityOracle, ZeroCouplingKeepsInitialState) {
  auto [a, b] = pair(0.0);
  const auto r = exact_evolve(CavityModel{}, a, b);
  EXPECT_LT((r.rho_psichi - initial_product_state(a.initial, b.initial)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(CavityOracle, PreservesNormAndTrace) {
  auto [a, b] = pair(0.05);
  const auto r = exact_evolve(CavityModel{}, a, b);
  EXPECT_LT(r.max_norm_drift, 1e-12);
  EXPECT_NEAR(r.rho_energy.trace().real(), 1.0, 1e-12);
  EXPECT_LT((r.rho_energy - r.rho_energy.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
}

// One detector, one mode, constant coupling on [0, tau]: the interaction
// picture propagator is e^{i H0 tau} e^{-i H tau}, computed densely.
TEST(CavityOracle, BoxSwitchingMatchesDenseExponential) {
  CavityModel m;
  m.n_modes = 1;
  m.fock_cutoff = 8;
  m.time_step = 0.005;
  const double tau = 2.0, lambda = 0.3;
  auto a = det(DetectorLabel::A, 1.3, 1.1, lambda, angles(0.5, 1.0));
  auto b = det(DetectorLabel::B, 2.5, 1.7, 0.0, angles(0.0, 0.0));
  const SwitchingFn box = [&](int i, double t) { return i == 0 && t >= 0.0 && t <= tau ? 1.0 : 0.0; };
  const auto r = exact_evolve(m, a, b, box, std::pair{0.0, tau});

  const int nf = m.fock_cutoff, dim = 2 * nf;
  const double w = m.frequency(1);
  const double f = std::sin(w * 1.3) * std::exp(-0.25 * 0.04 * w * w) / std::sqrt(w * m.cavity_length);
  Eigen::MatrixXcd H0 = Eigen::MatrixXcd::Zero(dim, dim), V = Eigen::MatrixXcd::Zero(dim, dim);
  // Index = 2-level state (g = 0, e = 1) * nf + Fock level.
  for (int q = 0; q < 2; ++q)
    for (int n = 0; n < nf; ++n) {
      H0(q * nf + n, q * nf + n) = q * a.gap + n * w;
      if (n + 1 < nf) {
        const double amp = lambda * f * std::sqrt(double(n + 1));
        V((1 - q) * nf + n + 1, q * nf + n) = amp;  // sigma_x a^dag
        V((1 - q) * nf + n, q * nf + n + 1) = amp;  // sigma_x a
      }
    }
  const Eigen::MatrixXcd H = H0 + V;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  const Eigen::MatrixXcd U = (1i * tau * H0.diagonal()).array().exp().matrix().asDiagonal() * es.eigenvectors() *
                             (-1i * tau * es.eigenvalues().cast<cplx>()).array().exp().matrix().asDiagonal() *
                             es.eigenvectors().adjoint();
  const Matrix2c ua = basis_change_matrix(a.initial.angles());
  Eigen::VectorXcd v0 = Eigen::VectorXcd::Zero(dim);
  v0(0) = ua(0, 0);
  v0(nf) = ua(1, 0);
  const Eigen::VectorXcd v = U * v0;
  Matrix2c rho_a = Matrix2c::Zero();
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q)
      for (int n = 0; n < nf; ++n) rho_a(p, q) += v(p * nf + n) * std::conj(v(q * nf + n));

  // B stays in |g>: rows/columns (2a + 0) of the joint energy-basis state.
  Matrix2c got;
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) got(p, q) = r.rho_energy(2 * p, 2 * q);
  EXPECT_LT((got - rho_a).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_GT((rho_a - ua.col(0) * ua.col(0).adjoint()).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(CavityOracle, FockCutoffConverged) {
  auto [a, b] = pair(0.01);
  CavityModel m3, m6;
  m6.fock_cutoff = 6;
  const auto r3 = exact_evolve(m3, a, b), r6 = exact_evolve(m6, a, b);
  EXPECT_LT((r3.rho_psichi - r6.rho_psichi).cwiseAbs().maxCoeff(), 1e-7);
  EXPECT_FALSE(r3.leakage_warning);
}

TEST(CavityOracle, TimeStepErrorFollowsIntegratorOrder) {
  auto [a, b] = pair(0.3);
  for (int order : {2, 4}) {
    CavityModel m;
    m.n_modes = 2;
    m.integrator_order = order;
    auto run = [&](double h) {
      m.time_step = h;
      return exact_evolve(m, a, b).rho_psichi;
    };
    const Matrix4c ref = run(0.0125);
    const double e1 = (run(0.2) - ref).cwiseAbs().maxCoeff();
    const double e2 = (run(0.1) - ref).cwiseAbs().maxCoeff();
    EXPECT_NEAR(std::log2(e1 / e2), double(order), 0.5) << order;
  }
}

TEST(CavityOracle, AgreesWithSecondOrderStateAtWeakCoupling) {
  auto [a, b] = pair(0.01);
  const CavityModel m;
  const auto exact = exact_evolve(m, a, b);
  const auto in = compute_all(m.field(), a, b);
  const Matrix4c pert = assemble(in, a.initial, b.initial).matrix();
  EXPECT_LT(trace_distance(exact.rho_psichi, pert), 1e-8);
}

TEST(CavityOracle, ConvergenceSweepWritesTable) {
  auto [a, b] = pair(0.01);
  CavityModel m;
  m.n_modes = 2;
  m.time_step = 0.02;
  const auto rep = convergence_sweep(m, a, b, 1, 1e-7);
  ASSERT_EQ(rep.rows.size(), 6u);
  EXPECT_TRUE(std::isnan(rep.rows[0].max_entry_delta));
  std::ostringstream os;
  rep.write_csv(os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "knob,value,max_entry_delta");
  EXPECT_EQ(rep.rows[3].knob, "time_step");
  EXPECT_DOUBLE_EQ(rep.rows[3].value, 0.01);
}

TEST(CavityOracle, LeakageFlaggedForStrongCoupling) {
  auto [a, b] = pair(2.0);
  CavityModel m;
  m.n_modes = 1;
  m.fock_cutoff = 2;
  EXPECT_TRUE(exact_evolve(m, a, b).leakage_warning);
}

TEST(CavityOracle, RejectsInvalidModels) {
  CavityModel m;
  m.integrator_order = 3;
  EXPECT_THROW(m.validate(), ValidationError);
  m = {};
  m.n_modes = 20;
  EXPECT_THROW(m.validate(), ValidationError);
  m = {};
  m.fock_cutoff = 1;
  EXPECT_THROW(m.validate(), ValidationError);
}

TEST(CavityOracle, MixedInitialStatesAverage) {
  auto [a, b] = pair(0.0);
  a.initial = InitialStateSpec(PureStateAngles(0.6, 0.4), 0.2);
  const auto r = exact_evolve(CavityModel{}, a, b);
  EXPECT_LT((r.rho_psichi - initial_product_state(a.initial, b.initial)).cwiseAbs().maxCoeff(), 1e-15);
}

}  // namespace
