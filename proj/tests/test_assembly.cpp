#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <sstream>

#include "harvest/assembly.hpp"
#include "support/direct_state.hpp"

namespace {

using namespace harvest;
using namespace std::complex_literals;
using oracle::direct_second_order_state;
constexpr double pi = std::numbers::pi;

DetectorConfig det(DetectorLabel l, double x, double sigma, double gap, double lambda, InitialStateSpec init = {}) {
  DetectorConfig d;
  d.label = l;
  d.position = {x, 0.0, 0.0};
  d.smearing_width = sigma;
  d.gap = gap;
  d.coupling = lambda;
  d.initial = init;
  return d;
}

InitialStateSpec angles(double a, double b, double p = 0.0) { return InitialStateSpec(PureStateAngles(a, b), p); }

struct Case {
  FieldStateSpec state;
  DetectorConfig a, b;
  FrameSpec frame;
};

std::vector<Case> random_cases(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ua(0.0, pi), ub(0.0, 2.0 * pi), gap(0.5, 4.0), sep(1.5, 3.0);
  std::vector<Case> out;
  for (int k = 0; k < n; ++k) {
    Case c;
    const bool line = k % 2 == 1;
    c.state = line ? FieldStateSpec::massive_1p1(1.0) : FieldStateSpec::vacuum_3p1();
    c.frame = line && k % 4 == 3 ? FrameSpec(0.5) : FrameSpec{};
    c.a = det(DetectorLabel::A, 0.0, line ? 0.5 : 0.25, gap(rng), 0.01, angles(ua(rng), ub(rng)));
    c.b = det(DetectorLabel::B, sep(rng), line ? 0.5 : 0.25, gap(rng), 0.01, angles(ua(rng), ub(rng)));
    out.push_back(c);
  }
  return out;
}

TEST(Assembly, MatchesOperatorExpansion) {
  for (const auto& c : random_cases(8, 21)) {
    const auto in = compute_all(c.state, c.a, c.b, c.frame);
    const Matrix4c rho = assemble(in, c.a.initial, c.b.initial).matrix();
    const auto ref = direct_second_order_state(c.state, c.a, c.b, c.frame);
    const Matrix4c rho0 = initial_product_state(c.a.initial, c.b.initial);
    const double scale = (ref.rho - rho0).cwiseAbs().maxCoeff();
    const double diff = (rho - ref.rho).cwiseAbs().maxCoeff();
    EXPECT_LT(diff, 1e-10 * scale + ref.error) << to_string(c.state.kind) << " v=" << c.frame.v;
  }
}

TEST(Assembly, MixedStateMatchesOperatorExpansion) {
  auto a = det(DetectorLabel::A, 0.0, 0.25, 2.0, 0.01, angles(0.7, 1.1, 2e-6));
  auto b = det(DetectorLabel::B, 2.0, 0.25, 1.5, 0.01, angles(2.1, 4.0, 5e-6));
  const auto state = FieldStateSpec::vacuum_3p1();
  const auto in = compute_all(state, a, b);
  std::ostringstream warn;
  const Matrix4c rho = assemble(in, a.initial, b.initial, &warn).matrix();
  const auto ref = direct_second_order_state(state, a, b, FrameSpec{});
  // The operator expansion keeps p * lambda^2 cross terms the low-mixedness
  // assembly drops; they sit at the p * lambda^2 scale.
  const double dropped = 10.0 * 5e-6 * (ref.rho - initial_product_state(a.initial, b.initial)).cwiseAbs().maxCoeff() +
                         4.0 * 2e-6 * 5e-6;
  EXPECT_LT((rho - ref.rho).cwiseAbs().maxCoeff(), dropped + ref.error + 1e-15);
  EXPECT_TRUE(warn.str().empty());
}

TEST(Assembly, AlternativeCrossTermReadingDisagreesWithOracle) {
  // Conjugating the P_AB term in the chi_A psi_B coherence is not the
  // operator expansion's result.
  auto a = det(DetectorLabel::A, 0.0, 0.25, 2.0, 0.01, angles(0.9, 0.8));
  auto b = det(DetectorLabel::B, 1.8, 0.25, 1.2, 0.01, angles(0.6, 2.3));
  b.switching_center = 0.7;  // P_AB is real for simultaneous switching
  const auto state = FieldStateSpec::vacuum_3p1();
  const auto in = compute_all(state, a, b);
  const auto blocks = general_blocks(in, a.initial, b.initial);
  const auto ref = direct_second_order_state(state, a, b, FrameSpec{});
  const double agree = std::abs(blocks.Y - ref.rho(2, 0));
  EXPECT_LT(agree, 1e-10 * std::abs(blocks.Y) + ref.error);

  const double ca = std::cos(0.9);
  const cplx pre = in.lambda[0] * in.lambda[1] * 0.5 * std::sin(2.0 * 0.6) * std::exp(-2.3i);
  const cplx swap = -pre * ca * ca * (std::conj(in.P[0][1].value) - in.P[0][1].value);
  EXPECT_GT(std::abs(blocks.Y + swap - ref.rho(2, 0)), 1e3 * agree + 1e-3 * std::abs(blocks.Y));
}

TEST(Assembly, GroundStateReduction) {
  const auto state = FieldStateSpec::vacuum_3p1();
  const auto a = det(DetectorLabel::A, 0.0, 0.25, 2.0, 0.02), b = det(DetectorLabel::B, 2.0, 0.25, 1.7, 0.03);
  const auto in = compute_all(state, a, b);
  const auto g = general_blocks(in, a.initial, b.initial);
  EXPECT_EQ(g.L_gen(0, 0), 0.02 * 0.02 * in.L[0][0].value);
  EXPECT_EQ(g.L_gen(1, 1), 0.03 * 0.03 * in.L[1][1].value);
  EXPECT_EQ(g.L_gen(0, 1), 0.02 * 0.03 * in.L[0][1].value);
  EXPECT_EQ(g.M_gen, 0.02 * 0.03 * in.M.value);
  EXPECT_EQ(g.X, 0.0);
  EXPECT_EQ(g.Y, 0.0);
  EXPECT_EQ(negativity_closed_form(g),
            leading_negativity(0.02 * 0.02 * in.L[0][0].value.real(), 0.03 * 0.03 * in.L[1][1].value.real(),
                               0.02 * 0.03 * in.M.value));
}

TEST(Assembly, ExcitedPsiSelectsReversedNoise) {
  const auto state = FieldStateSpec::massive_1p1(1.0);
  for (double beta : {0.0, 1.3, 5.0}) {
    const auto a = det(DetectorLabel::A, 0.0, 0.5, 2.0, 0.1, angles(pi / 2, beta));
    const auto b = det(DetectorLabel::B, 2.0, 0.5, 1.0, 0.1);
    const auto in = compute_all(state, a, b);
    const auto g = general_blocks(in, a.initial, b.initial);
    EXPECT_LT(std::abs(g.L_gen(0, 0) - 0.01 * in.Q[0][0].value), 1e-15);
  }
}

TEST(Assembly, ZeroCouplingGivesInitialState) {
  const auto state = FieldStateSpec::vacuum_3p1();
  const auto a = det(DetectorLabel::A, 0.0, 0.25, 2.0, 0.0, angles(0.4, 2.0));
  const auto b = det(DetectorLabel::B, 2.0, 0.25, 1.0, 0.0, angles(1.9, 0.3));
  const auto in = compute_all(state, a, b);
  const Matrix4c rho = assemble(in, a.initial, b.initial).matrix();
  EXPECT_EQ(rho, initial_product_state(a.initial, b.initial));
}

TEST(Assembly, StructuralZerosAreExact) {
  const auto a = det(DetectorLabel::A, 0.0, 0.25, 2.0, 0.01, angles(0.4, 2.0));
  const auto b = det(DetectorLabel::B, 2.0, 0.25, 1.0, 0.01, angles(1.9, 0.3));
  const auto in = compute_all(FieldStateSpec::vacuum_3p1(), a, b);
  const Matrix4c rho = assemble(in, a.initial, b.initial).matrix();
  for (auto [r, c] : {std::pair{1, 3}, {2, 3}, {3, 1}, {3, 2}, {3, 3}}) EXPECT_EQ(rho(r, c), cplx(0.0)) << r << c;
  EXPECT_EQ(rho(1, 1).imag(), 0.0);
  EXPECT_EQ(rho(2, 2).imag(), 0.0);
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-15);
}

TEST(Assembly, MixednessShiftsDiagonalAndLowersNegativity) {
  const auto a = det(DetectorLabel::A, 0.0, 0.25, 2.0, 0.01), b = det(DetectorLabel::B, 2.0, 0.25, 2.0, 0.01);
  const auto in = compute_all(FieldStateSpec::vacuum_3p1(), a, b);
  const auto g = general_blocks(in, a.initial, b.initial);
  const Matrix4c pure = assemble_pure(g).matrix();
  const double p = 1e-7;
  const Matrix4c mixed = assemble_mixed(g, p, 2 * p, nullptr).matrix();
  Matrix4c shift = Matrix4c::Zero();
  shift(0, 0) = -3 * p;
  shift(1, 1) = 2 * p;
  shift(2, 2) = p;
  EXPECT_LT((mixed - pure - shift).cwiseAbs().maxCoeff(), 1e-15);
  double prev = negativity_closed_form(g);
  ASSERT_GT(prev, 0.0);
  for (double q : {1e-8, 5e-8, 1e-7, 5e-7}) {
    const double n = negativity_closed_form(g, q, q);
    EXPECT_LE(n, prev);
    prev = n;
  }
  EXPECT_EQ(negativity_closed_form(g, 1e-5, 1e-5), 0.0);
}

TEST(Assembly, LargeMixednessWarns) {
  const auto a = det(DetectorLabel::A, 0.0, 0.25, 2.0, 0.01), b = det(DetectorLabel::B, 2.0, 0.25, 2.0, 0.01);
  const auto g = general_blocks(compute_all(FieldStateSpec::vacuum_3p1(), a, b), a.initial, b.initial);
  std::ostringstream warn;
  assemble_mixed(g, 0.2, 0.0, &warn);
  EXPECT_NE(warn.str().find("warning"), std::string::npos);
  EXPECT_THROW(assemble_mixed(g, 1.0, 0.0, nullptr), ValidationError);
}

TEST(Assembly, StrongCouplingRejected) {
  const auto a = det(DetectorLabel::A, 0.0, 0.25, 0.1, 30.0), b = det(DetectorLabel::B, 2.0, 0.25, 0.1, 30.0);
  const auto in = compute_all(FieldStateSpec::vacuum_3p1(), a, b);
  EXPECT_THROW(assemble(in, a.initial, b.initial), ValidationError);
}

TEST(Assembly, ClosedFormRejectsComplexNoise) {
  GeneralizedBlocks g;
  g.L_gen(0, 0) = cplx(1e-6, 1e-9);
  g.L_gen(1, 1) = 1e-6;
  g.err_L_AA = 1e-12;
  EXPECT_THROW(negativity_closed_form(g), NumericalError);
  g.err_L_AA = 1e-8;
  EXPECT_NO_THROW(negativity_closed_form(g));
}

TEST(Assembly, ClosedFormTracksEigenNegativity) {
  const auto a0 = det(DetectorLabel::A, 0.0, 0.25, 2.0, 1.0), b0 = det(DetectorLabel::B, 2.0, 0.25, 2.0, 1.0);
  const auto base = compute_all(FieldStateSpec::vacuum_3p1(), a0, b0);
  std::vector<double> gaps;
  for (double lam : {1e-1, 1e-2, 1e-3}) {
    auto in = base;
    in.lambda = {lam, lam};
    const auto g = general_blocks(in, a0.initial, b0.initial);
    const double nc = negativity_closed_form(g);
    const double ne = negativity_eigen(assemble_pure(g));
    ASSERT_GT(nc, 0.0);
    gaps.push_back(std::abs(nc - ne));
  }
  // The mismatch is fourth order.
  EXPECT_NEAR(std::log10(gaps[0] / gaps[1]), 4.0, 0.3);
  EXPECT_NEAR(std::log10(gaps[1] / gaps[2]), 4.0, 0.3);
}

}  // namespace
