#pragma once

// Reference second-order state built term by term from the Dyson expansion
//   rho2 = sum_ij l_i l_j \int\int [ mu_i rho0 mu_j' W(x',x)
//                                    - theta mu_i mu_j' rho0 W(x,x')
//                                    - theta rho0 mu_j' mu_i W(x',x) ]
// with mu_i(t) = s+ e^{i W t} + s- e^{-i W t}, using plain 4x4 operator
// products. Shares only the low-level pair integrals with the library.

#include <array>

#include "harvest/integrals.hpp"
#include "harvest/qcore.hpp"

namespace harvest::oracle {

inline Matrix4c local_op(const Matrix2c& op_ge, const PureStateAngles& ang, int which) {
  const Matrix2c u = basis_change_matrix(ang);
  const Matrix2c op = u.adjoint() * op_ge * u;
  return which == 0 ? kron(op, Matrix2c::Identity()) : kron(Matrix2c::Identity(), op);
}

struct DirectState {
  Matrix4c rho;
  double error = 0.0;  // sum of |coefficient| * integral error
};

inline DirectState direct_second_order_state(const FieldStateSpec& state, const DetectorConfig& da,
                                             const DetectorConfig& db, const FrameSpec& frame,
                                             const IntegralOptions& opt = {}) {
  const std::array<const DetectorConfig*, 2> det{&da, &db};
  const Matrix4c rho0 = initial_product_state(da.initial, db.initial);
  // sig[i][0] = sigma^+ on detector i, sig[i][1] = sigma^-.
  std::array<std::array<Matrix4c, 2>, 2> sig;
  for (int i = 0; i < 2; ++i) {
    sig[i][0] = local_op(sigma_plus(), det[i]->initial.angles(), i);
    sig[i][1] = local_op(sigma_minus(), det[i]->initial.angles(), i);
  }
  const Ordering later{frame.v, +1};
  DirectState out{rho0, 0.0};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double ll = det[i]->coupling * det[j]->coupling;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const int s1 = a == 0 ? +1 : -1;
          const int s2 = b == 0 ? +1 : -1;
          const Estimate u = pair_integral(state, *det[i], *det[j], s1, s2, WightmanOrder::Forward, std::nullopt, opt);
          const Estimate t = pair_integral(state, *det[i], *det[j], s1, s2, WightmanOrder::Backward, later, opt);
          const Estimate tp = pair_integral(state, *det[i], *det[j], s1, s2, WightmanOrder::Forward, later, opt);
          const Matrix4c& x = sig[i][a];
          const Matrix4c& y = sig[j][b];
          out.rho += ll * (u.value * (x * rho0 * y) - t.value * (x * y * rho0) - tp.value * (rho0 * y * x));
          out.error += ll * (u.error + t.error + tp.error);
        }
    }
  return out;
}

}  // namespace harvest::oracle
