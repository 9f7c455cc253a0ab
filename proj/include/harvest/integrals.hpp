#pragma once

// Second-order detector integrals.
//
// Unordered family (i at x, j at x'), sign pattern (s1, s2):
//   U_ij(s1, s2) = \int dV dV' L_i(x) L_j(x') W(x', x) e^{i (s1 W_i t + s2 W_j t')}
//   L = U(+,-)   P = U(+,+)   K = U(-,-)   Q = U(-,+)
// Feynman family (A at x, B at x'):
//   F(s1, s2) = -\int dV dV' L_A(x) L_B(x') G_F(x, x') e^{i (s1 W_A t + s2 W_B t')}
//   M = F(+,+)   R = F(+,-)   S = F(-,+)   V = F(-,-)
// Ordered local terms (detector i with itself, frame-dependent):
//   gamma_i = lambda_i^2 \int L_i L_i' W(x', x) e^{+i W_i (t - t')} theta(t_v(x) - t_v(x'))
//   eta_i   = lambda_i^2 \int L_i L_i' W(x', x) e^{-i W_i (t - t')} theta(t_v(x) - t_v(x'))
//
// Every integral is a momentum integral (or cavity mode sum) of the
// closed-form Gaussian plane-wave integrals in gaussian.hpp.

#include <array>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <vector>

#include "harvest/correlators.hpp"
#include "harvest/detector.hpp"
#include "harvest/gaussian.hpp"
#include "harvest/quadrature.hpp"

namespace harvest {

struct Estimate {
  cplx value{};
  double error = 0.0;

  bool operator==(const Estimate&) const = default;
};

inline Estimate conj(const Estimate& e) { return {std::conj(e.value), e.error}; }

struct IntegralOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-16;
  int max_intervals = 4000;
  int jobs = 1;

  quad::Options quad() const { return {rel_tol, abs_tol, max_intervals}; }
};

inline int index_of(DetectorLabel l) { return l == DetectorLabel::A ? 0 : 1; }

using PairTable = std::array<std::array<Estimate, 2>, 2>;

/// Complete set of second-order integrals for one scenario. L, P, K, Q,
/// M, R, S, V exclude the couplings; gamma and eta include lambda_i^2.
struct HarvestIntegrals {
  PairTable L{}, P{}, K{}, Q{};
  Estimate M{}, R{}, S{}, V{};
  std::array<Estimate, 2> gamma{}, eta{};
  std::array<double, 2> lambda{0.0, 0.0};
  FrameSpec frame{};

  bool operator==(const HarvestIntegrals& o) const {
    return L == o.L && P == o.P && K == o.K && Q == o.Q && M == o.M && R == o.R && S == o.S &&
           V == o.V && gamma == o.gamma && eta == o.eta && lambda == o.lambda && frame.v == o.frame.v;
  }
};

/// Which Wightman ordering an integrand carries.
enum class WightmanOrder {
  Forward,   // W(x', x)
  Backward,  // W(x, x')
};

/// One plane-wave contribution of
///   \int L_i(x) L_j(x') W e^{i (s1 W_i t + s2 W_j t')} [theta]
/// for the wave decomposition in correlators.hpp.
inline cplx wave_term(const PairGeometry& g, const PlaneWave& w, double freq_i, double freq_j,
                      WightmanOrder order, const std::optional<Ordering>& ord) {
  if (order == WightmanOrder::Forward)
    return w.weight * plane_wave_integral(g, freq_i + w.omega, freq_j - w.omega, w.p, w.q, ord);
  return std::conj(w.weight) * plane_wave_integral(g, freq_i - w.omega, freq_j + w.omega, -w.p, -w.q, ord);
}

namespace detail {

inline void check_frame_support(const FieldStateSpec& state, const FrameSpec& frame) {
  frame.validate();
  if (frame.v != 0.0 && state.spatial_dims() != 1)
    throw ValidationError("boosted time orderings are supported for 1+1D field states only");
}

inline double default_abs_tol(const DetectorConfig& di, const DetectorConfig& dj, const IntegralOptions& o) {
  return std::max(o.abs_tol, 1e-15 * std::numbers::pi * di.switching_width * dj.switching_width * 1e-2);
}

struct SignedTerm {
  int s1, s2;
  WightmanOrder order;
  std::optional<Ordering> ordering;
  double factor = 1.0;
};

/// Integrates several sign/ordering patterns for one detector pair in one
/// pass. Each output component is a sum of SignedTerms.
inline std::vector<Estimate> integrate_terms(const FieldStateSpec& state, const DetectorConfig& di,
                                             const DetectorConfig& dj,
                                             const std::vector<std::vector<SignedTerm>>& components,
                                             const std::vector<std::string>& names,
                                             const IntegralOptions& opt) {
  di.validate();
  dj.validate();
  const ModeSpectrum spectrum(state, di, dj);
  const PairGeometry g = PairGeometry::make(di, dj, state.spatial_dims() == 1);
  const std::size_t dim = components.size();
  auto fill = [&](const PlaneWave& w, quad::CVector& acc) {
    for (std::size_t c = 0; c < dim; ++c)
      for (const auto& t : components[c])
        acc[c] += t.factor * wave_term(g, w, t.s1 * di.gap, t.s2 * dj.gap, t.order, t.ordering);
  };
  quad::Options qo = opt.quad();
  qo.abs_tol = default_abs_tol(di, dj, opt);
  const auto r = spectrum.integrate(dim, fill, qo);
  if (!r.converged) {
    std::size_t worst = 0;
    double ratio = -1.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double tol = std::max(qo.abs_tol, qo.rel_tol * std::abs(r.value[c]));
      if (r.error[c] / tol > ratio) {
        ratio = r.error[c] / tol;
        worst = c;
      }
    }
    throw NumericalError(names[worst], r.value[worst], r.error[worst]);
  }
  std::vector<Estimate> out(dim);
  for (std::size_t c = 0; c < dim; ++c) out[c] = {r.value[c], r.error[c]};
  return out;
}

inline std::string pair_name(const char* base, const DetectorConfig& di, const DetectorConfig& dj) {
  return std::string(base) + "_" + to_string(di.label) + to_string(dj.label);
}

}  // namespace detail

/// Generic ordered or unordered pair integral
///   \int L_i(x) L_j(x') W e^{i (s1 W_i t + s2 W_j t')} [theta(...)]
/// exposed for cross-checks that assemble the state directly from the
/// operator expansion.
inline Estimate pair_integral(const FieldStateSpec& state, const DetectorConfig& di, const DetectorConfig& dj,
                              int s1, int s2, WightmanOrder order, std::optional<Ordering> ordering,
                              const IntegralOptions& opt = {}) {
  if (ordering) detail::check_frame_support(state, FrameSpec(ordering->v, "ordering"));
  return detail::integrate_terms(state, di, dj, {{{s1, s2, order, ordering}}},
                                 {detail::pair_name("pair_integral", di, dj)}, opt)[0];
}

/// {L, P, K, Q} for the ordered pair (i, j).
inline std::array<Estimate, 4> compute_unordered_family(const FieldStateSpec& state, const DetectorConfig& di,
                                                        const DetectorConfig& dj, const IntegralOptions& opt = {}) {
  using detail::SignedTerm;
  const auto F = WightmanOrder::Forward;
  const std::vector<std::vector<SignedTerm>> comps = {
      {{+1, -1, F, std::nullopt}},
      {{+1, +1, F, std::nullopt}},
      {{-1, -1, F, std::nullopt}},
      {{-1, +1, F, std::nullopt}},
  };
  const std::vector<std::string> names = {detail::pair_name("L", di, dj), detail::pair_name("P", di, dj),
                                          detail::pair_name("K", di, dj), detail::pair_name("Q", di, dj)};
  const auto v = detail::integrate_terms(state, di, dj, comps, names, opt);
  return {v[0], v[1], v[2], v[3]};
}

inline Estimate compute_L(const FieldStateSpec& s, const DetectorConfig& i, const DetectorConfig& j,
                          const IntegralOptions& o = {}) {
  return compute_unordered_family(s, i, j, o)[0];
}
inline Estimate compute_P(const FieldStateSpec& s, const DetectorConfig& i, const DetectorConfig& j,
                          const IntegralOptions& o = {}) {
  return compute_unordered_family(s, i, j, o)[1];
}
inline Estimate compute_K(const FieldStateSpec& s, const DetectorConfig& i, const DetectorConfig& j,
                          const IntegralOptions& o = {}) {
  return compute_unordered_family(s, i, j, o)[2];
}
inline Estimate compute_Q(const FieldStateSpec& s, const DetectorConfig& i, const DetectorConfig& j,
                          const IntegralOptions& o = {}) {
  return compute_unordered_family(s, i, j, o)[3];
}

/// {M, R, S, V}. G_F is split as theta W(x, x') + theta W(x', x) along the
/// ordering of `frame` (the lab frame unless a cross-check asks otherwise).
inline std::array<Estimate, 4> compute_feynman_family(const FieldStateSpec& state, const DetectorConfig& da,
                                                      const DetectorConfig& db, const FrameSpec& frame = {},
                                                      const IntegralOptions& opt = {}) {
  using detail::SignedTerm;
  detail::check_frame_support(state, frame);
  const Ordering later{frame.v, +1}, earlier{frame.v, -1};
  auto feynman = [&](int s1, int s2) {
    return std::vector<SignedTerm>{{s1, s2, WightmanOrder::Backward, later, -1.0},
                                   {s1, s2, WightmanOrder::Forward, earlier, -1.0}};
  };
  const std::vector<std::vector<SignedTerm>> comps = {feynman(+1, +1), feynman(+1, -1), feynman(-1, +1),
                                                      feynman(-1, -1)};
  const auto v = detail::integrate_terms(state, da, db, comps, {"M", "R", "S", "V"}, opt);
  return {v[0], v[1], v[2], v[3]};
}

/// The Feynman family with G_F replaced by W(x, x'). Coincides with
/// compute_feynman_family when the two supports are spacelike separated.
inline std::array<Estimate, 4> compute_feynman_family_plain_w(const FieldStateSpec& state,
                                                              const DetectorConfig& da,
                                                              const DetectorConfig& db,
                                                              const IntegralOptions& opt = {}) {
  using detail::SignedTerm;
  auto plain = [&](int s1, int s2) {
    return std::vector<SignedTerm>{{s1, s2, WightmanOrder::Backward, std::nullopt, -1.0}};
  };
  const std::vector<std::vector<SignedTerm>> comps = {plain(+1, +1), plain(+1, -1), plain(-1, +1),
                                                      plain(-1, -1)};
  const auto v = detail::integrate_terms(state, da, db, comps, {"M_W", "R_W", "S_W", "V_W"}, opt);
  return {v[0], v[1], v[2], v[3]};
}

inline Estimate compute_M(const FieldStateSpec& s, const DetectorConfig& a, const DetectorConfig& b,
                          const FrameSpec& f = {}, const IntegralOptions& o = {}) {
  return compute_feynman_family(s, a, b, f, o)[0];
}
inline Estimate compute_R(const FieldStateSpec& s, const DetectorConfig& a, const DetectorConfig& b,
                          const FrameSpec& f = {}, const IntegralOptions& o = {}) {
  return compute_feynman_family(s, a, b, f, o)[1];
}
inline Estimate compute_S(const FieldStateSpec& s, const DetectorConfig& a, const DetectorConfig& b,
                          const FrameSpec& f = {}, const IntegralOptions& o = {}) {
  return compute_feynman_family(s, a, b, f, o)[2];
}
inline Estimate compute_V(const FieldStateSpec& s, const DetectorConfig& a, const DetectorConfig& b,
                          const FrameSpec& f = {}, const IntegralOptions& o = {}) {
  return compute_feynman_family(s, a, b, f, o)[3];
}

struct GammaEta {
  Estimate gamma, eta;
  // Same integrands with the opposite ordering theta(t_v(x') - t_v(x)).
  Estimate gamma_swapped, eta_swapped;
};

/// gamma_i and eta_i under the ordering of `frame`, including lambda_i^2.
inline GammaEta compute_gamma_eta(const FieldStateSpec& state, const DetectorConfig& d, const FrameSpec& frame,
                                  const IntegralOptions& opt = {}) {
  using detail::SignedTerm;
  detail::check_frame_support(state, frame);
  const auto F = WightmanOrder::Forward;
  const Ordering later{frame.v, +1}, earlier{frame.v, -1};
  const double l2 = d.coupling * d.coupling;
  const std::vector<std::vector<SignedTerm>> comps = {
      {{+1, -1, F, later, l2}},
      {{-1, +1, F, later, l2}},
      {{+1, -1, F, earlier, l2}},
      {{-1, +1, F, earlier, l2}},
  };
  const std::string tag = to_string(d.label);
  const auto v = detail::integrate_terms(state, d, d, comps,
                                         {"gamma_" + tag, "eta_" + tag, "gamma_swapped_" + tag,
                                          "eta_swapped_" + tag},
                                         opt);
  return {v[0], v[1], v[2], v[3]};
}

/// In-memory store of computed integral sets, keyed by a canonical
/// description of (state, detectors, frame, tolerances). Concurrent readers,
/// exclusive writers.
class IntegralCache {
 public:
  std::optional<HarvestIntegrals> find(const std::string& key) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    ++hits_;
    return it->second;
  }

  void insert(const std::string& key, const HarvestIntegrals& value) {
    std::unique_lock lock(mutex_);
    entries_.emplace(key, value);
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
  }
  std::size_t hits() const { return hits_.load(); }

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, HarvestIntegrals> entries_;
  mutable std::atomic<std::size_t> hits_{0};
};

inline std::string canonical_key(const FieldStateSpec& s, const DetectorConfig& a, const DetectorConfig& b,
                                 const FrameSpec& f, const IntegralOptions& o) {
  std::ostringstream os;
  os.precision(17);
  os << "field:" << to_string(s.kind) << ',' << s.mass << ',' << s.temperature << ',' << s.cavity_length << ','
     << s.n_modes << ',' << s.epsilon;
  for (const auto* d : {&a, &b}) {
    os << "|det:" << to_string(d->label) << ',' << d->gap << ',' << d->coupling << ',' << d->position[0] << ','
       << d->position[1] << ',' << d->position[2] << ',' << d->smearing_width << ',' << d->switching_width
       << ',' << d->switching_center;
  }
  os << "|frame:" << f.v << "|tol:" << o.rel_tol << ',' << o.abs_tol << ',' << o.max_intervals;
  return os.str();
}

/// Populates every entry of HarvestIntegrals. Independent families run
/// concurrently when opt.jobs > 1; results do not depend on scheduling.
inline HarvestIntegrals compute_all(const FieldStateSpec& state, const DetectorConfig& da, const DetectorConfig& db,
                                    const FrameSpec& frame = {}, const IntegralOptions& opt = {},
                                    IntegralCache* cache = nullptr) {
  state.validate();
  da.validate();
  db.validate();
  detail::check_frame_support(state, frame);
  std::string key;
  if (cache) {
    key = canonical_key(state, da, db, frame, opt);
    if (auto hit = cache->find(key)) return *hit;
  }

  const std::array<const DetectorConfig*, 2> dets{&da, &db};
  const auto policy = opt.jobs > 1 ? std::launch::async : std::launch::deferred;

  std::array<std::array<std::future<std::array<Estimate, 4>>, 2>, 2> unordered;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      unordered[i][j] = std::async(policy, [&, i, j] { return compute_unordered_family(state, *dets[i], *dets[j], opt); });
  auto feynman = std::async(policy, [&] { return compute_feynman_family(state, da, db, FrameSpec{}, opt); });
  std::array<std::future<GammaEta>, 2> local;
  for (int i = 0; i < 2; ++i)
    local[i] = std::async(policy, [&, i] { return compute_gamma_eta(state, *dets[i], frame, opt); });

  HarvestIntegrals out;
  out.frame = frame;
  out.lambda = {da.coupling, db.coupling};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const auto fam = unordered[i][j].get();
      out.L[i][j] = fam[0];
      out.P[i][j] = fam[1];
      out.K[i][j] = fam[2];
      out.Q[i][j] = fam[3];
    }
  const auto f = feynman.get();
  out.M = f[0];
  out.R = f[1];
  out.S = f[2];
  out.V = f[3];
  for (int i = 0; i < 2; ++i) {
    const auto ge = local[i].get();
    out.gamma[i] = ge.gamma;
    out.eta[i] = ge.eta;
  }
  if (cache) cache->insert(key, out);
  return out;
}

}  // namespace harvest
