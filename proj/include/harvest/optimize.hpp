#pragma once

// Maximization of the leading-order negativity over initial-state angles
// and detector parameters: a deterministic coarse grid followed by a
// Nelder-Mead polish from the best grid point.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "harvest/assembly.hpp"

namespace harvest {

enum class Param { AlphaA, BetaA, AlphaB, BetaB, GapA, GapB, Separation, Sigma, T, PA, PB };

inline const char* to_string(Param p) {
  switch (p) {
    case Param::AlphaA: return "alpha_A";
    case Param::BetaA: return "beta_A";
    case Param::AlphaB: return "alpha_B";
    case Param::BetaB: return "beta_B";
    case Param::GapA: return "gap_A";
    case Param::GapB: return "gap_B";
    case Param::Separation: return "separation";
    case Param::Sigma: return "sigma";
    case Param::T: return "T";
    case Param::PA: return "p_A";
    case Param::PB: return "p_B";
  }
  return "?";
}

inline Param param_from_string(const std::string& s) {
  for (int k = 0; k <= int(Param::PB); ++k)
    if (s == to_string(Param(k))) return Param(k);
  throw ValidationError("unknown optimization parameter '" + s + "'");
}

struct FreeParam {
  Param param;
  double lower, upper;
};

struct OptimizationProblem {
  std::vector<FreeParam> free_params;
  int budget = 200;
  std::uint64_t seed = 0;
  int jobs = 1;

  void validate() const {
    if (budget < 1) throw ValidationError("optimization budget must be >= 1");
    if (free_params.empty()) throw ValidationError("optimization needs at least one free parameter");
    for (const auto& f : free_params) {
      if (!(f.lower <= f.upper)) throw ValidationError(std::string("empty bounds for ") + to_string(f.param));
      const double pi = std::numbers::pi;
      auto inside = [&](double lo, double hi) { return f.lower >= lo && f.upper <= hi; };
      bool ok = true;
      switch (f.param) {
        case Param::AlphaA:
        case Param::AlphaB: ok = inside(0.0, pi) && f.upper < pi; break;
        case Param::BetaA:
        case Param::BetaB: ok = inside(0.0, 2.0 * pi) && f.upper < 2.0 * pi; break;
        case Param::PA:
        case Param::PB: ok = inside(0.0, 1.0) && f.upper < 1.0; break;
        case Param::Separation:
        case Param::Sigma: ok = f.lower >= 0.0; break;
        case Param::T: ok = f.lower > 0.0; break;
        default: ok = std::isfinite(f.lower) && std::isfinite(f.upper);
      }
      if (!ok) throw ValidationError(std::string("bounds for ") + to_string(f.param) + " leave the parameter's domain");
    }
  }
};

struct TraceEntry {
  long eval_index = 0;
  std::vector<double> x;
  double objective = 0.0;
  double wall_time_ms = 0.0;
};

struct OptimizationResult {
  std::vector<double> best_params;
  double best_value = 0.0;
  std::vector<TraceEntry> trace;
  bool flat_objective = false;
  bool p_self_check = true;  // best value not improved by lowering p to its bound
  long objective_calls = 0;
};

/// Generic bounded maximizer shared by the physics objective and the
/// synthetic self-test.
inline OptimizationResult maximize(const std::vector<std::pair<double, double>>& bounds,
                                   const std::function<double(const std::vector<double>&)>& f, int budget,
                                   std::uint64_t seed, int jobs = 1) {
  const std::size_t d = bounds.size();
  OptimizationResult res;
  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };

  // Grid stage: about half the budget, at least two points per axis when affordable.
  const int grid_budget = std::max(1, budget / 2);
  int per_axis = std::max(1, int(std::floor(std::pow(double(grid_budget), 1.0 / double(d)) + 1e-9)));
  long grid_points = 1;
  for (std::size_t k = 0; k < d; ++k) grid_points *= per_axis;
  std::vector<std::vector<double>> grid(grid_points, std::vector<double>(d));
  for (long g = 0; g < grid_points; ++g) {
    long rem = g;
    for (std::size_t k = 0; k < d; ++k) {
      const int i = int(rem % per_axis);
      rem /= per_axis;
      const auto [lo, hi] = bounds[k];
      grid[g][k] = per_axis == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * double(i) / double(per_axis - 1);
    }
  }
  std::vector<double> values(grid_points);
  std::vector<double> times(grid_points);
  {
    const int workers = std::max(1, std::min<int>(jobs, int(grid_points)));
    std::atomic<long> next{0};
    auto work = [&] {
      for (long g = next++; g < grid_points; g = next++) {
        values[g] = f(grid[g]);
        times[g] = elapsed_ms();
      }
    };
    std::vector<std::future<void>> pool;
    for (int w = 1; w < workers; ++w) pool.push_back(std::async(std::launch::async, work));
    work();
    for (auto& p : pool) p.get();
  }
  for (long g = 0; g < grid_points; ++g) res.trace.push_back({g, grid[g], values[g], times[g]});

  auto record = [&](const std::vector<double>& x) {
    const double v = f(x);
    res.trace.push_back({long(res.trace.size()), x, v, elapsed_ms()});
    return v;
  };
  auto clamp = [&](std::vector<double> x) {
    for (std::size_t k = 0; k < d; ++k) x[k] = std::clamp(x[k], bounds[k].first, bounds[k].second);
    return x;
  };

  long best_grid = 0;
  for (long g = 1; g < grid_points; ++g)
    if (values[g] > values[best_grid]) best_grid = g;

  // Nelder-Mead on -f from the best grid point. The seed fixes the
  // orientation of the initial simplex.
  long remaining = budget - grid_points;
  if (remaining > long(d)) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coin(0, 1);
    std::vector<std::vector<double>> simplex{grid[best_grid]};
    std::vector<double> fs{-values[best_grid]};
    for (std::size_t k = 0; k < d && remaining > 0; ++k) {
      std::vector<double> x = grid[best_grid];
      const double span = bounds[k].second - bounds[k].first;
      const double step = (per_axis > 1 ? span / double(per_axis - 1) : span) * 0.5;
      const double dir = coin(rng) ? 1.0 : -1.0;
      x[k] += dir * step;
      if (x[k] > bounds[k].second || x[k] < bounds[k].first) x[k] -= 2.0 * dir * step;
      x = clamp(x);
      simplex.push_back(x);
      fs.push_back(-record(x));
      --remaining;
    }
    const std::size_t n = simplex.size();
    while (remaining > 0 && n == d + 1) {
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fs[a] < fs[b]; });
      const std::size_t ib = order.front(), iw = order.back(), isw = order[n - 2];
      double size = 0.0;
      for (std::size_t k = 0; k < d; ++k)
        for (std::size_t j = 0; j < n; ++j) size = std::max(size, std::abs(simplex[j][k] - simplex[ib][k]));
      if (size < 1e-12) break;

      std::vector<double> centroid(d, 0.0);
      for (std::size_t j = 0; j < n; ++j)
        if (j != iw)
          for (std::size_t k = 0; k < d; ++k) centroid[k] += simplex[j][k] / double(n - 1);
      auto along = [&](double t) {
        std::vector<double> x(d);
        for (std::size_t k = 0; k < d; ++k) x[k] = centroid[k] + t * (simplex[iw][k] - centroid[k]);
        return clamp(x);
      };
      const auto xr = along(-1.0);
      const double fr = -record(xr);
      --remaining;
      if (fr < fs[ib] && remaining > 0) {
        const auto xe = along(-2.0);
        const double fe = -record(xe);
        --remaining;
        if (fe < fr) {
          simplex[iw] = xe;
          fs[iw] = fe;
        } else {
          simplex[iw] = xr;
          fs[iw] = fr;
        }
      } else if (fr < fs[isw]) {
        simplex[iw] = xr;
        fs[iw] = fr;
      } else if (remaining > 0) {
        const bool outside = fr < fs[iw];
        const auto xc = along(outside ? -0.5 : 0.5);
        const double fc = -record(xc);
        --remaining;
        if (fc < std::min(fr, fs[iw])) {
          simplex[iw] = xc;
          fs[iw] = fc;
        } else {
          for (std::size_t j = 0; j < n && remaining > 0; ++j) {
            if (j == ib) continue;
            for (std::size_t k = 0; k < d; ++k) simplex[j][k] = simplex[ib][k] + 0.5 * (simplex[j][k] - simplex[ib][k]);
            fs[j] = -record(simplex[j]);
            --remaining;
          }
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t k = 1; k < res.trace.size(); ++k)
    if (res.trace[k].objective > res.trace[best].objective) best = k;
  res.best_params = res.trace[best].x;
  res.best_value = res.trace[best].objective;
  res.flat_objective = std::all_of(res.trace.begin(), res.trace.end(),
                                   [&](const TraceEntry& e) { return e.objective == res.trace.front().objective; });
  res.objective_calls = long(res.trace.size());
  return res;
}

/// The physical base configuration the free parameters are applied to.
/// Detector B sits at A's position shifted along the first axis by
/// `separation` when that parameter is free.
struct OptimizationScenario {
  FieldStateSpec field;
  DetectorConfig a, b;
  IntegralOptions integrals{};
};

inline std::pair<DetectorConfig, DetectorConfig> apply_params(const OptimizationScenario& sc,
                                                              const std::vector<FreeParam>& fp,
                                                              const std::vector<double>& x) {
  DetectorConfig a = sc.a, b = sc.b;
  double al[2] = {a.initial.angles().alpha(), b.initial.angles().alpha()};
  double be[2] = {a.initial.angles().beta(), b.initial.angles().beta()};
  double p[2] = {a.initial.mixedness(), b.initial.mixedness()};
  for (std::size_t k = 0; k < fp.size(); ++k) {
    const double v = x[k];
    switch (fp[k].param) {
      case Param::AlphaA: al[0] = v; break;
      case Param::BetaA: be[0] = v; break;
      case Param::AlphaB: al[1] = v; break;
      case Param::BetaB: be[1] = v; break;
      case Param::GapA: a.gap = v; break;
      case Param::GapB: b.gap = v; break;
      case Param::Separation:
        b.position = a.position;
        b.position[0] += v;
        break;
      case Param::Sigma: a.smearing_width = b.smearing_width = v; break;
      case Param::T: a.switching_width = b.switching_width = v; break;
      case Param::PA: p[0] = v; break;
      case Param::PB: p[1] = v; break;
    }
  }
  a.initial = InitialStateSpec(PureStateAngles(al[0], be[0]), p[0]);
  b.initial = InitialStateSpec(PureStateAngles(al[1], be[1]), p[1]);
  return {a, b};
}

/// Maximizes negativity_closed_form. Integrals are cached across
/// evaluations that differ only in angles or mixedness.
inline OptimizationResult optimize(const OptimizationProblem& problem, const OptimizationScenario& sc,
                                   IntegralCache* cache = nullptr) {
  problem.validate();
  IntegralCache local;
  IntegralCache* c = cache ? cache : &local;
  std::atomic<long> calls{0};
  auto objective = [&](const std::vector<double>& x) {
    const auto [a, b] = apply_params(sc, problem.free_params, x);
    const HarvestIntegrals in = compute_all(sc.field, a, b, FrameSpec{}, sc.integrals, c);
    ++calls;
    return negativity_closed_form(in, a.initial, b.initial);
  };
  std::vector<std::pair<double, double>> bounds;
  for (const auto& f : problem.free_params) bounds.emplace_back(f.lower, f.upper);
  OptimizationResult res = maximize(bounds, objective, problem.budget, problem.seed, problem.jobs);
  if (res.objective_calls != calls.load())
    throw NumericalError("optimize", "objective call accounting mismatch");

  bool has_p = false;
  std::vector<double> lowered = res.best_params;
  for (std::size_t k = 0; k < problem.free_params.size(); ++k)
    if (problem.free_params[k].param == Param::PA || problem.free_params[k].param == Param::PB) {
      has_p = true;
      lowered[k] = problem.free_params[k].lower;
    }
  if (has_p) res.p_self_check = objective(lowered) >= res.best_value;
  return res;
}

inline void write_trace_csv(std::ostream& os, const OptimizationResult& r, const std::vector<FreeParam>& fp) {
  os << "eval_index";
  for (const auto& f : fp) os << ',' << to_string(f.param);
  os << ",objective,wall_time_ms\n";
  os.precision(17);
  for (const auto& e : r.trace) {
    os << e.eval_index;
    for (double v : e.x) os << ',' << v;
    os << ',' << e.objective << ',' << e.wall_time_ms << '\n';
  }
}

}  // namespace harvest
