#pragma once

// Scenario execution behind the harvestlab command line.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "harvest/assembly.hpp"
#include "harvest/cavity_oracle.hpp"
#include "harvest/config.hpp"
#include "harvest/covariance.hpp"
#include "harvest/disk_cache.hpp"
#include "harvest/optimize.hpp"
#include "harvest/records.hpp"

namespace harvest {

enum ExitCode : int { kOk = 0, kIoFailure = 1, kValidation = 2, kNumerical = 3 };

struct RunOptions {
  std::optional<double> tol_quad;
  int jobs = 1;
  bool use_cache = true;
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::string> output_path;
};

class Runner {
 public:
  Runner(ScenarioConfig cfg, const RunOptions& opt, std::ostream& log)
      : cfg_(std::move(cfg)), opt_(opt), log_(log), disk_(opt.cache_dir ? *opt.cache_dir : default_cache_dir()) {
    if (opt.tol_quad) {
      if (!(*opt.tol_quad > 0.0)) throw ValidationError("--tol-quad must be positive");
      cfg_.tolerances.quad_rel = *opt.tol_quad;
      cfg_.normalized["tolerances"]["quad_rel"] = *opt.tol_quad;
    }
    if (opt.output_path) cfg_.output_path = *opt.output_path;
    hash_ = config_hash(cfg_);
    iopt_.rel_tol = cfg_.tolerances.quad_rel;
    iopt_.jobs = std::max(1, opt.jobs);
  }

  const std::string& hash() const { return hash_; }
  const ScenarioConfig& config() const { return cfg_; }

  void run() {
    std::ofstream out(cfg_.output_path, std::ios::trunc);
    if (!out) throw CacheIoError("cannot open output file " + cfg_.output_path);
    switch (cfg_.run_kind) {
      case RunKind::Rho:
      case RunKind::Negativity:
        for (const auto& f : cfg_.frames) out << state_record(cfg_, f).dump() << '\n';
        break;
      case RunKind::Sweep: run_sweep(out); break;
      case RunKind::Covariance: out << covariance_record().dump() << '\n'; break;
      case RunKind::Oracle: out << oracle_record().dump() << '\n'; break;
      case RunKind::Optimize: out << optimize_record().dump() << '\n'; break;
    }
    if (!out) throw CacheIoError("failed writing " + cfg_.output_path);
  }

  /// compute_all backed by the in-memory and on-disk caches.
  HarvestIntegrals integrals(const ScenarioConfig& c, const FrameSpec& frame) {
    const std::string key = canonical_key(c.field, c.a, c.b, frame, iopt_);
    if (opt_.use_cache) {
      if (auto hit = memory_.find(key)) return *hit;
      if (auto hit = disk_.load(key)) {
        memory_.insert(key, *hit);
        return *hit;
      }
    }
    HarvestIntegrals in = compute_all(c.field, c.a, c.b, frame, iopt_);
    if (opt_.use_cache) {
      memory_.insert(key, in);
      std::lock_guard lock(disk_mutex_);
      disk_.store(key, in, hash_);
    }
    return in;
  }

 private:
  json header(const char* type) const {
    return json{{"record_type", type},
                {"version", kVersion},
                {"config_hash", hash_},
                {"run_kind", to_string(cfg_.run_kind)},
                {"tolerances", {{"quad_rel", num(cfg_.tolerances.quad_rel)}, {"boost_abs", num(cfg_.tolerances.boost_abs)}}}};
  }

  static json blocks_json(const GeneralizedBlocks& b) {
    return json{{"L_gen_AA", to_json(b.L_gen(0, 0))}, {"L_gen_BB", to_json(b.L_gen(1, 1))},
                {"L_gen_AB", to_json(b.L_gen(0, 1))}, {"M_gen", to_json(b.M_gen)},
                {"I_AA", to_json(b.I_AA)},           {"I_BB", to_json(b.I_BB)},
                {"J1", to_json(b.J1)},               {"J2", to_json(b.J2)},
                {"X", to_json(b.X)},                 {"Y", to_json(b.Y)}};
  }

  struct StatePoint {
    HarvestIntegrals in;
    GeneralizedBlocks blocks;
    Matrix4c rho;
    double n_closed = 0.0, n_eigen = 0.0;
  };

  StatePoint state_point(const ScenarioConfig& c, const FrameSpec& f) {
    StatePoint p;
    p.in = integrals(c, f);
    p.blocks = general_blocks(p.in, c.a.initial, c.b.initial);
    const JointState js = assemble(p.in, c.a.initial, c.b.initial, &log_);
    p.rho = js.matrix();
    p.n_eigen = negativity_eigen(js);
    p.n_closed = negativity_closed_form(p.blocks, c.a.initial.mixedness(), c.b.initial.mixedness());
    return p;
  }

  json state_record(const ScenarioConfig& c, const FrameSpec& f) {
    const StatePoint p = state_point(c, f);
    json r = header("state");
    r["frame"] = {{"v", num(f.v)}, {"label", f.label}};
    r["negativity_closed_form"] = num(p.n_closed);
    r["negativity_eigen"] = num(p.n_eigen);
    r["blocks"] = blocks_json(p.blocks);
    r["integrals"] = to_json(p.in);
    if (c.run_kind == RunKind::Rho) {
      r["rho"] = {{"basis", "psi_chi"}, {"entries", to_json(p.rho)}};
      r["rho_energy"] = {{"basis", "energy"},
                         {"entries", to_json(to_energy_basis(p.rho, c.a.initial.angles(), c.b.initial.angles()))}};
    }
    return r;
  }

  void run_sweep(std::ostream& out) {
    const auto& values = cfg_.sweep->values;
    const std::size_t n = values.size();
    std::vector<std::vector<std::string>> csv_rows(n);
    std::vector<std::string> lines(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t k = next++; k < n; k = next++) {
        try {
          const ScenarioConfig pc = with_sweep_value(cfg_, values[k]);
          for (const auto& f : pc.frames) {
            const StatePoint p = state_point(pc, f);
            json r = header("sweep_point");
            r["sweep"] = {{"param_path", cfg_.sweep->param_path}, {"value", num(values[k])}, {"index", k}};
            r["frame"] = {{"v", num(f.v)}, {"label", f.label}};
            r["negativity_closed_form"] = num(p.n_closed);
            r["negativity_eigen"] = num(p.n_eigen);
            r["blocks"] = blocks_json(p.blocks);
            r["integrals"] = to_json(p.in);
            lines[k] += r.dump() + '\n';
            csv_rows[k].push_back(num(values[k]) + ',' + num(p.blocks.L_gen(0, 0).real()) + ',' +
                                  num(p.blocks.L_gen(1, 1).real()) + ',' + num(std::abs(p.blocks.L_gen(0, 1))) +
                                  ',' + num(std::abs(p.blocks.M_gen)) + ',' + num(p.n_closed) + ',' +
                                  num(p.n_eigen) + ',' + f.label);
          }
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    };
    const int workers = std::max(1, std::min<int>(opt_.jobs, int(n)));
    std::vector<std::future<void>> pool;
    for (int w = 1; w < workers; ++w) pool.push_back(std::async(std::launch::async, work));
    work();
    for (auto& p : pool) p.get();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);

    // Single writer, sweep order.
    for (const auto& l : lines) out << l;
    std::ofstream csv(sweep_csv_path(), std::ios::trunc);
    if (!csv) throw CacheIoError("cannot open " + sweep_csv_path());
    csv << "sweep_value,L_AA,L_BB,abs_L_AB,abs_M_gen,N_closed,N_eigen,frame\n";
    for (const auto& rows : csv_rows)
      for (const auto& r : rows) csv << r << '\n';
  }

  json covariance_record() {
    const FrameSpec& ft = cfg_.frames[0];
    const FrameSpec& fs = cfg_.frames[1];
    // Route both frames through the caches, then build the report.
    const HarvestIntegrals it = integrals(cfg_, ft);
    const HarvestIntegrals is = integrals(cfg_, fs);
    IntegralCache seeded;
    seeded.insert(canonical_key(cfg_.field, cfg_.a, cfg_.b, ft, iopt_), it);
    seeded.insert(canonical_key(cfg_.field, cfg_.a, cfg_.b, fs, iopt_), is);
    const NonCovariantReport rep = non_covariant_report(cfg_.field, cfg_.a, cfg_.b, ft, fs, iopt_, &seeded);
    json r = header("covariance");
    r["frame_t"] = {{"v", num(ft.v)}, {"label", ft.label}};
    r["frame_s"] = {{"v", num(fs.v)}, {"label", fs.label}};
    r["negativity_t"] = num(rep.negativity_t);
    r["negativity_s"] = num(rep.negativity_s);
    r["negativity_closed_t"] = num(rep.negativity_closed_t);
    r["negativity_closed_s"] = num(rep.negativity_closed_s);
    r["abs_negativity_difference"] = num(std::abs(rep.negativity_t - rep.negativity_s));
    r["max_abs_delta_rho"] = num(rep.delta_rho.cwiseAbs().maxCoeff());
    r["quad_error"] = num(rep.quad_error);
    r["X_t"] = to_json(rep.X_t);
    r["X_s"] = to_json(rep.X_s);
    r["Y_t"] = to_json(rep.Y_t);
    r["Y_s"] = to_json(rep.Y_s);
    r["fit"] = {{"applicable", rep.fit.applicable}, {"a", to_json(rep.fit.a)}, {"b", to_json(rep.fit.b)},
                {"residual", num(rep.fit.residual)}};
    r["delta_rho"] = {{"basis", "energy"}, {"entries", to_json(rep.delta_rho)}};
    r["rho_t"] = {{"basis", "energy"}, {"entries", to_json(rep.rho_t)}};
    r["rho_s"] = {{"basis", "energy"}, {"entries", to_json(rep.rho_s)}};

    std::ofstream csv(sweep_csv_path(), std::ios::trunc);
    if (csv) {
      csv << "frame_t,frame_s,N_t,N_s,N_closed_t,N_closed_s,max_abs_delta_rho\n";
      csv << ft.label << ',' << fs.label << ',' << num(rep.negativity_t) << ',' << num(rep.negativity_s) << ','
          << num(rep.negativity_closed_t) << ',' << num(rep.negativity_closed_s) << ','
          << num(rep.delta_rho.cwiseAbs().maxCoeff()) << '\n';
    }
    return r;
  }

  json oracle_record() {
    CavityModel m;
    m.cavity_length = cfg_.field.cavity_length;
    m.n_modes = cfg_.field.n_modes;
    m.fock_cutoff = cfg_.oracle.fock_cutoff;
    m.time_step = cfg_.oracle.time_step;
    m.integrator_order = cfg_.oracle.integrator_order;
    json r = header("oracle");
    json pts = json::array();
    std::vector<double> ls, tds;
    for (double lam : cfg_.oracle.lambdas) {
      ScenarioConfig c = cfg_;
      c.a.coupling = c.b.coupling = lam;
      const ExactResult ex = exact_evolve(m, c.a, c.b);
      const HarvestIntegrals in = compute_all(c.field, c.a, c.b, FrameSpec{}, iopt_);
      const Matrix4c pert = assemble(in, c.a.initial, c.b.initial, &log_).matrix();
      const double td = trace_distance(ex.rho_psichi, pert);
      if (ex.leakage_warning)
        log_ << "warning: Fock cutoff leakage " << ex.top_level_population << " at lambda " << lam << '\n';
      ls.push_back(lam);
      tds.push_back(td);
      pts.push_back({{"lambda", num(lam)},
                     {"trace_distance", num(td)},
                     {"negativity_exact", num(negativity_eigen(ex.rho_psichi))},
                     {"negativity_closed_form", num(negativity_closed_form(in, c.a.initial, c.b.initial))},
                     {"max_norm_drift", num(ex.max_norm_drift)},
                     {"top_level_population", num(ex.top_level_population)},
                     {"rho_exact", to_json(ex.rho_psichi)}});
    }
    r["points"] = pts;
    if (ls.size() >= 2) r["loglog_slope"] = num(loglog_slope(ls, tds));
    if (cfg_.oracle.convergence) {
      ScenarioConfig c = cfg_;
      c.a.coupling = c.b.coupling = cfg_.oracle.lambdas.empty() ? 0.01 : cfg_.oracle.lambdas.front();
      const ConvergenceReport conv = convergence_sweep(m, c.a, c.b);
      std::ofstream csv(sweep_csv_path(), std::ios::trunc);
      if (!csv) throw CacheIoError("cannot open " + sweep_csv_path());
      conv.write_csv(csv);
      r["convergence"] = {{"converged", conv.converged}, {"non_monotone", conv.non_monotone}};
    }
    return r;
  }

  json optimize_record() {
    OptimizationScenario sc{cfg_.field, cfg_.a, cfg_.b, iopt_};
    OptimizationProblem prob = cfg_.optimization;
    prob.jobs = opt_.jobs;
    const OptimizationResult res = optimize(prob, sc);
    json r = header("optimization");
    json best;
    for (std::size_t k = 0; k < prob.free_params.size(); ++k)
      best[to_string(prob.free_params[k].param)] = num(res.best_params[k]);
    r["best_params"] = best;
    r["best_value"] = num(res.best_value);
    r["evaluations"] = res.trace.size();
    r["flat_objective"] = res.flat_objective;
    r["p_self_check"] = res.p_self_check;
    if (res.flat_objective) log_ << "note: objective is flat (zero negativity) across the search box\n";
    std::ofstream csv(sweep_csv_path(), std::ios::trunc);
    if (!csv) throw CacheIoError("cannot open " + sweep_csv_path());
    write_trace_csv(csv, res, prob.free_params);
    return r;
  }

  std::string sweep_csv_path() const {
    std::filesystem::path p(cfg_.output_path);
    p.replace_extension(".csv");
    return p.string();
  }

 public:
  /// Least-squares slope of log(y) against log(x).
  static double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double lx = std::log(x[k]), ly = std::log(y[k]);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }

 private:
  ScenarioConfig cfg_;
  RunOptions opt_;
  std::ostream& log_;
  DiskCache disk_;
  IntegralCache memory_;
  std::mutex disk_mutex_;
  IntegralOptions iopt_;
  std::string hash_;
};

/// Maps library exceptions onto exit codes, reporting to `err`.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    body();
    return kOk;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure in " << e.name() << ": " << e.what() << '\n';
    return kNumerical;
  } catch (const CacheIoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoFailure;
  }
}

}  // namespace harvest
