#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "harvest/app.hpp"

int main(int argc, char** argv) {
  using namespace harvest;
  CLI::App app{"harvestlab: second-order entanglement harvesting between two detectors"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  RunOptions opts;
  double tol_quad = 0.0;
  std::string config_path, output;
  bool no_cache = false;
  std::string cache_dir;

  auto* run = app.add_subcommand("run", "execute a scenario config");
  run->add_option("config", config_path, "scenario JSON file")->required();
  run->add_option("--tol-quad", tol_quad, "override tolerances.quad_rel");
  run->add_option("--jobs", opts.jobs, "worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--no-cache", no_cache, "bypass the integral cache");
  run->add_option("-o,--output", output, "override output_path");

  auto* validate = app.add_subcommand("validate", "check a scenario config without running it");
  validate->add_option("config", config_path, "scenario JSON file")->required();

  std::string sub;
  auto* cache = app.add_subcommand("cache", "inspect or clear the integral cache");
  cache->add_option("action", sub, "list | clear | stats")->required()->check(CLI::IsMember({"list", "clear", "stats"}));
  for (auto* c : {run, cache}) c->add_option("--cache-dir", cache_dir, "cache directory (default: $HARVESTLAB_CACHE_DIR)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidation;
  }

  if (!cache_dir.empty()) opts.cache_dir = cache_dir;

  if (*run) {
    if (run->count("--tol-quad")) opts.tol_quad = tol_quad;
    if (!output.empty()) opts.output_path = output;
    opts.use_cache = !no_cache;
    return guarded(std::cerr, [&] {
      Runner r(load_config(config_path), opts, std::cerr);
      r.run();
      std::cout << "wrote " << r.config().output_path << " (config " << r.hash() << ")\n";
    });
  }
  if (*validate) {
    return guarded(std::cerr, [&] {
      const ScenarioConfig c = load_config(config_path);
      std::cout << "ok: " << to_string(c.run_kind) << " scenario, config " << config_hash(c) << '\n';
    });
  }
  return guarded(std::cerr, [&] {
    DiskCache dc(opts.cache_dir ? *opts.cache_dir : default_cache_dir());
    if (sub == "clear") {
      const auto n = dc.clear();
      std::cout << "removed " << n << " entries from " << dc.dir().string() << '\n';
    } else if (sub == "list") {
      for (const auto& e : dc.list())
        std::cout << e.key_hash << "  config " << (e.config_hash.empty() ? "-" : e.config_hash) << "  " << e.bytes
                  << " bytes\n";
    } else {
      const auto entries = dc.list();
      std::uintmax_t bytes = 0;
      for (const auto& e : entries) bytes += e.bytes;
      std::cout << "directory: " << dc.dir().string() << "\nentries: " << entries.size() << "\nbytes: " << bytes
                << '\n';
    }
  });
}
