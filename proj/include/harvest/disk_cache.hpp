#pragma once

// Content-addressed on-disk store of HarvestIntegrals. One file per
// integral set, named by the hash of its canonical key; one NDJSON line
// per integral.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "harvest/records.hpp"

namespace harvest {

class CacheIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::filesystem::path default_cache_dir() {
  if (const char* env = std::getenv("HARVESTLAB_CACHE_DIR"); env && *env) return env;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return std::filesystem::path(xdg) / "harvestlab";
  if (const char* home = std::getenv("HOME"); home && *home) return std::filesystem::path(home) / ".cache" / "harvestlab";
  return std::filesystem::temp_directory_path() / "harvestlab-cache";
}

struct CacheEntryInfo {
  std::string key_hash;
  std::string config_hash;
  std::uintmax_t bytes = 0;
};

class DiskCache {
 public:
  explicit DiskCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }

  std::optional<HarvestIntegrals> load(const std::string& key) const {
    const auto path = file_for(key);
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::string line;
    if (!std::getline(in, line)) return std::nullopt;
    try {
      const json header = json::parse(line);
      if (header.at("key").get<std::string>() != key) return std::nullopt;
      HarvestIntegrals out;
      out.lambda = {parse_num(header.at("lambda_A")), parse_num(header.at("lambda_B"))};
      out.frame = FrameSpec(parse_num(header.at("frame_v")), header.at("frame_label").get<std::string>());
      int seen = 0;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json r = json::parse(line);
        Estimate* slot = slot_for(out, r.at("integral").get<std::string>());
        if (!slot) return std::nullopt;
        *slot = {{parse_num(r.at("re")), parse_num(r.at("im"))}, parse_num(r.at("err"))};
        ++seen;
      }
      if (seen != 36) return std::nullopt;
      return out;
    } catch (const std::exception&) {
      return std::nullopt;  // unreadable entries are recomputed
    }
  }

  void store(const std::string& key, const HarvestIntegrals& v, const std::string& config_hash) const {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw CacheIoError("cannot create cache directory " + dir_.string() + ": " + ec.message());
    const auto path = file_for(key);
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      if (!out) throw CacheIoError("cannot write cache file " + tmp);
      const std::string kh = hex64(fnv1a(key));
      json header{{"key", key},           {"key_hash", kh},
                  {"config_hash", config_hash}, {"lambda_A", num(v.lambda[0])},
                  {"lambda_B", num(v.lambda[1])}, {"frame_v", num(v.frame.v)},
                  {"frame_label", v.frame.label}};
      out << header.dump() << '\n';
      for (const auto& name : integral_names()) {
        const Estimate* e = slot_for(const_cast<HarvestIntegrals&>(v), name);
        out << json{{"key_hash", kh}, {"integral", name}, {"re", num(e->value.real())},
                    {"im", num(e->value.imag())}, {"err", num(e->error)}}
                   .dump()
            << '\n';
      }
      if (!out) throw CacheIoError("failed writing cache file " + tmp);
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw CacheIoError("cannot move cache file into place at " + path.string() + ": " + ec.message());
  }

  std::vector<CacheEntryInfo> list() const {
    std::vector<CacheEntryInfo> out;
    std::error_code ec;
    if (!std::filesystem::exists(dir_, ec)) return out;
    std::filesystem::directory_iterator it(dir_, ec);
    if (ec) throw CacheIoError("cannot read cache directory " + dir_.string() + ": " + ec.message());
    for (const auto& e : it) {
      if (e.path().extension() != ".ndjson") continue;
      CacheEntryInfo info;
      info.key_hash = e.path().stem().string();
      info.bytes = e.file_size(ec);
      std::ifstream in(e.path());
      std::string line;
      if (std::getline(in, line)) {
        try {
          info.config_hash = json::parse(line).value("config_hash", "");
        } catch (const std::exception&) {
        }
      }
      out.push_back(info);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.key_hash < b.key_hash; });
    return out;
  }

  /// Removes every entry; succeeds on an empty or missing directory.
  std::size_t clear() const {
    std::size_t removed = 0;
    for (const auto& info : list()) {
      std::error_code ec;
      const auto path = dir_ / (info.key_hash + ".ndjson");
      if (std::filesystem::remove(path, ec)) ++removed;
      if (ec) throw CacheIoError("cannot remove " + path.string() + ": " + ec.message());
    }
    return removed;
  }

 private:
  std::filesystem::path file_for(const std::string& key) const { return dir_ / (hex64(fnv1a(key)) + ".ndjson"); }

  static const std::vector<std::string>& integral_names() {
    static const std::vector<std::string> names = [] {
      std::vector<std::string> n;
      for (const char* fam : {"L", "P", "K", "Q"})
        for (const char* ij : {"AA", "AB", "BA", "BB"}) n.push_back(std::string(fam) + "_" + ij);
      for (const char* s : {"M", "R", "S", "V", "gamma_A", "gamma_B", "eta_A", "eta_B"}) n.emplace_back(s);
      return n;
    }();
    return names;
  }

  static Estimate* slot_for(HarvestIntegrals& h, const std::string& name) {
    if (name.size() == 4 && name[1] == '_') {
      const int i = name[2] == 'A' ? 0 : 1, j = name[3] == 'A' ? 0 : 1;
      switch (name[0]) {
        case 'L': return &h.L[i][j];
        case 'P': return &h.P[i][j];
        case 'K': return &h.K[i][j];
        case 'Q': return &h.Q[i][j];
      }
    }
    if (name == "M") return &h.M;
    if (name == "R") return &h.R;
    if (name == "S") return &h.S;
    if (name == "V") return &h.V;
    if (name == "gamma_A") return &h.gamma[0];
    if (name == "gamma_B") return &h.gamma[1];
    if (name == "eta_A") return &h.eta[0];
    if (name == "eta_B") return &h.eta[1];
    return nullptr;
  }

  std::filesystem::path dir_;
};

}  // namespace harvest
