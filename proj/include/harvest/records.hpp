#pragma once

// Result record helpers: platform-stable number formatting, hashing and
// NDJSON emission.

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include <json.hpp>

#include "harvest/integrals.hpp"
#include "harvest/qcore.hpp"

namespace harvest {

inline constexpr const char* kVersion = "0.4.0";

using json = nlohmann::ordered_json;

/// 17 significant digits; parses back to the same double.
inline std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

inline double parse_num(const json& j) {
  if (j.is_string()) return std::stod(j.get<std::string>());
  return j.get<double>();
}

inline json to_json(cplx z) { return json{{"re", num(z.real())}, {"im", num(z.imag())}}; }

inline cplx cplx_from_json(const json& j) { return {parse_num(j.at("re")), parse_num(j.at("im"))}; }

inline json to_json(const Estimate& e) {
  return json{{"re", num(e.value.real())}, {"im", num(e.value.imag())}, {"err", num(e.error)}};
}

inline json to_json(const Matrix4c& m) {
  json rows = json::array();
  for (int r = 0; r < 4; ++r) {
    json row = json::array();
    for (int c = 0; c < 4; ++c) row.push_back(to_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline json to_json(const HarvestIntegrals& in) {
  json j;
  const char* lbl[2] = {"A", "B"};
  auto table = [&](const PairTable& t) {
    json o;
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k) o[std::string(lbl[i]) + lbl[k]] = to_json(t[i][k]);
    return o;
  };
  j["L"] = table(in.L);
  j["P"] = table(in.P);
  j["K"] = table(in.K);
  j["Q"] = table(in.Q);
  j["M"] = to_json(in.M);
  j["R"] = to_json(in.R);
  j["S"] = to_json(in.S);
  j["V"] = to_json(in.V);
  for (int i = 0; i < 2; ++i) {
    j["gamma"][lbl[i]] = to_json(in.gamma[i]);
    j["eta"][lbl[i]] = to_json(in.eta[i]);
  }
  j["frame"] = {{"v", num(in.frame.v)}, {"label", in.frame.label}};
  return j;
}

}  // namespace harvest
