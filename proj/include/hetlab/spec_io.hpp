#pragma once

// SystemSpec <-> JSON document.  Field names follow the shipped schema;
// coefficient tables are arrays of [i, j, value] (R) or [k, value] (f and
// the mu-family offsets).

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hetlab/errors.hpp"
#include "hetlab/model_core.hpp"

namespace hetlab {

using nlohmann::json;

inline json spec_to_json(const SystemSpec& s) {
  json j;
  j["omega"] = s.omega;
  j["d"] = s.d;
  j["nu"] = s.nu;
  j["r"] = s.r;
  j["eps"] = s.eps;
  j["delta_nb"] = s.delta_nb;
  j["involution_case"] = to_string(s.involution_case);
  j["eta_star"] = s.eta_star;
  j["tau_floor"] = s.tau_floor;
  j["R_coeffs"] = json::array();
  for (const auto& t : s.R_coeffs)
    j["R_coeffs"].push_back({t.i, t.j, t.coeff});
  j["f_coeffs"] = json::array();
  for (const auto& t : s.f_coeffs) j["f_coeffs"].push_back({t.k, t.coeff});
  json g;
  g["alpha"] = s.gmap_jet.alpha;
  g["beta"] = s.gmap_jet.beta;
  g["gamma"] = s.gmap_jet.gamma;
  g["delta_m"] = s.gmap_jet.delta_m;
  g["a_lin"] = s.gmap_jet.a_lin;
  g["b_lin"] = s.gmap_jet.b_lin;
  g["fam_a"] = json::array();
  for (const auto& t : s.gmap_jet.fam_a) g["fam_a"].push_back({t.k, t.coeff});
  g["fam_b"] = json::array();
  for (const auto& t : s.gmap_jet.fam_b) g["fam_b"].push_back({t.k, t.coeff});
  j["gmap_jet"] = g;
  return j;
}

inline SystemSpec spec_from_json(const json& j) {
  SystemSpec s;
  try {
    s.omega = j.at("omega").get<double>();
    s.d = j.at("d").get<double>();
    s.nu = j.at("nu").get<double>();
    s.r = j.at("r").get<double>();
    s.eps = j.at("eps").get<double>();
    s.delta_nb = j.at("delta_nb").get<double>();
    const std::string ic = j.at("involution_case").get<std::string>();
    if (ic == "case1")
      s.involution_case = InvolutionCase::Case1;
    else if (ic == "case2")
      s.involution_case = InvolutionCase::Case2;
    else
      throw SpecError("involution_case must be \"case1\" or \"case2\"");
    s.eta_star = j.at("eta_star").get<double>();
    if (j.contains("tau_floor"))
      s.tau_floor = j.at("tau_floor").get<double>();
    else
      s.tau_floor = 1e-8 * s.r;
    for (const auto& t : j.value("R_coeffs", json::array()))
      s.R_coeffs.push_back(
          {t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<double>()});
    for (const auto& t : j.value("f_coeffs", json::array()))
      s.f_coeffs.push_back({t.at(0).get<int>(), t.at(1).get<double>()});
    const json& g = j.at("gmap_jet");
    s.gmap_jet.alpha = g.at("alpha").get<double>();
    s.gmap_jet.beta = g.at("beta").get<double>();
    s.gmap_jet.gamma = g.at("gamma").get<double>();
    s.gmap_jet.delta_m = g.at("delta_m").get<double>();
    s.gmap_jet.a_lin = g.value("a_lin", 0.0);
    s.gmap_jet.b_lin = g.value("b_lin", 0.0);
    for (const auto& t : g.value("fam_a", json::array()))
      s.gmap_jet.fam_a.push_back({t.at(0).get<int>(), t.at(1).get<double>()});
    for (const auto& t : g.value("fam_b", json::array()))
      s.gmap_jet.fam_b.push_back({t.at(0).get<int>(), t.at(1).get<double>()});
  } catch (const json::exception& e) {
    throw SpecError(std::string("malformed SystemSpec document: ") + e.what());
  }
  return s;
}

inline SystemSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SpecError(std::string("spec file is not valid JSON: ") + e.what());
  }
  return spec_from_json(j);
}

// FNV-1a 64 over the canonical (sorted-key) serialization; identifies the
// spec in every ScanResult.
inline std::string spec_digest(const SystemSpec& s) {
  const std::string doc = spec_to_json(s).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : doc) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace hetlab
