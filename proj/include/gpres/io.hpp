#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpres/asymptotics.hpp"
#include "gpres/errors.hpp"
#include "gpres/lorenz.hpp"
#include "gpres/state.hpp"
#include "gpres/witness.hpp"

// State files and plot data.  A state file is a JSON document
//   { "beta": b, "mu": m, "levels": [ { "E": e, "n": n, "p": p }, ... ] }
// where "p" may be omitted on every level to request the Gibbs state.
// Serialization uses shortest round-trip float formatting, so parse after
// serialize reproduces every field bit for bit.

namespace gpres {

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double require_number(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path + ": expected a number");
  return j.get<double>();
}

inline const nlohmann::json& require_key(const nlohmann::json& j, const std::string& key,
                                         const std::string& path) {
  if (!j.is_object()) throw ParseError(path + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(path + ": missing required key \"" + key + "\"");
  return *it;
}

}  // namespace detail

struct StateFileResult {
  QCState state;
  bool gibbs_requested = false;  // true when every "p" was omitted
};

inline StateFileResult parse_state_json(const std::string& text,
                                        const std::string& where = "state file") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(where + ": " + e.what());
  }
  TheoryParams theory;
  theory.beta = detail::require_number(detail::require_key(doc, "beta", where), where + ": beta");
  theory.mu = detail::require_number(detail::require_key(doc, "mu", where), where + ": mu");
  const nlohmann::json& levels = detail::require_key(doc, "levels", where);
  if (!levels.is_array() || levels.empty())
    throw ParseError(where + ": levels: expected a non-empty array");

  Spectrum spectrum;
  std::vector<double> probs;
  std::size_t with_p = 0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const std::string path = where + ": levels[" + std::to_string(i) + "]";
    const nlohmann::json& lv = levels[i];
    EnergyLevel el;
    el.energy = detail::require_number(detail::require_key(lv, "E", path), path + ".E");
    el.particles = detail::require_number(detail::require_key(lv, "n", path), path + ".n");
    spectrum.levels.push_back(el);
    if (lv.contains("p")) {
      probs.push_back(detail::require_number(lv["p"], path + ".p"));
      ++with_p;
    }
  }
  if (with_p != 0 && with_p != levels.size())
    throw ParseError(where + ": levels: either every level carries \"p\" or none does");

  StateFileResult out;
  try {
    if (with_p == 0) {
      out.state = gibbs_state(spectrum, theory);
      out.gibbs_requested = true;
    } else {
      out.state = make_state(spectrum, theory, std::move(probs));
    }
  } catch (const std::invalid_argument& e) {
    throw ParseError(where + ": " + e.what());
  }
  return out;
}

inline StateFileResult load_state_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_state_json(ss.str(), path);
}

inline nlohmann::json state_to_json(const QCState& s) {
  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t i = 0; i < s.dim(); ++i)
    levels.push_back({{"E", s.spectrum.levels[i].energy},
                      {"n", s.spectrum.levels[i].particles},
                      {"p", s.probs[i]}});
  return {{"beta", s.theory.beta}, {"mu", s.theory.mu}, {"levels", levels}};
}

inline std::string serialize_state(const QCState& s) { return state_to_json(s).dump(2); }

// Infinite values cross the JSON boundary as the string "inf", never as a
// bare float special.
inline nlohmann::json ext_real_to_json(const ExtReal& v) {
  if (v.infinite) return "inf";
  return v.value;
}

inline nlohmann::json witness_to_json(const StochasticWitness& w) {
  return {{"rows", w.rows}, {"cols", w.cols}, {"data", w.m}};
}

inline void write_lorenz_csv(std::ostream& os, const LorenzCurve& c) {
  os << "t,L\n";
  for (std::size_t i = 0; i < c.t.size(); ++i)
    os << detail::format_double(c.t[i]) << ',' << detail::format_double(c.L[i]) << '\n';
}

// Missing exact terms (type-class overflow) leave their cells empty.
inline void write_sweep_csv(std::ostream& os, const std::vector<SecondOrderExpansion>& sweep) {
  os << "n,exact,leading,correction,residual\n";
  for (const SecondOrderExpansion& e : sweep) {
    os << e.n << ',';
    if (e.exact) os << detail::format_double(*e.exact);
    os << ',' << detail::format_double(e.leading) << ',' << detail::format_double(e.correction)
       << ',';
    if (e.residual) os << detail::format_double(*e.residual);
    os << '\n';
  }
}

}  // namespace gpres
