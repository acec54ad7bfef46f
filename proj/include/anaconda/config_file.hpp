#pragma once

// Tiny key=value config format for tester constants. '#' starts a comment,
// blank lines are skipped, keys are c_T, c_m, c_eps, c_b and (optionally)
// seed. Unknown or repeated keys are hard errors so a typo can't silently
// fall back to defaults.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "anaconda/rng.hpp"
#include "anaconda/tester.hpp"

namespace anaconda {

struct ConstantsFile {
  Constants constants;
  std::optional<std::uint64_t> seed;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& where, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw error(where + ": not a number: '" + text + "'");
  }
  if (used != text.size()) throw error(where + ": trailing characters after number: '" + text + "'");
  return v;
}

inline std::uint64_t parse_u64(const std::string& where, const std::string& text) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  if (text.find('-') != std::string::npos)  // stoull would silently wrap negatives
    throw error(where + ": not an unsigned integer: '" + text + "'");
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    throw error(where + ": not an unsigned integer: '" + text + "'");
  }
  if (used != text.size())
    throw error(where + ": trailing characters after number: '" + text + "'");
  return v;
}

}  // namespace detail

inline ConstantsFile load_constants(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error("load_constants: cannot open '" + path + "'");

  ConstantsFile out;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    const std::string where = path + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw error(where + ": expected key=value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw error(where + ": empty key");
    if (value.empty()) throw error(where + ": empty value for '" + key + "'");
    if (!seen.insert(key).second) throw error(where + ": duplicate key '" + key + "'");

    if (key == "c_T")
      out.constants.c_T = detail::parse_double(where, value);
    else if (key == "c_m")
      out.constants.c_m = detail::parse_double(where, value);
    else if (key == "c_eps")
      out.constants.c_eps = detail::parse_double(where, value);
    else if (key == "c_b")
      out.constants.c_b = detail::parse_double(where, value);
    else if (key == "seed")
      out.seed = detail::parse_u64(where, value);
    else
      throw error(where + ": unknown key '" + key + "'");
  }
  return out;
}

inline void save_constants(const std::string& path, const Constants& c,
                           std::optional<std::uint64_t> seed = std::nullopt) {
  std::ofstream out(path);
  if (!out) throw error("save_constants: cannot open '" + path + "'");
  out.precision(17);
  out << "c_T = " << c.c_T << "\n"
      << "c_m = " << c.c_m << "\n"
      << "c_eps = " << c.c_eps << "\n"
      << "c_b = " << c.c_b << "\n";
  if (seed) out << "seed = " << *seed << "\n";
  if (!out) throw error("save_constants: write failed for '" + path + "'");
}

}  // namespace anaconda
