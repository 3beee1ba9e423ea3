#pragma once

// Line-oriented potential-spec files.
//
//   # comment
//   barrier V0=<strength> L=<width> alpha=<center>
//
// Keys may appear in any order; all three are required. Blank lines and
// everything after '#' are ignored. Overlapping barriers are rejected with the
// line numbers of the offending pair.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lpscatter/potential.hpp"

namespace lpscatter {

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

inline double parse_number(const std::string& text, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw InputError(where + ": '" + text + "' is not a number");
  }
  if (used != text.size()) throw InputError(where + ": '" + text + "' is not a number");
  return v;
}

// key=value tokens after the leading keyword
inline std::map<std::string, std::string> key_values(std::istringstream& in, const std::string& where) {
  std::map<std::string, std::string> out;
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == tok.size())
      throw InputError(where + ": expected key=value, got '" + tok + "'");
    if (!out.emplace(tok.substr(0, eq), tok.substr(eq + 1)).second)
      throw InputError(where + ": duplicate key '" + tok.substr(0, eq) + "'");
  }
  return out;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline PwcPotential parse_potential(std::istream& in, const std::string& name = "<input>") {
  struct Entry {
    Barrier barrier;
    int line;
  };
  std::vector<Entry> entries;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::istringstream ls(detail::strip_comment(raw));
    std::string keyword;
    if (!(ls >> keyword)) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    if (keyword != "barrier") throw InputError(where + ": unknown record '" + keyword + "'");
    auto kv = detail::key_values(ls, where);
    Barrier b;
    for (const char* key : {"V0", "L", "alpha"})
      if (!kv.count(key)) throw InputError(where + ": missing key '" + key + "'");
    for (const auto& [key, value] : kv) {
      const double v = detail::parse_number(value, where);
      if (key == "V0")
        b.strength = v;
      else if (key == "L")
        b.width = v;
      else if (key == "alpha")
        b.center = v;
      else
        throw InputError(where + ": unknown key '" + key + "'");
    }
    if (!(b.width > 0.0)) throw InputError(where + ": width L must be positive");
    entries.push_back({b, lineno});
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.barrier.center < b.barrier.center; });
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (entries[i - 1].barrier.hi() > entries[i].barrier.lo() + tol::position)
      throw InputError(name + ": barriers on lines " + std::to_string(entries[i - 1].line) + " and " +
                       std::to_string(entries[i].line) + " overlap");
  std::vector<Barrier> bs;
  for (const auto& e : entries) bs.push_back(e.barrier);
  return PwcPotential(std::move(bs));
}

inline PwcPotential load_potential(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open potential file '" + path + "'");
  return parse_potential(in, path);
}

inline std::string format_potential(const PwcPotential& pot) {
  std::ostringstream out;
  out << "# " << pot.size() << " barriers, support [" << detail::format_double(pot.x_a()) << ", "
      << detail::format_double(pot.x_b()) << "]\n";
  for (const auto& b : pot.barriers())
    out << "barrier V0=" << detail::format_double(b.strength) << " L=" << detail::format_double(b.width)
        << " alpha=" << detail::format_double(b.center) << "\n";
  return out.str();
}

}  // namespace lpscatter
