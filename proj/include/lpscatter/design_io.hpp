#pragma once

// JSON problem and solution files for the design solver.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lpscatter/design.hpp"
#include "lpscatter/io.hpp"

namespace lpscatter {

using json = nlohmann::json;

struct ProblemFile {
  DesignProblem problem;
  std::vector<std::vector<double>> seeds;  // extra starts, free values in declaration order
};

namespace detail {

inline Slot parse_slot(const json& j, const std::string& where) {
  if (j.is_number()) return Slot::literal(j.get<double>());
  if (j.is_string()) return Slot::ref(j.get<std::string>());
  throw InputError(where + ": expected a number or a parameter name");
}

inline json slot_json(const Slot& s) { return s.is_ref() ? json(s.param) : json(s.value); }

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace detail

/// Schema:
///   parameters: [{name, value, free, bounds: [lo, hi]}]
///   layout: {origin: number | name, barriers: [{V, L}], gaps: [number | name]}
///   targets: [{kind: "ptr" | "zero_current", energy, label, resonators: [[first, last]], signs}]
///   least_squares, random_starts, seed, max_iterations, tol_T, seeds: [[free values]]
inline ProblemFile parse_problem(std::istream& in, const std::string& name = "<input>") {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(name + ": " + e.what());
  }
  ProblemFile f;
  auto& p = f.problem;
  try {
    for (const auto& pj : j.at("parameters")) {
      Parameter par;
      par.name = pj.at("name").get<std::string>();
      par.value = pj.at("value").get<double>();
      par.free = detail::get_or(pj, "free", false);
      if (pj.contains("bounds")) {
        const auto b = pj.at("bounds").get<std::vector<double>>();
        if (b.size() != 2) throw InputError(name + ": parameter '" + par.name + "': bounds need [lo, hi]");
        par.bounds = Bounds{b[0], b[1]};
      }
      p.parameters.push_back(par);
    }
    const auto& lj = j.at("layout");
    if (lj.contains("origin")) p.layout.origin = detail::parse_slot(lj.at("origin"), name + ": origin");
    std::size_t i = 0;
    for (const auto& bj : lj.at("barriers")) {
      const std::string where = name + ": barrier " + std::to_string(i++);
      p.layout.barriers.push_back({detail::parse_slot(bj.at("V"), where + " V"), detail::parse_slot(bj.at("L"), where + " L")});
    }
    i = 0;
    if (lj.contains("gaps"))
      for (const auto& gj : lj.at("gaps")) p.layout.gaps.push_back(detail::parse_slot(gj, name + ": gap " + std::to_string(i++)));
    for (const auto& tj : j.at("targets")) {
      Target t;
      const auto kind = detail::get_or<std::string>(tj, "kind", "ptr");
      if (kind == "ptr") t.kind = TargetKind::ptr;
      else if (kind == "zero_current") t.kind = TargetKind::zero_current;
      else throw InputError(name + ": unknown target kind '" + kind + "'");
      t.energy = tj.at("energy").get<double>();
      t.label = detail::get_or<std::string>(tj, "label", "");
      for (const auto& rj : tj.at("resonators")) {
        const auto r = rj.get<std::vector<std::size_t>>();
        if (r.size() != 2) throw InputError(name + ": resonators are [first, last] barrier index pairs");
        t.resonators.push_back({r[0], r[1]});
      }
      if (tj.contains("signs")) t.signs = tj.at("signs").get<std::vector<int>>();
      p.targets.push_back(t);
    }
    p.least_squares = detail::get_or(j, "least_squares", false);
    p.random_starts = detail::get_or<std::size_t>(j, "random_starts", 16);
    p.seed = detail::get_or<std::uint64_t>(j, "seed", 1);
    p.max_iterations = detail::get_or<std::size_t>(j, "max_iterations", 200);
    p.tol_T = detail::get_or(j, "tol_T", tol::transmission);
    if (j.contains("seeds")) f.seeds = j.at("seeds").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw InputError(name + ": " + e.what());
  }
  try {
    initial_free_values(p);  // runs the static checks
  } catch (const DesignError& e) {
    throw InputError(name + ": " + e.what());
  }
  return f;
}

inline ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open");
  return parse_problem(in, path);
}

inline json problem_json(const DesignProblem& p) {
  json j;
  j["parameters"] = json::array();
  for (const auto& par : p.parameters) {
    json pj{{"name", par.name}, {"value", par.value}, {"free", par.free}};
    if (par.bounds) pj["bounds"] = {par.bounds->lo, par.bounds->hi};
    j["parameters"].push_back(pj);
  }
  json lj;
  lj["origin"] = detail::slot_json(p.layout.origin);
  lj["barriers"] = json::array();
  for (const auto& b : p.layout.barriers) lj["barriers"].push_back({{"V", detail::slot_json(b.strength)}, {"L", detail::slot_json(b.width)}});
  lj["gaps"] = json::array();
  for (const auto& g : p.layout.gaps) lj["gaps"].push_back(detail::slot_json(g));
  j["layout"] = lj;
  j["targets"] = json::array();
  for (const auto& t : p.targets) {
    json tj{{"kind", to_string(t.kind)}, {"energy", t.energy}, {"label", t.label}};
    tj["resonators"] = json::array();
    for (const auto& r : t.resonators) tj["resonators"].push_back({r.first, r.last});
    if (t.kind == TargetKind::zero_current) tj["signs"] = t.signs;
    j["targets"].push_back(tj);
  }
  j["least_squares"] = p.least_squares;
  j["random_starts"] = p.random_starts;
  j["seed"] = p.seed;
  j["max_iterations"] = p.max_iterations;
  j["tol_T"] = p.tol_T;
  return j;
}

/// Labels matching DesignSolution::residuals.
inline std::vector<std::string> residual_labels(const DesignProblem& p) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < p.targets.size(); ++i) {
    const auto& t = p.targets[i];
    const std::string tag = t.label.empty() ? "target " + std::to_string(i) : t.label;
    auto range = [](const BarrierRange& r) { return std::to_string(r.first) + ".." + std::to_string(r.last); };
    if (t.kind == TargetKind::ptr) {
      for (const auto& r : t.resonators) out.push_back(tag + ": |z| resonator " + range(r));
    } else {
      for (std::size_t l = 0; l < t.resonators.size(); ++l) {
        out.push_back(tag + ": LP resonator " + range(t.resonators[l]));
        if (l + 1 < t.resonators.size()) out.push_back(tag + ": LP gap " + std::to_string(l));
      }
      out.push_back(tag + ": boundary e^{2ik x_c} = lambda");
    }
  }
  return out;
}

inline json potential_json(const PwcPotential& pot) {
  json a = json::array();
  for (const auto& b : pot.barriers()) a.push_back({{"V", b.strength}, {"L", b.width}, {"alpha", b.center}});
  return a;
}

/// Echoes the problem schema with solved values, plus residuals and diagnostics.
inline json solution_json(const DesignProblem& p, const DesignSolution& s) {
  json j = problem_json(p);
  for (std::size_t i = 0; i < p.parameters.size() && i < s.values.size(); ++i) j["parameters"][i]["value"] = s.values[i];
  j["converged"] = s.converged;
  j["message"] = s.message;
  j["max_residual"] = std::isfinite(s.max_residual) ? json(s.max_residual) : json(nullptr);
  j["iterations"] = s.iterations;
  j["starts"] = s.starts;
  j["start_index"] = s.start_index;
  const auto labels = residual_labels(p);
  j["residuals"] = json::array();
  for (std::size_t i = 0; i < s.residuals.size(); ++i)
    j["residuals"].push_back({{"condition", i < labels.size() ? labels[i] : ""}, {"value", s.residuals[i]}});
  j["checks"] = json::array();
  for (const auto& c : s.checks) {
    json cj{{"label", c.label}, {"kind", to_string(c.kind)}, {"energy", c.energy}, {"one_minus_T", c.one_minus_T},
            {"tag", c.tag}, {"passed", c.passed}};
    if (!c.detail.empty()) cj["detail"] = c.detail;
    j["checks"].push_back(cj);
  }
  j["potential"] = potential_json(s.potential);
  return j;
}

inline json report_json(const VerifyReport& r) {
  json j;
  j["passed"] = r.passed();
  j["checks"] = json::array();
  for (const auto& c : r.checks)
    j["checks"].push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"passed", c.passed}});
  return j;
}

}  // namespace lpscatter
