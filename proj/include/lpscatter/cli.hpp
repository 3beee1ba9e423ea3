#pragma once

// Command-line front end: spectrum, state, symmetries, design, verify.
// Exit codes: 0 success, 1 verification or convergence failure, 2 input error.

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lpscatter/design.hpp"
#include "lpscatter/design_io.hpp"
#include "lpscatter/io.hpp"
#include "lpscatter/oracle.hpp"
#include "lpscatter/potential.hpp"
#include "lpscatter/transfer.hpp"
#include "lpscatter/wavefield.hpp"

namespace lpscatter {

struct EnergyRange {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
};

struct RunConfig {
  std::string subcommand;
  std::string potential;
  std::string problem;
  std::optional<double> energy;
  std::optional<EnergyRange> erange;
  BoundaryCondition bc = BoundaryCondition::aac;
  std::string out = ".";
  double tol_T = tol::transmission;
  std::optional<std::uint64_t> seed;
  std::string expect = "any";
  std::optional<std::size_t> decomposition;
};

namespace cli {

constexpr int ok = 0;
constexpr int failed = 1;
constexpr int input_error = 2;

inline std::string num(double v) { return detail::format_double(v); }

inline EnergyRange parse_erange(const std::string& s) {
  const auto a = s.find(':'), b = s.rfind(':');
  if (a == std::string::npos || a == b) throw InputError("--erange: expected lo:hi:n, got '" + s + "'");
  EnergyRange r;
  r.lo = detail::parse_number(s.substr(0, a), "--erange lo");
  r.hi = detail::parse_number(s.substr(a + 1, b - a - 1), "--erange hi");
  const double n = detail::parse_number(s.substr(b + 1), "--erange n");
  if (!(r.hi > r.lo) || n < 2 || n != std::floor(n) || n > 1e7)
    throw InputError("--erange: need lo < hi and an integer n >= 2");
  r.n = static_cast<std::size_t>(n);
  return r;
}

inline std::filesystem::path out_file(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out);
  return std::filesystem::path(cfg.out) / name;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw InputError("cannot write '" + p.string() + "'");
  f << text;
}

inline void write_json(const std::filesystem::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

inline double require_energy(const RunConfig& cfg) {
  if (!cfg.energy) throw InputError("--energy is required");
  if (!(*cfg.energy > 0.0)) throw InputError("--energy must be positive");
  return *cfg.energy;
}

inline PwcPotential require_potential(const RunConfig& cfg) {
  if (cfg.potential.empty()) throw InputError("--potential is required");
  return load_potential(cfg.potential);
}

inline json subdomain_json(const Subdomain& s) {
  return {{"lo", s.lo()}, {"hi", s.hi()}, {"alpha", s.center}, {"kind", to_string(s.kind)}};
}

// Decomposition used to classify a state: the requested one, else the first (coarsest
// first, at most 256 tried) under which the state is a PTR or an LP eigenstate, else the finest.
struct Chosen {
  Decomposition dec;
  StateClass cls;
};

inline Chosen choose_decomposition(const ScatterState& st, const RunConfig& cfg) {
  const auto set = enumerate_decompositions(st.potential);
  if (set.items.empty()) return {Decomposition{}, classify_state(st, Decomposition{}, cfg.tol_T)};
  if (cfg.decomposition) {
    if (*cfg.decomposition >= set.items.size())
      throw InputError("--decomposition: index out of range (" + std::to_string(set.items.size()) + " available)");
    const auto& d = set.items[*cfg.decomposition];
    return {d, classify_state(st, d, cfg.tol_T)};
  }
  const std::size_t tries = std::min<std::size_t>(set.items.size(), 256);
  for (std::size_t i = 0; i < tries; ++i) {
    auto cls = classify_state(st, set.items[i], cfg.tol_T);
    if (cls.tag == StateTag::ptr || cls.tag == StateTag::lp_eigenstate) return {set.items[i], cls};
  }
  const auto& d = set.items.back();
  return {d, classify_state(st, d, cfg.tol_T)};
}

inline json classification_json(const ScatterState& st, const Chosen& c) {
  json j;
  j["energy"] = st.energy();
  j["k"] = st.k;
  j["bc"] = to_string(st.bc);
  j["tag"] = to_string(c.cls.tag);
  j["T"] = c.cls.T;
  j["current"] = c.cls.current;
  j["min_rho"] = c.cls.min_rho;
  j["lambda"] = c.cls.lambda;
  j["signs"] = c.cls.signs;
  j["decomposition"] = c.dec.index;
  j["resonators"] = json::array();
  for (const auto& r : c.dec.resonators)
    j["resonators"].push_back({{"first", r.range.first}, {"last", r.range.last}, {"lo", r.domain.lo()},
                               {"hi", r.domain.hi()}, {"alpha", r.domain.center}});
  j["subdomains"] = json::array();
  for (const auto& s : c.cls.subdomains) {
    json sj = subdomain_json(s.subdomain);
    sj["abs_q"] = s.invariant.modulus;
    sj["q_constancy"] = s.invariant.constancy_residual;
    sj["density_residual"] = s.density_residual;
    sj["sign"] = s.sign;
    j["subdomains"].push_back(sj);
  }
  j["diagnostics"] = c.cls.diagnostics;
  return j;
}

inline int cmd_spectrum(const RunConfig& cfg, std::ostream& out) {
  const auto pot = require_potential(cfg);
  if (!cfg.erange) throw InputError("--erange lo:hi:n is required");
  const auto& er = *cfg.erange;
  // E = 0 carries no scattering state; non-positive grid points are skipped
  std::vector<double> es;
  for (std::size_t i = 0; i < er.n; ++i) {
    const double e = er.lo + (er.hi - er.lo) * static_cast<double>(i) / static_cast<double>(er.n - 1);
    if (e > 0.0) es.push_back(e);
  }
  if (es.size() < 2) throw InputError("--erange: fewer than two positive energies");
  std::ostringstream csv;
  csv << "E,T,R,re_r,im_r,re_t,im_t\n";
  for (const auto& p : transmission_spectrum(pot, es))
    csv << num(p.energy) << ',' << num(p.T) << ',' << num(p.R) << ',' << num(p.r.real()) << ',' << num(p.r.imag())
        << ',' << num(p.t.real()) << ',' << num(p.t.imag()) << '\n';
  write_text(out_file(cfg, "spectrum.csv"), csv.str());

  const auto res = find_unit_transmission(pot, es.front(), es.back(), cfg.tol_T);
  std::ostringstream rc;
  rc << "E,one_minus_T\n";
  for (double e : res.energies) rc << num(e) << ',' << num(1.0 - scattering(pot, momentum(e)).T()) << '\n';
  write_text(out_file(cfg, "resonances.csv"), rc.str());
  out << "spectrum: " << es.size() << " energies, " << res.energies.size() << " unit-transmission points\n";
  for (double e : res.energies) out << "  E = " << num(e) << "\n";
  if (res.resolution_warning) out << "warning: scan may be too coarse to resolve every resonance\n";
  return ok;
}

inline int cmd_state(const RunConfig& cfg, std::ostream& out) {
  const auto pot = require_potential(cfg);
  const double e = require_energy(cfg);
  const auto st = solve_state(pot, momentum(e), cfg.bc);
  std::ostringstream csv;
  csv << "x,re_psi,im_psi,rho,phi,V\n";
  for (std::size_t i = 0; i < st.samples.size(); ++i) {
    const auto& s = st.samples[i];
    csv << num(s.x) << ',' << num(s.psi.real()) << ',' << num(s.psi.imag()) << ',' << num(std::norm(s.psi)) << ','
        << num(st.phase[i]) << ',' << num(value_at(pot, s.x)) << '\n';
  }
  write_text(out_file(cfg, "state.csv"), csv.str());

  const auto chosen = choose_decomposition(st, cfg);
  write_json(out_file(cfg, "classification.json"), classification_json(st, chosen));

  std::ostringstream inv;
  inv << "lo,hi,kind,re_q,im_q,abs_q,constancy,q_tilde\n";
  for (const auto& sub : chosen.dec.subdomains()) {
    const auto q = evaluate_nonlocal(st, sub);
    inv << num(sub.lo()) << ',' << num(sub.hi()) << ',' << to_string(sub.kind) << ',' << num(q.q.real()) << ','
        << num(q.q.imag()) << ',' << num(q.modulus) << ',' << num(q.constancy_residual) << ','
        << (q.q_tilde ? num(*q.q_tilde) : std::string("")) << '\n';
  }
  write_text(out_file(cfg, "invariants.csv"), inv.str());
  out << "state: E = " << num(e) << " (" << to_string(cfg.bc) << "), T = " << num(st.s.T()) << ", "
      << to_string(chosen.cls.tag) << " in decomposition " << chosen.dec.index << "\n";
  for (const auto& d : chosen.cls.diagnostics) out << "  note: " << d << "\n";
  return ok;
}

inline int cmd_symmetries(const RunConfig& cfg, std::ostream& out) {
  const auto pot = require_potential(cfg);
  const auto set = enumerate_decompositions(pot);
  std::ostringstream csv;
  csv << "decomposition,resonator,first,last,lo,hi,alpha\n";
  out << set.items.size() << " decompositions" << (set.truncated ? " (truncated)" : "") << "\n";
  for (const auto& d : set.items) {
    out << "decomposition " << d.index << ":";
    for (std::size_t l = 0; l < d.resonators.size(); ++l) {
      const auto& r = d.resonators[l];
      out << " [" << num(r.domain.lo()) << ", " << num(r.domain.hi()) << "] alpha=" << num(r.domain.center);
      csv << d.index << ',' << l << ',' << r.range.first << ',' << r.range.last << ',' << num(r.domain.lo()) << ','
          << num(r.domain.hi()) << ',' << num(r.domain.center) << '\n';
    }
    out << "\n";
  }
  write_text(out_file(cfg, "decompositions.csv"), csv.str());
  return ok;
}

inline int cmd_design(const RunConfig& cfg, std::ostream& out) {
  if (cfg.problem.empty()) throw InputError("--problem is required");
  auto file = load_problem(cfg.problem);
  auto& p = file.problem;
  if (cfg.seed) p.seed = *cfg.seed;
  p.tol_T = cfg.tol_T;
  auto seeds = file.seeds;
  seeds.insert(seeds.begin(), initial_free_values(p));
  const auto sol = solve(p, seeds);
  write_json(out_file(cfg, "solution.json"), solution_json(p, sol));
  write_text(out_file(cfg, "solved.pot"), format_potential(sol.potential));
  out << "design: " << sol.message << " after " << sol.starts << " starts, " << sol.iterations << " iterations\n";
  const auto names = sol.names;
  for (std::size_t i = 0; i < names.size() && i < sol.free_values.size(); ++i)
    out << "  " << names[i] << " = " << num(sol.free_values[i]) << "\n";
  if (!sol.converged) return failed;
  const auto rep = verify(p, sol);
  write_json(out_file(cfg, "verification.json"), report_json(rep));
  out << "verification: " << (rep.passed() ? "pass" : "FAIL") << " (" << rep.checks.size() << " checks)\n";
  return rep.passed() ? ok : failed;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  const auto pot = require_potential(cfg);
  VerifyReport rep;
  auto add = [&](std::string name, double v, double thr) { rep.checks.push_back({std::move(name), v, thr, v < thr}); };
  if (!cfg.problem.empty()) rep = verify(load_problem(cfg.problem).problem, pot);
  if (cfg.energy) {
    const double e = require_energy(cfg), k = momentum(e);
    const auto m = total_matrix(pot, k);
    const auto s = s_matrix(m);
    add("unitarity |T + R - 1|", std::abs(s.T() + s.R() - 1.0), tol::unitary);
    add("unimodularity defect / |w|^2", std::abs(m.unimodularity_defect()) / std::norm(m.w), tol::unimodular);
    const auto st = solve_state(pot, k, cfg.bc);
    add("current spread / k", st.current_spread() / k, tol::current);
    const auto set = enumerate_decompositions(pot);
    if (!set.items.empty()) {
      double worst = 0.0;
      for (const auto& sub : set.items.back().subdomains()) {
        const auto q = nonlocal_invariant(st, sub);
        worst = std::max(worst, q.constant() ? 0.0 : q.constancy_residual);
      }
      add("q constancy (finest decomposition)", worst, tol::invariant);
    }
    const auto chosen = choose_decomposition(st, cfg);
    const std::string tag = to_string(chosen.cls.tag);
    if (cfg.expect != "any") {
      std::string want = cfg.expect;
      for (auto& ch : want) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      rep.checks.push_back({"classification " + tag + " (expected " + want + ")", tag == want ? 0.0 : 1.0, 0.5,
                            tag == want});
    }
    if (chosen.cls.tag == StateTag::ptr)
      for (const auto& r : chosen.cls.subdomains)
        add("density symmetry [" + num(r.subdomain.lo()) + ", " + num(r.subdomain.hi()) + "]", r.density_residual,
            tol::invariant);
    if (chosen.cls.tag == StateTag::lp_eigenstate) add("|r - r_tilde|", std::abs(s.r - s.r_tilde), tol::invariant);
    if (!pot.empty()) {
      const double cv = cross_validate(pot, {e});
      add("oracle |T - T_oracle| / T_oracle", cv, tol::oracle);
    }
  } else if (cfg.problem.empty()) {
    throw InputError("verify needs --energy or --problem");
  }
  json j = report_json(rep);
  j["vacuous"] = pot.empty();
  write_json(out_file(cfg, "report.json"), j);
  out << "verify: " << (rep.passed() ? "pass" : "FAIL") << " (" << rep.checks.size() << " checks)\n";
  for (const auto& c : rep.checks)
    if (!c.passed) out << "  failed: " << c.name << " = " << num(c.value) << " (threshold " << num(c.threshold) << ")\n";
  return rep.passed() ? ok : failed;
}

}  // namespace cli

inline int run(const RunConfig& cfg, std::ostream& out) {
  if (cfg.subcommand == "spectrum") return cli::cmd_spectrum(cfg, out);
  if (cfg.subcommand == "state") return cli::cmd_state(cfg, out);
  if (cfg.subcommand == "symmetries") return cli::cmd_symmetries(cfg, out);
  if (cfg.subcommand == "design") return cli::cmd_design(cfg, out);
  if (cfg.subcommand == "verify") return cli::cmd_verify(cfg, out);
  throw InputError("unknown subcommand '" + cfg.subcommand + "'");
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Local-parity analysis of 1D scattering over piecewise-constant potentials (hbar = m = 1)"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string erange, bc = "aac";
  std::optional<double> energy;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> decomposition;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "output directory")->capture_default_str();
    sub->add_option("--tol-T", cfg.tol_T, "unit-transmission tolerance on 1 - T")->capture_default_str();
  };
  auto* spectrum = app.add_subcommand("spectrum", "T(E) over an energy grid and the unit-transmission points");
  spectrum->add_option("--potential", cfg.potential, "potential spec file")->required();
  spectrum->add_option("--erange", erange, "energy grid lo:hi:n")->required();
  common(spectrum);

  auto* state = app.add_subcommand("state", "scattering state, classification and nonlocal invariants");
  state->add_option("--potential", cfg.potential, "potential spec file")->required();
  state->add_option("--energy", energy, "energy in units of epsilon")->required();
  state->add_option("--bc", bc, "asymptotic condition: sac or aac")->check(CLI::IsMember({"sac", "aac"}))->capture_default_str();
  state->add_option("--decomposition", decomposition, "decomposition index (default: automatic)");
  common(state);

  auto* sym = app.add_subcommand("symmetries", "every tiling into mirror-symmetric resonators");
  sym->add_option("--potential", cfg.potential, "potential spec file")->required();
  common(sym);

  auto* design = app.add_subcommand("design", "solve a design problem and verify it with the oracle");
  design->add_option("--problem", cfg.problem, "design problem (JSON)")->required();
  design->add_option("--seed", seed, "seed for the random starts (overrides the file)");
  common(design);

  auto* ver = app.add_subcommand("verify", "invariant battery and oracle cross-check");
  ver->add_option("--potential", cfg.potential, "potential spec file")->required();
  ver->add_option("--energy", energy, "energy in units of epsilon");
  ver->add_option("--bc", bc, "asymptotic condition: sac or aac")->check(CLI::IsMember({"sac", "aac"}))->capture_default_str();
  ver->add_option("--problem", cfg.problem, "design problem whose targets are re-checked with the oracle");
  ver->add_option("--expect", cfg.expect, "expected tag: ptr, lp_eigenstate, zero_current_no_lp, total_reflection, generic, any")
      ->check(CLI::IsMember({"any", "ptr", "lp_eigenstate", "zero_current_no_lp", "total_reflection", "generic"}))
      ->capture_default_str();
  ver->add_option("--decomposition", decomposition, "decomposition index (default: automatic)");
  common(ver);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? cli::ok : cli::input_error;
  }
  try {
    cfg.subcommand = app.get_subcommands().front()->get_name();
    if (!erange.empty()) cfg.erange = cli::parse_erange(erange);
    cfg.energy = energy;
    cfg.seed = seed;
    cfg.decomposition = decomposition;
    cfg.bc = bc == "sac" ? BoundaryCondition::sac : BoundaryCondition::aac;
    if (!(cfg.tol_T >= std::numeric_limits<double>::epsilon()) || !(cfg.tol_T < 1.0))
      throw InputError("--tol-T must lie in [machine epsilon, 1)");
    return run(cfg, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return cli::input_error;
  } catch (const PotentialError& e) {
    err << "error: " << e.what() << "\n";
    return cli::input_error;
  } catch (const DesignError& e) {
    err << "error: " << e.what() << "\n";
    return cli::input_error;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return cli::input_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return cli::failed;
  }
}

}  // namespace lpscatter
