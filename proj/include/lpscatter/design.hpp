#pragma once

// Inverse design: choose barrier parameters so that prescribed resonators are
// reflectionless at prescribed momenta, or so that the symmetric-incidence state
// is a zero-current LP eigenstate.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpscatter/oracle.hpp"
#include "lpscatter/potential.hpp"
#include "lpscatter/tolerances.hpp"
#include "lpscatter/transfer.hpp"
#include "lpscatter/wavefield.hpp"

namespace lpscatter {

class DesignError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class HandleKind { strength, width, gap, origin };

inline const char* to_string(HandleKind h) {
  switch (h) {
    case HandleKind::strength: return "strength";
    case HandleKind::width: return "width";
    case HandleKind::gap: return "gap";
    case HandleKind::origin: return "origin";
  }
  return "?";
}

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
};

inline Bounds default_bounds(HandleKind h) {
  switch (h) {
    case HandleKind::strength: return {1e-9, 100.0};
    case HandleKind::width: return {1e-3, 100.0};
    case HandleKind::gap: return {0.0, 100.0};
    case HandleKind::origin: return {-1e3, 1e3};
  }
  return {0.0, 0.0};
}

/// A named value. Several layout slots may reference the same parameter, which is
/// how identical barriers are tied together.
struct Parameter {
  std::string name;
  double value = 0.0;
  bool free = false;
  std::optional<Bounds> bounds;  // defaults by kind when unset
};

/// Either a literal number or a reference to a parameter.
struct Slot {
  std::string param;
  double value = 0.0;

  static Slot literal(double v) { return {"", v}; }
  static Slot ref(std::string name) { return {std::move(name), 0.0}; }
  [[nodiscard]] bool is_ref() const noexcept { return !param.empty(); }
  friend bool operator==(const Slot&, const Slot&) = default;
};

struct BarrierSlots {
  Slot strength;
  Slot width;
};

/// Left to right: the array starts at `origin`, gaps[i] separates barrier i and i + 1.
struct Layout {
  Slot origin = Slot::literal(0.0);
  std::vector<BarrierSlots> barriers;
  std::vector<Slot> gaps;
};

enum class TargetKind { ptr, zero_current };

inline const char* to_string(TargetKind t) { return t == TargetKind::ptr ? "ptr" : "zero_current"; }

/// ptr: every listed resonator has z = 0 at the target momentum.
/// zero_current: the listed resonators tile the whole array; the SAC state is an LP
/// eigenstate with the given signs on resonators and gaps (2n - 1 entries, spatial order).
struct Target {
  TargetKind kind = TargetKind::ptr;
  double energy = 1.0;
  std::vector<BarrierRange> resonators;
  std::vector<int> signs;
  std::string label;

  [[nodiscard]] double k() const { return momentum(energy); }
};

struct DesignProblem {
  std::vector<Parameter> parameters;
  Layout layout;
  std::vector<Target> targets;
  bool least_squares = false;
  std::size_t random_starts = 16;
  std::uint64_t seed = 1;
  std::size_t max_iterations = 200;
  double tol_T = tol::transmission;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Name resolution and static checks, done once per call.
struct Compiled {
  std::vector<std::size_t> free_index;      // parameter index of each free slot
  std::vector<HandleKind> kind;             // per parameter
  std::vector<Bounds> bounds;               // per parameter
  std::map<std::string, std::size_t> by_name;
};

inline std::string slot_key(const Slot& s) {
  if (s.is_ref()) return "$" + s.param;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", s.value);
  return buf;
}

// Independent real equations. A mirror-symmetric resonator has z = i e^{-2ik alpha} X
// with X real, so z = 0 is one real condition; resonators built from the same slots
// at the same energy repeat the same condition.
inline std::size_t count_conditions(const DesignProblem& p) {
  std::set<std::string> keys;
  for (const auto& t : p.targets) {
    if (t.kind != TargetKind::ptr) continue;
    for (const auto& r : t.resonators) {
      std::string key = slot_key(Slot::literal(t.energy));
      for (std::size_t i = r.first; i <= r.last; ++i) {
        key += "|" + slot_key(p.layout.barriers[i].strength) + "," + slot_key(p.layout.barriers[i].width);
        if (i < r.last) key += "," + slot_key(p.layout.gaps[i]);
      }
      keys.insert(key);
    }
  }
  return keys.size();
}

inline Compiled compile(const DesignProblem& p) {
  Compiled c;
  const auto& lay = p.layout;
  for (std::size_t i = 0; i < p.parameters.size(); ++i) {
    const auto& name = p.parameters[i].name;
    if (name.empty()) throw DesignError("parameter " + std::to_string(i) + " has no name");
    if (!c.by_name.emplace(name, i).second) throw DesignError("parameter '" + name + "' declared twice");
  }
  c.kind.assign(p.parameters.size(), HandleKind::origin);
  std::vector<bool> used(p.parameters.size(), false);
  auto bind = [&](const Slot& s, HandleKind kind, const std::string& where) {
    if (!s.is_ref()) return;
    auto it = c.by_name.find(s.param);
    if (it == c.by_name.end()) throw DesignError(where + ": unknown parameter '" + s.param + "'");
    if (used[it->second] && c.kind[it->second] != kind)
      throw DesignError("parameter '" + s.param + "' used as both " + to_string(c.kind[it->second]) + " and " +
                        to_string(kind));
    used[it->second] = true;
    c.kind[it->second] = kind;
  };
  if (!lay.barriers.empty() && lay.gaps.size() + 1 != lay.barriers.size())
    throw DesignError("layout: need one gap between each pair of neighbouring barriers");
  bind(lay.origin, HandleKind::origin, "origin");
  for (std::size_t i = 0; i < lay.barriers.size(); ++i) {
    bind(lay.barriers[i].strength, HandleKind::strength, "barrier " + std::to_string(i) + " V");
    bind(lay.barriers[i].width, HandleKind::width, "barrier " + std::to_string(i) + " L");
  }
  for (std::size_t i = 0; i < lay.gaps.size(); ++i) bind(lay.gaps[i], HandleKind::gap, "gap " + std::to_string(i));

  for (std::size_t i = 0; i < p.parameters.size(); ++i) {
    const auto& par = p.parameters[i];
    if (!used[i]) throw DesignError("parameter '" + par.name + "' is not used by the layout");
    c.bounds.push_back(par.bounds.value_or(default_bounds(c.kind[i])));
    const auto& b = c.bounds.back();
    if (!(b.lo <= b.hi)) throw DesignError("parameter '" + par.name + "': empty bounds");
    if (par.free) c.free_index.push_back(i);
  }

  // literals must be physical
  for (std::size_t i = 0; i < lay.barriers.size(); ++i) {
    const auto& b = lay.barriers[i];
    if (!b.width.is_ref() && !(b.width.value > 0.0))
      throw DesignError("barrier " + std::to_string(i) + ": width must be positive");
    if (!b.strength.is_ref() && !(b.strength.value > 0.0))
      throw DesignError("barrier " + std::to_string(i) + ": strength must be positive");
  }
  for (std::size_t i = 0; i < lay.gaps.size(); ++i)
    if (!lay.gaps[i].is_ref() && lay.gaps[i].value < 0.0)
      throw DesignError("gap " + std::to_string(i) + " is negative (barriers would overlap)");

  // resonators must be mirror-symmetric by construction, for every parameter value
  const std::size_t n = lay.barriers.size();
  for (const auto& t : p.targets) {
    if (!(t.energy > 0.0)) throw DesignError("target energy must be positive");
    if (t.resonators.empty()) throw DesignError("target at E = " + detail::fmt(t.energy) + " names no resonator");
    std::size_t next = t.resonators.front().first;
    for (const auto& r : t.resonators) {
      if (r.first > r.last || r.last >= n) throw DesignError("resonator range outside the layout");
      if (r.first != next) throw DesignError("target resonators must be consecutive and tile their span");
      next = r.last + 1;
      for (std::size_t a = r.first, b = r.last; a < b; ++a, --b) {
        const auto& x = lay.barriers[a];
        const auto& y = lay.barriers[b];
        if (!(x.strength == y.strength) || !(x.width == y.width))
          throw DesignError("resonator " + std::to_string(r.first) + ".." + std::to_string(r.last) + ": barriers " +
                            std::to_string(a) + " and " + std::to_string(b) + " must share strength and width");
      }
      for (std::size_t a = r.first, b = r.last; a + 1 < b; ++a, --b)
        if (!(lay.gaps[a] == lay.gaps[b - 1]))
          throw DesignError("resonator " + std::to_string(r.first) + ".." + std::to_string(r.last) + ": gaps " +
                            std::to_string(a) + " and " + std::to_string(b - 1) + " must agree");
    }
    if (t.kind == TargetKind::zero_current) {
      if (t.resonators.front().first != 0 || t.resonators.back().last + 1 != n)
        throw DesignError("zero-current target: resonators must tile the whole array");
      if (t.signs.size() != 2 * t.resonators.size() - 1)
        throw DesignError("zero-current target: need " + std::to_string(2 * t.resonators.size() - 1) +
                          " signs (resonators and gaps)");
      for (int s : t.signs)
        if (s != 1 && s != -1) throw DesignError("zero-current target: signs must be +1 or -1");
    }
  }

  if (!p.least_squares) {
    for (const auto& t : p.targets)
      if (t.kind == TargetKind::zero_current)
        throw DesignError("zero-current targets stack dependent residuals; enable least_squares");
    const std::size_t eq = count_conditions(p);
    if (c.free_index.size() != eq)
      throw DesignError(std::to_string(c.free_index.size()) + " free parameters for " + std::to_string(eq) +
                        " resonator conditions; enable least_squares to allow a mismatch");
  }
  return c;
}

inline std::vector<double> full_values(const DesignProblem& p, const Compiled& c, const std::vector<double>& free) {
  if (free.size() != c.free_index.size())
    throw DesignError("expected " + std::to_string(c.free_index.size()) + " free values, got " +
                      std::to_string(free.size()));
  std::vector<double> v;
  for (const auto& par : p.parameters) v.push_back(par.value);
  for (std::size_t j = 0; j < free.size(); ++j) {
    const std::size_t i = c.free_index[j];
    const auto& b = c.bounds[i];
    const double slack = 1e-12 * std::max(1.0, std::abs(b.hi - b.lo));
    if (!std::isfinite(free[j]) || free[j] < b.lo - slack || free[j] > b.hi + slack)
      throw DesignError("parameter '" + p.parameters[i].name + "' = " + detail::fmt(free[j]) +
                        " violates bound [" + detail::fmt(b.lo) + ", " + detail::fmt(b.hi) + "]");
    v[i] = free[j];
  }
  return v;
}

inline double slot_value(const Slot& s, const Compiled& c, const std::vector<double>& v) {
  return s.is_ref() ? v[c.by_name.at(s.param)] : s.value;
}

inline PwcPotential build(const DesignProblem& p, const Compiled& c, const std::vector<double>& v) {
  std::vector<double> V, L, G;
  for (const auto& b : p.layout.barriers) {
    V.push_back(slot_value(b.strength, c, v));
    L.push_back(slot_value(b.width, c, v));
    if (!(L.back() > 0.0)) throw DesignError("nonpositive width");
  }
  for (const auto& g : p.layout.gaps) {
    G.push_back(slot_value(g, c, v));
    if (G.back() < 0.0) throw DesignError("negative gap: barriers would overlap");
  }
  return PwcPotential::from_layout(slot_value(p.layout.origin, c, v), V, L, G);
}

inline std::vector<double> project(const Compiled& c, std::vector<double> free) {
  for (std::size_t j = 0; j < free.size(); ++j) {
    const auto& b = c.bounds[c.free_index[j]];
    free[j] = std::clamp(free[j], b.lo, b.hi);
  }
  return free;
}

// Subdomains of a zero-current target: resonator, gap, resonator, ...
inline std::vector<Subdomain> target_subdomains(const PwcPotential& pot, const Target& t) {
  std::vector<Subdomain> out;
  for (std::size_t l = 0; l < t.resonators.size(); ++l) {
    const auto sub = tight_subdomain(pot, t.resonators[l]);
    if (l > 0) out.push_back(Subdomain::from_interval(out.back().hi(), sub.lo(), SubdomainKind::gap));
    out.push_back(sub);
  }
  return out;
}

inline int target_lambda(const std::vector<Subdomain>& subs, const std::vector<int>& signs) {
  int lambda = 1;
  for (std::size_t n = 0; n < subs.size(); ++n)
    if (subs[n].kind != SubdomainKind::gap || subs[n].width() > tol::position) lambda *= signs[n];
  return lambda;
}

inline void append_residuals(const PwcPotential& pot, const Target& t, std::vector<double>& out) {
  const double k = t.k();
  if (t.kind == TargetKind::ptr) {
    for (const auto& r : t.resonators) {
      const auto z = total_matrix(pot.slice(r.first, r.last), k).z;
      out.push_back(z.real());
      out.push_back(z.imag());
    }
    return;
  }
  const auto field = make_field(pot, k, BoundaryCondition::sac, scattering(pot, k));
  const auto subs = target_subdomains(pot, t);
  for (std::size_t n = 0; n < subs.size(); ++n) {
    if (subs[n].kind == SubdomainKind::gap && subs[n].width() <= tol::position) {
      out.push_back(0.0);
      out.push_back(0.0);
      continue;
    }
    const auto c = field(subs[n].center);
    const double scale = k * std::abs(c.psi) + std::abs(c.dpsi);
    const complex v = scale == 0.0 ? complex{} : (t.signs[n] > 0 ? c.dpsi : k * c.psi) / scale;
    out.push_back(v.real());
    out.push_back(v.imag());
  }
  const double kx = k * pot.x_c();
  out.push_back(target_lambda(subs, t.signs) > 0 ? std::sin(kx) : std::cos(kx));
}

}  // namespace detail

/// Solved layout for the given free values (in declaration order of the free parameters).
inline PwcPotential build_potential(const DesignProblem& problem, const std::vector<double>& free) {
  const auto c = detail::compile(problem);
  return detail::build(problem, c, detail::full_values(problem, c, free));
}

inline std::vector<double> initial_free_values(const DesignProblem& problem) {
  const auto c = detail::compile(problem);
  std::vector<double> out;
  for (std::size_t i : c.free_index) out.push_back(problem.parameters[i].value);
  return out;
}

/// Stacked [Re z, Im z] for every ptr resonator, then for zero-current targets the
/// per-subdomain LP conditions at the subdomain centers and the boundary condition.
inline std::vector<double> residual_vector(const DesignProblem& problem, const std::vector<double>& free) {
  const auto c = detail::compile(problem);
  const auto pot = detail::build(problem, c, detail::full_values(problem, c, free));
  std::vector<double> out;
  for (const auto& t : problem.targets) detail::append_residuals(pot, t, out);
  return out;
}

struct TargetCheck {
  std::string label;
  TargetKind kind = TargetKind::ptr;
  double energy = 0.0;
  double one_minus_T = 0.0;  // of the carved resonator span
  std::string tag;           // classification of the relevant state
  bool passed = false;
  std::string detail;
};

struct DesignSolution {
  bool converged = false;
  PwcPotential potential;
  std::vector<std::string> names;     // free parameter names
  std::vector<double> free_values;
  std::vector<double> values;         // every parameter, declaration order
  std::vector<double> residuals;      // per condition |z| or |LP residual|
  double max_residual = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  std::size_t starts = 0;             // starts tried
  std::size_t start_index = 0;        // start that produced the result
  std::vector<TargetCheck> checks;
  std::string message;
};

namespace detail {

inline double max_abs(const std::vector<double>& r) {
  double m = 0.0;
  for (double x : r) m = std::max(m, std::abs(x));
  return m;
}

struct LmResult {
  std::vector<double> x;
  std::vector<double> r;
  std::size_t iterations = 0;
};

// Levenberg-Marquardt with Nielsen's damping update and projection onto the bounds.
template <class F>
LmResult levenberg_marquardt(F&& f, const Compiled& c, std::vector<double> x, std::size_t max_iter, double stop) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const std::size_t n = x.size();
  LmResult out;
  x = project(c, x);
  std::vector<double> r = f(x);
  const std::size_t m = r.size();
  auto cost = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return 0.5 * s;
  };
  double fx = cost(r);
  double mu = -1.0, nu = 2.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    out.iterations = it;
    if (max_abs(r) < stop || n == 0) break;
    MatrixXd J(m, n);
    for (std::size_t j = 0; j < n; ++j) {
      const double h = 1e-7 * std::max(std::abs(x[j]), 1.0);
      const auto& b = c.bounds[c.free_index[j]];
      auto xp = x, xm = x;
      xp[j] = std::min(x[j] + h, b.hi);
      xm[j] = std::max(x[j] - h, b.lo);
      const auto rp = f(xp), rm = f(xm);
      for (std::size_t i = 0; i < m; ++i) J(i, j) = (rp[i] - rm[i]) / (xp[j] - xm[j]);
    }
    VectorXd rv = Eigen::Map<const VectorXd>(r.data(), static_cast<Eigen::Index>(m));
    const MatrixXd A = J.transpose() * J;
    const VectorXd g = J.transpose() * rv;
    if (g.lpNorm<Eigen::Infinity>() < 1e-300) break;
    if (mu < 0.0) mu = 1e-3 * std::max(A.diagonal().maxCoeff(), 1e-12);
    bool stepped = false;
    while (!stepped) {
      MatrixXd Am = A;
      Am.diagonal().array() += mu;
      const VectorXd d = Am.ldlt().solve(-g);
      std::vector<double> xn(n);
      for (std::size_t j = 0; j < n; ++j) xn[j] = x[j] + d[static_cast<Eigen::Index>(j)];
      xn = project(c, xn);
      VectorXd de(n);
      double dn = 0.0, xnorm = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        de[static_cast<Eigen::Index>(j)] = xn[j] - x[j];
        dn = std::max(dn, std::abs(xn[j] - x[j]));
        xnorm = std::max(xnorm, std::abs(x[j]));
      }
      if (dn < 1e-15 * (1.0 + xnorm)) return {x, r, out.iterations};
      std::vector<double> rn;
      double fn = std::numeric_limits<double>::infinity();
      try {
        rn = f(xn);
        fn = cost(rn);
      } catch (const DesignError&) {
      } catch (const PotentialError&) {
      }
      const double pred = -de.dot(g) - 0.5 * de.dot(A * de);
      const double rho = pred > 0.0 ? (fx - fn) / pred : -1.0;
      if (rho > 0.0 && fn < fx) {
        x = xn;
        r = rn;
        fx = fn;
        mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
        nu = 2.0;
        stepped = true;
      } else {
        mu *= nu;
        nu *= 2.0;
        if (mu > 1e30) return {x, r, out.iterations};
      }
    }
  }
  return {x, r, out.iterations};
}

// Closed-form resonance snap: widths to the nearest above-barrier resonance of their
// barrier, gaps to the nearest half-wave spacing, both at the first target momentum.
inline std::vector<double> snapped_seed(const DesignProblem& p, const Compiled& c, std::vector<double> x) {
  if (p.targets.empty()) return x;
  const double k = p.targets.front().k();
  const auto v = full_values(p, c, project(c, x));
  for (std::size_t j = 0; j < x.size(); ++j) {
    const std::size_t i = c.free_index[j];
    if (c.kind[i] == HandleKind::width) {
      double strength = 0.0;
      for (const auto& b : p.layout.barriers)
        if (b.width.param == p.parameters[i].name) strength = slot_value(b.strength, c, v);
      const double k2 = k * k - 2.0 * strength;
      if (k2 > 0.0) {
        const double kap = std::sqrt(k2);
        x[j] = std::max(1.0, std::round(x[j] * kap / pi)) * pi / kap;
      }
    } else if (c.kind[i] == HandleKind::gap) {
      x[j] = std::max(1.0, std::round(x[j] * k / pi)) * pi / k;
    }
  }
  return project(c, x);
}

inline std::vector<double> condition_norms(const DesignProblem& p, const std::vector<double>& r) {
  std::vector<double> out;
  std::size_t i = 0;
  for (const auto& t : p.targets) {
    const std::size_t pairs = t.kind == TargetKind::ptr ? t.resonators.size() : 2 * t.resonators.size() - 1;
    for (std::size_t j = 0; j < pairs; ++j, i += 2) out.push_back(std::hypot(r[i], r[i + 1]));
    if (t.kind == TargetKind::zero_current) out.push_back(std::abs(r[i++]));
  }
  return out;
}

// Carved span of a target's resonators and the decomposition inside it.
inline std::pair<PwcPotential, Decomposition> carve(const PwcPotential& pot, const Target& t) {
  const std::size_t first = t.resonators.front().first;
  const auto sub = pot.slice(first, t.resonators.back().last);
  std::vector<BarrierRange> shifted;
  for (const auto& r : t.resonators) shifted.push_back({r.first - first, r.last - first});
  auto dec = make_decomposition(sub, shifted);
  return {sub, dec};
}

inline std::vector<TargetCheck> post_checks(const DesignProblem& p, const PwcPotential& pot) {
  std::vector<TargetCheck> out;
  for (const auto& t : p.targets) {
    TargetCheck ck{t.label, t.kind, t.energy, 0.0, "", false, ""};
    try {
      if (t.kind == TargetKind::ptr) {
        auto [sub, dec] = carve(pot, t);
        ck.one_minus_T = 1.0 - scattering(sub, t.k()).T();
        const auto cls = classify_state(solve_state(sub, t.k(), BoundaryCondition::aac), dec, p.tol_T);
        ck.tag = to_string(cls.tag);
        ck.passed = ck.one_minus_T < p.tol_T && cls.tag == StateTag::ptr;
      } else {
        const auto dec = make_decomposition(pot, t.resonators);
        ck.one_minus_T = 1.0 - scattering(pot, t.k()).T();
        const auto cls = classify_state(solve_state(pot, t.k(), BoundaryCondition::sac), dec, p.tol_T);
        ck.tag = to_string(cls.tag);
        std::vector<int> want;
        const auto subs = target_subdomains(pot, t);
        for (std::size_t n = 0; n < subs.size(); ++n)
          if (subs[n].kind != SubdomainKind::gap || subs[n].width() > tol::position) want.push_back(t.signs[n]);
        ck.passed = cls.tag == StateTag::lp_eigenstate && cls.signs == want;
        if (cls.tag == StateTag::lp_eigenstate && cls.signs != want) ck.detail = "LP signs differ from the target";
      }
    } catch (const std::exception& e) {
      ck.detail = e.what();
    }
    out.push_back(ck);
  }
  return out;
}

}  // namespace detail

/// Multi-start damped least squares. Starts: the given seeds, the closed-form snap
/// of the first seed, then `random_starts` perturbations (+-30 %) of the first seed.
/// The first start whose max residual is below tol::design and whose post-hoc PTR /
/// LP-eigenstate checks pass wins; otherwise the best start is returned unconverged.
inline DesignSolution solve(const DesignProblem& problem, std::vector<std::vector<double>> seeds = {}) {
  const auto c = detail::compile(problem);
  if (seeds.empty()) seeds.push_back(initial_free_values(problem));
  for (const auto& s : seeds)
    if (s.size() != c.free_index.size()) throw DesignError("seed has the wrong number of free values");

  std::vector<std::vector<double>> starts = seeds;
  starts.push_back(detail::snapped_seed(problem, c, seeds.front()));
  std::mt19937_64 rng(problem.seed);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (std::size_t s = 0; s < problem.random_starts; ++s) {
    auto x = seeds.front();
    for (auto& v : x) v += u(rng) * std::max(std::abs(v), 0.1);
    starts.push_back(detail::project(c, x));
  }

  auto f = [&](const std::vector<double>& x) {
    const auto pot = detail::build(problem, c, detail::full_values(problem, c, x));
    std::vector<double> r;
    for (const auto& t : problem.targets) detail::append_residuals(pot, t, r);
    return r;
  };

  DesignSolution best;
  for (const auto& par : problem.parameters) best.values.push_back(par.value);
  for (std::size_t i : c.free_index) best.names.push_back(problem.parameters[i].name);
  for (std::size_t s = 0; s < starts.size(); ++s) {
    ++best.starts;
    detail::LmResult lm;
    try {
      lm = detail::levenberg_marquardt(f, c, starts[s], problem.max_iterations, 1e-3 * tol::design);
    } catch (const DesignError&) {
      continue;
    } catch (const PotentialError&) {
      continue;
    }
    best.iterations += lm.iterations;
    const double m = detail::max_abs(lm.r);
    const bool small = m < tol::design;
    std::vector<TargetCheck> checks;
    PwcPotential pot = detail::build(problem, c, detail::full_values(problem, c, lm.x));
    if (small) checks = detail::post_checks(problem, pot);
    const bool ok = small && std::all_of(checks.begin(), checks.end(), [](const auto& k) { return k.passed; });
    if (ok || m < best.max_residual) {
      best.converged = ok;
      best.potential = pot;
      best.free_values = lm.x;
      best.values = detail::full_values(problem, c, lm.x);
      best.residuals = detail::condition_norms(problem, lm.r);
      best.max_residual = m;
      best.start_index = s;
      best.checks = checks;
    }
    if (ok) break;
  }
  if (best.converged) {
    best.message = "converged";
  } else if (best.free_values.empty() && !c.free_index.empty()) {
    best.message = "no start produced a feasible iterate";
  } else {
    best.message = "no convergence: best max residual " + detail::fmt(best.max_residual);
    if (best.max_residual < tol::design) best.message = "residuals converged but post-hoc checks failed";
  }
  return best;
}

// ---------------------------------------------------------------------------
// Independent verification with the Numerov oracle

struct VerifyCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  [[nodiscard]] bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
};

namespace detail {

// Oracle state is exact between nodes given (psi, psi') at a node: V is constant
// on every grid interval of a breakpoint-snapped grid.
class OracleField {
 public:
  OracleField(const PwcPotential& pot, double k, std::vector<OracleSample> nodes)
      : pot_(pot), k_(k), nodes_(std::move(nodes)) {}

  [[nodiscard]] FieldValue operator()(double x) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x, [](double v, const OracleSample& s) { return v < s.x; });
    if (it == nodes_.begin()) ++it;
    const auto& a = *(it - 1);
    const double mid = it == nodes_.end() ? a.x : 0.5 * (a.x + it->x);
    return propagate({a.psi, a.dpsi}, k_ * k_ - 2.0 * value_at(pot_, mid), x - a.x);
  }

 private:
  PwcPotential pot_;
  double k_;
  std::vector<OracleSample> nodes_;
};

inline void oracle_resonator_checks(const PwcPotential& sub, const Decomposition& dec, double k,
                                    const std::string& tag, VerifyReport& rep) {
  const auto res = oracle_scattering(sub, k, true);
  rep.checks.push_back({tag + ": oracle 1 - T", std::abs(1.0 - res.T), tol::oracle, std::abs(1.0 - res.T) < tol::oracle});
  const OracleField field(sub, k, res.state);
  for (const auto& r : dec.resonators) {
    const auto& d = r.domain;
    const std::size_t n = 2000;
    double max_rho = 0.0, drho = 0.0, qmax = 0.0;
    std::vector<complex> qs;
    for (std::size_t j = 0; j <= n; ++j) {
      const double off = d.half_width * static_cast<double>(j) / static_cast<double>(n);
      const auto l = field(d.center - off), rr = field(d.center + off);
      max_rho = std::max({max_rho, std::norm(l.psi), std::norm(rr.psi)});
      drho = std::max(drho, std::abs(std::norm(l.psi) - std::norm(rr.psi)));
      qs.push_back(l.psi * rr.dpsi + l.dpsi * rr.psi);
      qmax = std::max(qmax, std::abs(qs.back()));
    }
    double spread = 0.0;
    for (const auto& q : qs) spread = std::max(spread, std::abs(q - qs.front()));
    const std::string where = tag + ": resonator " + std::to_string(r.range.first) + ".." + std::to_string(r.range.last);
    const double dres = max_rho > 0.0 ? drho / max_rho : 0.0;
    const double qres = qmax > 0.0 ? spread / qmax : 0.0;
    rep.checks.push_back({where + " density symmetry", dres, 1e-5, dres < 1e-5});
    rep.checks.push_back({where + " q constancy", qres, 1e-5, qres < 1e-5});
  }
}

}  // namespace detail

/// Re-checks a solution with the oracle only: 1 - T over each ptr target's span,
/// density mirror symmetry and q constancy in each resonator, and for zero-current
/// targets r = r_tilde and the vanishing SAC current.
inline VerifyReport verify(const DesignProblem& problem, const PwcPotential& pot) {
  VerifyReport rep;
  for (std::size_t i = 0; i < problem.targets.size(); ++i) {
    const auto& t = problem.targets[i];
    const std::string tag = t.label.empty() ? "target " + std::to_string(i) : t.label;
    try {
      if (t.kind == TargetKind::ptr) {
        auto [sub, dec] = detail::carve(pot, t);
        detail::oracle_resonator_checks(sub, dec, t.k(), tag, rep);
      } else {
        const auto res = oracle_scattering(pot, t.k());
        const complex rt = oracle_r_tilde(pot, t.k());
        const double drr = std::abs(res.r - rt);
        const double j = std::abs(1.0 - std::norm(res.t + res.r));
        rep.checks.push_back({tag + ": oracle |r - r_tilde|", drr, tol::oracle, drr < tol::oracle});
        rep.checks.push_back({tag + ": oracle SAC current / k", j, tol::oracle, j < tol::oracle});
      }
    } catch (const std::exception& e) {
      rep.checks.push_back({tag + ": " + e.what(), 1.0, 0.0, false});
    }
  }
  return rep;
}

inline VerifyReport verify(const DesignProblem& problem, const DesignSolution& sol) {
  return verify(problem, sol.potential);
}

}  // namespace lpscatter
