#pragma once

// Stationary scattering states over a PWC potential, evaluated in closed form
// region by region, and the local-parity diagnostics built on them.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lpscatter/potential.hpp"
#include "lpscatter/tolerances.hpp"
#include "lpscatter/transfer.hpp"

namespace lpscatter {

class WavefieldError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// aac: unit wave incident from the left only. sac: unit waves from both sides.
enum class BoundaryCondition { sac, aac };

inline const char* to_string(BoundaryCondition bc) { return bc == BoundaryCondition::sac ? "sac" : "aac"; }

struct FieldValue {
  complex psi{};
  complex dpsi{};
};

/// Piecewise closed-form solution. Each constant-potential region carries the
/// value of (psi, psi') at an anchor point and is propagated from there.
class Wavefield {
 public:
  struct Region {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    double kappa_sq = 0.0;
    // up to two superposed components (sac = left incidence + right incidence)
    double anchor[2] = {0.0, 0.0};
    FieldValue at_anchor[2];
  };

  Wavefield() = default;
  Wavefield(std::vector<Region> regions, int components) : regions_(std::move(regions)), components_(components) {}

  [[nodiscard]] FieldValue operator()(double x) const {
    auto it = std::upper_bound(regions_.begin(), regions_.end(), x,
                               [](double v, const Region& r) { return v < r.lo; });
    if (it != regions_.begin()) --it;
    const Region& r = *it;
    FieldValue out;
    for (int c = 0; c < components_; ++c) {
      const auto [cc, ss] = region_propagator(r.kappa_sq, x - r.anchor[c]);
      const FieldValue& a = r.at_anchor[c];
      out.psi += cc * a.psi + ss * a.dpsi;
      out.dpsi += -r.kappa_sq * ss * a.psi + cc * a.dpsi;
    }
    return out;
  }

  [[nodiscard]] const std::vector<Region>& regions() const noexcept { return regions_; }

 private:
  std::vector<Region> regions_;
  int components_ = 0;
};

namespace detail {

inline FieldValue propagate(const FieldValue& v, double kappa_sq, double d) {
  const auto [c, s] = region_propagator(kappa_sq, d);
  return {c * v.psi + s * v.dpsi, -kappa_sq * s * v.psi + c * v.dpsi};
}

// Constant-potential regions covering the real line, zero-width gaps dropped.
inline std::vector<Wavefield::Region> partition(const PwcPotential& pot, double k) {
  std::vector<Wavefield::Region> out;
  const double inf = std::numeric_limits<double>::infinity();
  const double k2 = k * k;
  if (pot.empty()) {
    out.push_back({-inf, inf, k2, {0.0, 0.0}, {}});
    return out;
  }
  out.push_back({-inf, pot.x_a(), k2, {}, {}});
  for (std::size_t i = 0; i < pot.size(); ++i) {
    const auto& b = pot[i];
    if (i > 0 && b.lo() > out.back().hi) out.push_back({out.back().hi, b.lo(), k2, {}, {}});
    out.push_back({std::max(b.lo(), out.back().hi), b.hi(), k2 - 2.0 * b.strength, {}, {}});
  }
  out.push_back({pot.x_b(), inf, k2, {}, {}});
  return out;
}

// Unit-incidence solution written into component `c` of the regions.
// from_left: psi = t e^{ikx} on the right; otherwise psi = t e^{-ikx} on the left.
inline void fill_component(std::vector<Wavefield::Region>& regions, double k, complex t, bool from_left, int c) {
  const complex i{0.0, 1.0};
  const std::size_t n = regions.size();
  if (from_left) {
    double x = std::isfinite(regions.back().lo) ? regions.back().lo : 0.0;
    FieldValue v{t * std::exp(i * (k * x)), i * k * t * std::exp(i * (k * x))};
    for (std::size_t r = n; r-- > 0;) {
      auto& reg = regions[r];
      const double anchor = std::isfinite(reg.hi) ? reg.hi : x;
      reg.anchor[c] = anchor;
      reg.at_anchor[c] = v;
      if (std::isfinite(reg.lo)) v = propagate(v, reg.kappa_sq, reg.lo - anchor);
    }
  } else {
    double x = std::isfinite(regions.front().hi) ? regions.front().hi : 0.0;
    FieldValue v{t * std::exp(-i * (k * x)), -i * k * t * std::exp(-i * (k * x))};
    for (std::size_t r = 0; r < n; ++r) {
      auto& reg = regions[r];
      const double anchor = std::isfinite(reg.lo) ? reg.lo : x;
      reg.anchor[c] = anchor;
      reg.at_anchor[c] = v;
      if (std::isfinite(reg.hi)) v = propagate(v, reg.kappa_sq, reg.hi - anchor);
    }
  }
}

}  // namespace detail

/// Closed-form field for boundary condition `bc`.
inline Wavefield make_field(const PwcPotential& pot, double k, BoundaryCondition bc, const SMatrix& s) {
  auto regions = detail::partition(pot, k);
  detail::fill_component(regions, k, s.t, true, 0);
  if (bc == BoundaryCondition::aac) return Wavefield(std::move(regions), 1);
  detail::fill_component(regions, k, s.t, false, 1);
  return Wavefield(std::move(regions), 2);
}

struct Sample {
  double x = 0.0;
  complex psi{};
  complex dpsi{};
};

struct ScatterState {
  PwcPotential potential;
  double k = 1.0;
  BoundaryCondition bc = BoundaryCondition::aac;
  SMatrix s;
  Wavefield field;
  std::vector<Sample> samples;
  std::vector<double> phase;  // unwrapped arg psi on the samples

  [[nodiscard]] FieldValue at(double x) const { return field(x); }
  [[nodiscard]] double energy() const noexcept { return 0.5 * k * k; }

  /// Current from the asymptotic amplitudes.
  [[nodiscard]] double current() const noexcept {
    if (bc == BoundaryCondition::aac) return k * s.T();
    return k * (1.0 - std::norm(s.t + s.r));
  }

  /// max |Im(psi* psi') - j| over the samples.
  [[nodiscard]] double current_spread() const {
    const double j = current();
    double worst = 0.0;
    for (const auto& p : samples) worst = std::max(worst, std::abs(std::imag(std::conj(p.psi) * p.dpsi) - j));
    return worst;
  }
};

/// min positive barrier/gap width / 200, capped at 1e-3 of the support span.
inline double default_grid_step(const PwcPotential& pot, double k) {
  if (pot.empty()) return 2.0 * pi / k / 200.0;
  double w = std::numeric_limits<double>::infinity();
  for (const auto& b : pot.barriers()) w = std::min(w, b.width);
  for (double g : pot.gaps())
    if (g > tol::position) w = std::min(w, g);
  const double span = pot.x_b() - pot.x_a();
  return std::min(w / 200.0, 1e-3 * span);
}

inline double default_pad(const PwcPotential& pot, double k) {
  return std::max(2.0 * pi / k, 0.1 * (pot.x_b() - pot.x_a()));
}

inline ScatterState solve_state(const PwcPotential& pot, double k, BoundaryCondition bc, double grid_step = 0.0) {
  if (!(k > 0.0)) throw WavefieldError("solve_state: momentum must be positive");
  if (grid_step < 0.0) throw WavefieldError("solve_state: grid step must be positive");
  if (grid_step == 0.0) grid_step = default_grid_step(pot, k);
  ScatterState st;
  st.potential = pot;
  st.k = k;
  st.bc = bc;
  st.s = scattering(pot, k);
  st.field = make_field(pot, k, bc, st.s);

  const double pad = default_pad(pot, k);
  std::vector<double> nodes{pot.x_a() - pad};
  for (const auto& b : pot.barriers())
    for (double e : {b.lo(), b.hi()})
      if (e > nodes.back() + tol::position) nodes.push_back(e);
  nodes.push_back(pot.x_b() + pad);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double len = nodes[i + 1] - nodes[i];
    const auto m = static_cast<std::size_t>(std::max(1.0, std::ceil(len / grid_step)));
    for (std::size_t j = 0; j < m; ++j) {
      const double x = nodes[i] + len * static_cast<double>(j) / static_cast<double>(m);
      const auto v = st.field(x);
      st.samples.push_back({x, v.psi, v.dpsi});
    }
  }
  const auto v = st.field(nodes.back());
  st.samples.push_back({nodes.back(), v.psi, v.dpsi});

  double prev = 0.0;
  for (std::size_t i = 0; i < st.samples.size(); ++i) {
    double ph = std::arg(st.samples[i].psi);
    if (i > 0) ph += 2.0 * pi * std::round((prev - ph) / (2.0 * pi));
    st.phase.push_back(ph);
    prev = ph;
  }
  return st;
}

// ---------------------------------------------------------------------------
// LP operator and local symmetry tests

/// Field sampled on a grid that is symmetric about a subdomain center.
struct SampledField {
  std::vector<double> x;
  std::vector<complex> psi;
  std::vector<complex> dpsi;
};

/// Samples alpha + j h for |j h| <= half_width + margin.
inline SampledField sample_about(const ScatterState& st, const Subdomain& sub, double margin, double h) {
  if (!(h > 0.0)) throw WavefieldError("sample_about: step must be positive");
  SampledField f;
  const auto m = static_cast<long>(std::floor((sub.half_width + margin) / h));
  for (long j = -m; j <= m; ++j) {
    const double x = sub.center + static_cast<double>(j) * h;
    const auto v = st.at(x);
    f.x.push_back(x);
    f.psi.push_back(v.psi);
    f.dpsi.push_back(v.dpsi);
  }
  return f;
}

/// LP operator of sign s on `sub`: reflection x -> 2 alpha - x inside, multiplication by s outside.
/// The grid must be symmetric about the subdomain center.
inline SampledField apply_lp_transform(const SampledField& in, const Subdomain& sub, int s) {
  if (s != 1 && s != -1) throw WavefieldError("apply_lp_transform: sign must be +1 or -1");
  const std::size_t n = in.x.size();
  const double eps = 1e-9 * std::max(1.0, std::abs(sub.center) + sub.half_width);
  SampledField out = in;
  std::size_t a = n, b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(in.x[i] - sub.center) <= sub.half_width + eps) {
      a = std::min(a, i);
      b = std::max(b, i);
    } else {
      out.psi[i] = static_cast<double>(s) * in.psi[i];
      out.dpsi[i] = static_cast<double>(s) * in.dpsi[i];
    }
  }
  if (a == n) return out;
  for (std::size_t i = a; i <= b; ++i) {
    const std::size_t m = a + b - i;
    if (std::abs(in.x[i] + in.x[m] - 2.0 * sub.center) > eps)
      throw WavefieldError("apply_lp_transform: grid is not symmetric about the subdomain center");
    out.psi[i] = in.psi[m];
    out.dpsi[i] = -in.dpsi[m];
  }
  return out;
}

inline SampledField apply_lp_transform(const ScatterState& st, const Subdomain& sub, int s, double margin = 1.0) {
  const double h = default_grid_step(st.potential, st.k);
  return apply_lp_transform(sample_about(st, sub, margin, h), sub, s);
}

namespace detail {

// Symmetric probe offsets 0..half_width, analytic evaluation at alpha +- d.
struct MirrorProbes {
  std::vector<double> d;
  std::vector<FieldValue> left, right;  // at alpha - d and alpha + d
  double max_rho = 0.0;
};

inline MirrorProbes mirror_probes(const ScatterState& st, const Subdomain& sub) {
  MirrorProbes p;
  const double step = default_grid_step(st.potential, st.k);
  const auto n = static_cast<std::size_t>(
      std::clamp(std::ceil(sub.half_width / step), 1000.0, 200000.0));
  for (std::size_t j = 0; j <= n; ++j) {
    const double d = sub.half_width * static_cast<double>(j) / static_cast<double>(n);
    p.d.push_back(d);
    p.left.push_back(st.at(sub.center - d));
    p.right.push_back(st.at(sub.center + d));
    p.max_rho = std::max({p.max_rho, std::norm(p.left.back().psi), std::norm(p.right.back().psi)});
  }
  return p;
}

inline double wrap_angle(double a) { return std::remainder(a, 2.0 * pi); }

}  // namespace detail

/// max |rho(x) - rho(2 alpha - x)| / max rho over the subdomain.
inline double check_lp_density(const ScatterState& st, const Subdomain& sub) {
  const auto p = detail::mirror_probes(st, sub);
  if (p.max_rho == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t j = 0; j < p.d.size(); ++j)
    worst = std::max(worst, std::abs(std::norm(p.left[j].psi) - std::norm(p.right[j].psi)));
  return worst / p.max_rho;
}

struct PhaseCheck {
  double residual = 0.0;
  std::size_t skipped = 0;  // probes at near-nodes, phase undefined
};

/// max angular deviation from phi(x) = phi(2 alpha - x) + (1 - s) pi / 2 (mod 2 pi).
inline PhaseCheck check_lp_phase(const ScatterState& st, const Subdomain& sub, int s) {
  if (s != 1 && s != -1) throw WavefieldError("check_lp_phase: sign must be +1 or -1");
  const auto p = detail::mirror_probes(st, sub);
  PhaseCheck out;
  const double offset = (1 - s) * pi / 2.0;
  for (std::size_t j = 0; j < p.d.size(); ++j) {
    const double rl = std::norm(p.left[j].psi), rr = std::norm(p.right[j].psi);
    if (std::min(rl, rr) < tol::node * p.max_rho || p.max_rho == 0.0) {
      ++out.skipped;
      continue;
    }
    const double dev = detail::wrap_angle(std::arg(p.right[j].psi) - std::arg(p.left[j].psi) - offset);
    out.residual = std::max(out.residual, std::abs(dev));
  }
  return out;
}

/// Appendix mirror identity: max |u(x) - u(2 alpha - x)| / max u.
inline double mirror_property_check(const ScatterState& st, const Subdomain& sub) {
  const auto p = detail::mirror_probes(st, sub);
  if (p.max_rho == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t j = 0; j < p.d.size(); ++j)
    worst = std::max(worst, std::abs(std::abs(p.left[j].psi) - std::abs(p.right[j].psi)));
  return worst / std::sqrt(p.max_rho);
}

/// (max rho - min rho) / max rho over [lo, hi].
inline double density_variation(const ScatterState& st, double lo, double hi, std::size_t n = 1000) {
  double mx = 0.0, mn = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j <= n; ++j) {
    const double x = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n);
    const double r = std::norm(st.at(x).psi);
    mx = std::max(mx, r);
    mn = std::min(mn, r);
  }
  return mx > 0.0 ? (mx - mn) / mx : 0.0;
}

struct NonlocalInvariant {
  Subdomain subdomain;
  complex q{};               // mean over the probes
  double modulus = 0.0;
  double theta = 0.0;        // arg q
  double spread = 0.0;       // max |q(x) - q|
  double constancy_residual = 0.0;  // spread / max |q(x)|
  double scale = 0.0;        // k max rho, natural size of q in the subdomain
  std::optional<double> q_tilde;    // modulus invariant, zero-current states only
  double q_tilde_spread = 0.0;

  [[nodiscard]] bool vanishes(double tol = tol::invariant) const noexcept { return modulus <= tol * scale; }
  [[nodiscard]] bool constant(double tol = tol::invariant) const noexcept {
    return spread <= tol * std::max(modulus, 1e-300) || spread <= 1e-12 * scale;
  }
};

/// q(x) = psi(x) psi'(2a - x) + psi'(x) psi(2a - x) on the subdomain, without the
/// potential-symmetry precondition. Used to demonstrate non-constancy elsewhere.
inline NonlocalInvariant evaluate_nonlocal(const ScatterState& st, const Subdomain& sub) {
  const auto p = detail::mirror_probes(st, sub);
  NonlocalInvariant inv;
  inv.subdomain = sub;
  inv.scale = st.k * p.max_rho;
  std::vector<complex> qs;
  qs.reserve(2 * p.d.size());
  for (std::size_t j = 0; j < p.d.size(); ++j) {
    const auto& l = p.left[j];
    const auto& r = p.right[j];
    const complex q = l.psi * r.dpsi + l.dpsi * r.psi;  // symmetric in x <-> 2a - x
    qs.push_back(q);
  }
  complex mean{};
  double maxq = 0.0;
  for (const auto& q : qs) {
    mean += q;
    maxq = std::max(maxq, std::abs(q));
  }
  mean /= static_cast<double>(qs.size());
  for (const auto& q : qs) inv.spread = std::max(inv.spread, std::abs(q - mean));
  inv.q = mean;
  inv.modulus = std::abs(mean);
  inv.theta = std::arg(mean);
  inv.constancy_residual = maxq > 0.0 ? inv.spread / maxq : 0.0;

  if (std::abs(st.current()) < tol::current * st.k) {
    // zero current: psi = e^{i phi0} u with u real (and signed across nodes)
    std::size_t jmax = 0;
    for (std::size_t j = 0; j < p.d.size(); ++j)
      if (std::norm(p.right[j].psi) > std::norm(p.right[jmax].psi)) jmax = j;
    const complex rot = p.right[jmax].psi == complex{} ? complex{1.0, 0.0}
                                                       : std::conj(p.right[jmax].psi) / std::abs(p.right[jmax].psi);
    double mean_t = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t j = 0; j < p.d.size(); ++j) {
      const double ul = std::real(p.left[j].psi * rot), dul = std::real(p.left[j].dpsi * rot);
      const double ur = std::real(p.right[j].psi * rot), dur = std::real(p.right[j].dpsi * rot);
      const double qt = ul * dur + dul * ur;
      mean_t += qt;
      lo = std::min(lo, qt);
      hi = std::max(hi, qt);
    }
    inv.q_tilde = mean_t / static_cast<double>(p.d.size());
    inv.q_tilde_spread = hi - lo;
  }
  return inv;
}

/// Refuses subdomains on which V is not mirror-symmetric: q is only invariant there.
inline NonlocalInvariant nonlocal_invariant(const ScatterState& st, const Subdomain& sub) {
  if (!is_lp_symmetric(st.potential, sub))
    throw WavefieldError("nonlocal_invariant: potential is not mirror-symmetric on [" +
                         std::to_string(sub.lo()) + ", " + std::to_string(sub.hi()) + "]");
  return evaluate_nonlocal(st, sub);
}

// ---------------------------------------------------------------------------
// Classification

enum class StateTag { lp_eigenstate, zero_current_no_lp, ptr, total_reflection, generic };

inline const char* to_string(StateTag t) {
  switch (t) {
    case StateTag::lp_eigenstate: return "LP_EIGENSTATE";
    case StateTag::zero_current_no_lp: return "ZERO_CURRENT_NO_LP";
    case StateTag::ptr: return "PTR";
    case StateTag::total_reflection: return "TOTAL_REFLECTION";
    case StateTag::generic: return "GENERIC";
  }
  return "?";
}

struct SubdomainReport {
  Subdomain subdomain;
  NonlocalInvariant invariant;
  double density_residual = 0.0;
  double phase_consistency = 0.0;  // max |cos(theta - phi(x) - phi(2a - x))|
  int sign = 0;                    // LP eigenvalue when determined
};

struct StateClass {
  StateTag tag = StateTag::generic;
  std::vector<int> signs;  // per subdomain, spatial order (lp_eigenstate only)
  int lambda = 0;
  double current = 0.0;
  double T = 0.0;
  double min_rho = 0.0;  // relative to max rho over the support
  std::vector<SubdomainReport> subdomains;
  std::vector<std::string> diagnostics;
};

namespace detail {

inline double min_relative_density(const ScatterState& st) {
  double mx = 0.0, mn = std::numeric_limits<double>::infinity();
  const double lo = st.potential.x_a(), hi = st.potential.x_b();
  for (const auto& p : st.samples) {
    if (p.x < lo || p.x > hi) continue;
    const double r = std::norm(p.psi);
    mx = std::max(mx, r);
    mn = std::min(mn, r);
  }
  if (mx == 0.0) return 0.0;
  return std::isfinite(mn) ? mn / mx : 1.0;
}

// max |cos(theta - phi(x) - phi(2a - x))|, skipping near-nodes
inline double phase_consistency(const ScatterState& st, const Subdomain& sub, double theta) {
  const auto p = mirror_probes(st, sub);
  double worst = 0.0;
  for (std::size_t j = 0; j < p.d.size(); ++j) {
    if (std::min(std::norm(p.left[j].psi), std::norm(p.right[j].psi)) < tol::node * p.max_rho) continue;
    worst = std::max(worst, std::abs(std::cos(theta - std::arg(p.left[j].psi) - std::arg(p.right[j].psi))));
  }
  return worst;
}

}  // namespace detail

inline StateClass classify_state(const ScatterState& st, const Decomposition& dec,
                                 double tol_T = tol::transmission) {
  StateClass out;
  out.current = st.current();
  out.T = st.s.T();
  out.min_rho = detail::min_relative_density(st);
  const double spread = st.current_spread();
  if (spread > tol::current * st.k)
    out.diagnostics.push_back("current not spatially constant: spread " + std::to_string(spread / st.k) + " k");

  if (std::abs(out.current) < tol::current * st.k) {
    bool all_zero = true;
    for (const auto& sub : dec.subdomains()) {
      SubdomainReport rep{sub, evaluate_nonlocal(st, sub), 0.0, 0.0, 0};
      all_zero = all_zero && rep.invariant.vanishes();
      out.subdomains.push_back(rep);
    }
    if (all_zero) {
      out.tag = StateTag::lp_eigenstate;
      out.lambda = 1;
      for (auto& rep : out.subdomains) {
        const auto c = st.at(rep.subdomain.center);
        // q = 2 psi(a) psi'(a) = 0: one of the two vanishes
        rep.sign = std::abs(c.dpsi) < st.k * std::abs(c.psi) ? 1 : -1;
        out.signs.push_back(rep.sign);
        out.lambda *= rep.sign;
      }
      const double xc = st.potential.x_c();
      const double bdev = std::abs(std::exp(complex{0.0, 2.0 * st.k * xc}) - static_cast<double>(out.lambda));
      if (bdev > tol::oracle)
        out.diagnostics.push_back("LP eigenstate but |e^{2ik x_c} - lambda| = " + std::to_string(bdev));
      return out;
    }
    if (st.bc == BoundaryCondition::aac) {
      out.tag = StateTag::total_reflection;
      return out;
    }
    out.tag = StateTag::zero_current_no_lp;
    for (const auto& rep : out.subdomains) {
      const auto& inv = rep.invariant;
      if (inv.q_tilde && std::abs(std::abs(*inv.q_tilde) - inv.modulus) > 1e-6 * std::max(inv.scale, 1e-300))
        out.diagnostics.push_back("q_tilde != +-|q| on [" + std::to_string(rep.subdomain.lo()) + ", " +
                                  std::to_string(rep.subdomain.hi()) + "]");
    }
    return out;
  }

  bool symmetric = true;
  for (const auto& r : dec.resonators) {
    SubdomainReport rep{r.domain, evaluate_nonlocal(st, r.domain), check_lp_density(st, r.domain), 0.0, 0};
    rep.phase_consistency = detail::phase_consistency(st, r.domain, rep.invariant.theta);
    symmetric = symmetric && rep.density_residual < tol::invariant;
    out.subdomains.push_back(rep);
  }
  const bool nodeless = out.min_rho > tol::node;
  if (symmetric && nodeless) {
    out.tag = StateTag::ptr;
    if (1.0 - out.T >= tol_T)
      out.diagnostics.push_back("density LP-symmetric on every resonator but 1 - T = " + std::to_string(1.0 - out.T));
    for (const auto& rep : out.subdomains)
      if (rep.phase_consistency > 1e-6)
        out.diagnostics.push_back("phase consistency violated: max |cos| = " + std::to_string(rep.phase_consistency));
    return out;
  }
  if (out.T < tol_T) {
    out.tag = StateTag::total_reflection;
    return out;
  }
  out.tag = StateTag::generic;
  if (1.0 - out.T < tol_T)
    out.diagnostics.push_back("1 - T below tolerance but density not LP-symmetric in decomposition " +
                              std::to_string(dec.index));
  return out;
}

// ---------------------------------------------------------------------------
// Appendix walk

struct ReducibilityResult {
  Decomposition decomposition;  // irreducible units found by the walk
  bool contradiction = false;
  std::vector<std::string> diagnostics;
};

/// Walks the array from x_a. At each step the smallest symmetric barrier range that
/// is perfectly transmitting on its own and carries an LP-symmetric density is
/// accepted; otherwise the range is enlarged from the same lower boundary.
inline ReducibilityResult reducibility_analysis(const ScatterState& st, const PwcPotential& pot,
                                                double tol_T = tol::transmission) {
  ReducibilityResult out;
  if (1.0 - st.s.T() >= tol_T)
    out.diagnostics.push_back("state is not a PTR: 1 - T = " + std::to_string(1.0 - st.s.T()));
  const auto ends = symmetric_ranges(pot);
  std::vector<BarrierRange> units;
  std::size_t i = 0;
  while (i < pot.size()) {
    bool accepted = false;
    for (std::size_t j : ends[i]) {
      const auto sub = tight_subdomain(pot, {i, j});
      if (scattering(pot.slice(i, j), st.k).R() >= tol_T) continue;
      if (check_lp_density(st, sub) >= tol::invariant) continue;
      units.push_back({i, j});
      i = j + 1;
      accepted = true;
      break;
    }
    if (!accepted) {
      out.contradiction = true;
      out.diagnostics.push_back("no perfectly transmitting symmetric unit starts at barrier " + std::to_string(i));
      break;
    }
  }
  if (!out.contradiction) out.decomposition = make_decomposition(pot, units);
  return out;
}

/// Resonator l of `reference` is reducible when it is tiled by at least two units of `walk`.
inline std::vector<bool> reducible_resonators(const Decomposition& reference, const Decomposition& walk) {
  std::vector<bool> out;
  for (const auto& r : reference.resonators) {
    std::size_t inside = 0;
    bool tiled = false;
    std::size_t next = r.range.first;
    for (const auto& u : walk.resonators) {
      if (u.range.first != next || u.range.last > r.range.last) continue;
      ++inside;
      next = u.range.last + 1;
      if (next == r.range.last + 1) {
        tiled = true;
        break;
      }
    }
    out.push_back(tiled && inside >= 2);
  }
  return out;
}

}  // namespace lpscatter
