#pragma once

// Direct integration of psi'' = 2 (V - E) psi for arbitrary bounded potentials
// of compact support. The integrator shares nothing with the transfer-matrix
// engine beyond the potential description; cross_validate compares the two.

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lpscatter/io.hpp"
#include "lpscatter/potential.hpp"
#include "lpscatter/tolerances.hpp"
#include "lpscatter/transfer.hpp"

namespace lpscatter {

class OracleError : public std::runtime_error {
 public:
  OracleError(const std::string& what, double required_step = 0.0)
      : std::runtime_error(what), required_step(required_step) {}
  double required_step;
};

/// Potential sampled on a grid snapped to its breakpoints: the support is split
/// into pieces, each carrying its own smooth V and a uniform step.
class SampledPotential {
 public:
  struct Piece {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t steps = 1;
    std::function<double(double)> V;
    [[nodiscard]] double step() const { return (hi - lo) / static_cast<double>(steps); }
  };

  SampledPotential() = default;
  SampledPotential(std::vector<Piece> pieces, double pad) : pieces_(std::move(pieces)), pad_(pad) {
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      if (!(pieces_[i].hi > pieces_[i].lo) || pieces_[i].steps == 0)
        throw OracleError("sampled potential: empty piece");
      if (i > 0 && pieces_[i].lo != pieces_[i - 1].hi) throw OracleError("sampled potential: pieces must be contiguous");
    }
  }

  /// Rectangular barriers and zero gaps, each piece at most `h` wide per step, and
  /// zero-potential margins of width `pad` on both sides.
  static SampledPotential from_pwc(const PwcPotential& pot, double h, double pad = 1.0) {
    if (!(h > 0.0) || !(pad > 0.0)) throw OracleError("sampled potential: step and pad must be positive");
    std::vector<Piece> ps;
    auto add = [&](double lo, double hi, double v) {
      if (hi - lo <= 1e-12 * std::max(1.0, std::abs(lo))) return;
      if (!ps.empty()) lo = ps.back().hi;
      const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil((hi - lo) / h)));
      ps.push_back({lo, hi, n, [v](double) { return v; }});
    };
    const double a = pot.x_a(), b = pot.x_b();
    add(a - pad, a, 0.0);
    for (std::size_t i = 0; i < pot.size(); ++i) {
      if (i > 0) add(pot[i - 1].hi(), pot[i].lo(), 0.0);
      add(pot[i].lo(), pot[i].hi(), pot[i].strength);
    }
    add(b, b + pad, 0.0);
    return SampledPotential(std::move(ps), pad);
  }

  [[nodiscard]] const std::vector<Piece>& pieces() const noexcept { return pieces_; }
  [[nodiscard]] double pad() const noexcept { return pad_; }
  [[nodiscard]] double lo() const { return pieces_.front().lo; }
  [[nodiscard]] double hi() const { return pieces_.back().hi; }
  [[nodiscard]] double max_step() const {
    double h = 0.0;
    for (const auto& p : pieces_) h = std::max(h, p.step());
    return h;
  }
  /// max |V| over the nodes
  [[nodiscard]] double max_abs_v() const {
    double v = 0.0;
    for (const auto& p : pieces_)
      for (std::size_t j = 0; j <= p.steps; ++j) v = std::max(v, std::abs(p.V(p.lo + p.step() * static_cast<double>(j))));
    return v;
  }
  /// Same pieces with every step halved.
  [[nodiscard]] SampledPotential refined() const {
    auto ps = pieces_;
    for (auto& p : ps) p.steps *= 2;
    return SampledPotential(std::move(ps), pad_);
  }
  /// Mirror image about x = 0.
  [[nodiscard]] SampledPotential mirrored() const {
    std::vector<Piece> ps;
    for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it) {
      auto f = it->V;
      ps.push_back({-it->hi, -it->lo, it->steps, [f](double x) { return f(-x); }});
    }
    return SampledPotential(std::move(ps), pad_);
  }

 private:
  std::vector<Piece> pieces_;
  double pad_ = 1.0;
};

/// Smooth test potentials.
/// gaussian: height exp(-(x - center)^2 / (2 sigma^2)) for |x - center| <= cutoff sigma.
/// bump: height exp(1 - 1 / (1 - u^2)), u = (x - center) / half_width, |u| < 1.
struct AnalyticProfile {
  std::string name = "gaussian";
  double height = 1.0;
  double sigma = 1.0;      // gaussian width, or bump half-width
  double center = 0.0;
  double cutoff = 8.0;     // gaussian only, in units of sigma

  [[nodiscard]] double half_support() const { return name == "bump" ? sigma : cutoff * sigma; }

  [[nodiscard]] double operator()(double x) const {
    const double d = x - center;
    if (std::abs(d) > half_support()) return 0.0;
    if (name == "bump") {
      const double u2 = d * d / (sigma * sigma);
      return u2 >= 1.0 ? 0.0 : height * std::exp(1.0 - 1.0 / (1.0 - u2));
    }
    return height * std::exp(-0.5 * d * d / (sigma * sigma));
  }

  [[nodiscard]] SampledPotential sample(double h, double pad = 1.0) const {
    if (name != "gaussian" && name != "bump") throw OracleError("unknown profile '" + name + "'");
    if (!(sigma > 0.0) || !(h > 0.0)) throw OracleError("profile: sigma and step must be positive");
    const double a = center - half_support(), b = center + half_support();
    auto count = [&](double len) { return static_cast<std::size_t>(std::max(1.0, std::ceil(len / h))); };
    const AnalyticProfile self = *this;
    std::vector<SampledPotential::Piece> ps{
        {a - pad, a, count(pad), [](double) { return 0.0; }},
        {a, b, count(b - a), [self](double x) { return self(x); }},
        {b, b + pad, count(pad), [](double) { return 0.0; }}};
    return SampledPotential(std::move(ps), pad);
  }
};

/// Profile config: one line `profile name=<gaussian|bump> height=.. sigma=.. center=.. [cutoff=..] [step=..]`.
struct ProfileConfig {
  AnalyticProfile profile;
  double step = 0.01;
};

inline ProfileConfig parse_profile(std::istream& in, const std::string& name = "<input>") {
  ProfileConfig cfg;
  bool seen = false;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::istringstream ls(detail::strip_comment(raw));
    std::string keyword;
    if (!(ls >> keyword)) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    if (keyword != "profile") throw InputError(where + ": unknown record '" + keyword + "'");
    if (seen) throw InputError(where + ": only one profile record is allowed");
    seen = true;
    for (const auto& [key, value] : detail::key_values(ls, where)) {
      if (key == "name") {
        if (value != "gaussian" && value != "bump") throw InputError(where + ": unknown profile '" + value + "'");
        cfg.profile.name = value;
        continue;
      }
      const double v = detail::parse_number(value, where);
      if (key == "height") cfg.profile.height = v;
      else if (key == "sigma") cfg.profile.sigma = v;
      else if (key == "center") cfg.profile.center = v;
      else if (key == "cutoff") cfg.profile.cutoff = v;
      else if (key == "step") cfg.step = v;
      else throw InputError(where + ": unknown key '" + key + "'");
    }
    if (!(cfg.profile.sigma > 0.0) || !(cfg.step > 0.0) || !(cfg.profile.cutoff > 0.0))
      throw InputError(where + ": sigma, cutoff and step must be positive");
  }
  if (!seen) throw InputError(name + ": no profile record");
  return cfg;
}

struct OracleSample {
  double x = 0.0;
  complex psi{};
  complex dpsi{};
};

struct OracleResult {
  complex r{};
  complex t{};
  double T = 0.0;
  double R = 0.0;
  double error_r = 0.0;  // Richardson estimate |x_{h/2} - x_h| / 15
  double error_t = 0.0;
  double error_T = 0.0;
  double step = 0.0;     // coarse step h
  std::vector<OracleSample> state;  // h/2 run, normalised to unit incidence from the left
};

namespace detail {

struct RawRun {
  complex a{}, b{};  // left amplitudes of the unnormalised solution
  std::vector<OracleSample> nodes;
};

// psi(x0 - h) = c psi(x0) - s psi'(x0) for constant f
inline std::pair<double, double> cos_sin_step(double f, double h) {
  const double a = f * h * h;
  if (std::abs(a) < 1e-8) return {1.0 + a / 2.0 + a * a / 24.0, h * (1.0 + a / 6.0 + a * a / 120.0)};
  if (f < 0.0) {
    const double q = std::sqrt(-f);
    return {std::cos(q * h), std::sin(q * h) / q};
  }
  const double q = std::sqrt(f);
  return {std::cosh(q * h), std::sinh(q * h) / q};
}

// Numerov on psi'' = f psi, f = 2 V - k^2, from psi = e^{ikx} at the right end backward.
inline RawRun numerov_backward(const SampledPotential& sp, double k, bool keep) {
  const complex I{0.0, 1.0};
  const auto& ps = sp.pieces();
  const double xr = sp.hi();
  complex psi = std::exp(I * (k * xr));
  complex dpsi = I * k * psi;
  RawRun run;
  if (keep) run.nodes.push_back({xr, psi, dpsi});
  const double k2 = k * k;
  bool first = true;
  for (auto it = ps.rbegin(); it != ps.rend(); ++it) {
    const auto& p = *it;
    const double h = p.step(), h2 = h * h;
    const std::size_t n = p.steps;
    auto f = [&](std::size_t j) { return 2.0 * p.V(p.hi - h * static_cast<double>(j)) - k2; };
    std::vector<double> fs(n + 2);
    for (std::size_t j = 0; j < n + 2; ++j) fs[j] = f(j);
    std::vector<complex> y(n + 2);
    y[0] = psi;
    if (first) {
      y[1] = std::exp(I * (k * (p.hi - h)));  // exact plane wave in the right margin
    } else {
      // Taylor start inside the new piece: constant-f part exactly, f' corrections to h^5
      const double d = 1e-3;
      const double x0 = p.hi;
      auto fx = [&](double x) { return 2.0 * p.V(x) - k2; };
      const double f0 = fs[0];
      const double f1 = (fx(x0 + d) - fx(x0 - d)) / (2 * d);
      const double f2 = (fx(x0 + d) - 2 * f0 + fx(x0 - d)) / (d * d);
      const double f3 = (fx(x0 + 2 * d) - 2 * fx(x0 + d) + 2 * fx(x0 - d) - fx(x0 - 2 * d)) / (2 * d * d * d);
      const auto [c, s] = cos_sin_step(f0, h);
      y[1] = c * psi - s * dpsi - h * h2 / 6.0 * f1 * psi + h2 * h2 / 24.0 * (f2 * psi + 2.0 * f1 * dpsi) -
             h2 * h2 * h / 120.0 * (f3 * psi + 3.0 * f2 * dpsi + 4.0 * f0 * f1 * psi);
    }
    for (std::size_t j = 1; j <= n; ++j)
      y[j + 1] = (2.0 * (1.0 + 5.0 * h2 * fs[j] / 12.0) * y[j] - (1.0 - h2 * fs[j - 1] / 12.0) * y[j - 1]) /
                 (1.0 - h2 * fs[j + 1] / 12.0);
    auto deriv = [&](std::size_t j) {
      return ((1.0 - h2 * fs[j - 1] / 6.0) * y[j - 1] - (1.0 - h2 * fs[j + 1] / 6.0) * y[j + 1]) / (2.0 * h);
    };
    if (keep)
      for (std::size_t j = 1; j < n; ++j) run.nodes.push_back({p.hi - h * static_cast<double>(j), y[j], deriv(j)});
    psi = y[n];
    dpsi = deriv(n);
    if (keep) run.nodes.push_back({p.lo, psi, dpsi});
    first = false;
  }
  const double xl = sp.lo();
  run.a = 0.5 * (psi + dpsi / (I * k)) * std::exp(-I * (k * xl));
  run.b = 0.5 * (psi - dpsi / (I * k)) * std::exp(I * (k * xl));
  std::reverse(run.nodes.begin(), run.nodes.end());
  return run;
}

}  // namespace detail

/// Scattering amplitudes by Numerov integration at steps h and h/2 with Richardson
/// extrapolation. Refuses grids with (local wavenumber) * h >= 0.1.
inline OracleResult integrate(const SampledPotential& sp, double k, bool keep_state = false) {
  if (!(k > 0.0)) throw OracleError("oracle: momentum must be positive");
  const double h = sp.max_step();
  const double local = std::max(k, std::sqrt(std::abs(2.0 * sp.max_abs_v() - k * k)));
  if (local * h >= 0.1)
    throw OracleError("oracle: step " + std::to_string(h) + " too coarse, need h < " + std::to_string(0.1 / local),
                      0.1 / local);
  const auto coarse = detail::numerov_backward(sp, k, false);
  const auto fine = detail::numerov_backward(sp.refined(), k, keep_state);
  const complex tc = 1.0 / coarse.a, rc = coarse.b / coarse.a;
  const complex tf = 1.0 / fine.a, rf = fine.b / fine.a;
  OracleResult out;
  out.t = tf + (tf - tc) / 15.0;
  out.r = rf + (rf - rc) / 15.0;
  out.T = std::norm(out.t);
  out.R = std::norm(out.r);
  out.error_t = std::abs(tf - tc) / 15.0;
  out.error_r = std::abs(rf - rc) / 15.0;
  out.error_T = std::abs(std::norm(tf) - std::norm(tc)) / 15.0;
  out.step = h;
  if (keep_state) {
    const complex norm = 1.0 / fine.a;
    out.state.reserve(fine.nodes.size());
    for (const auto& n : fine.nodes) out.state.push_back({n.x, n.psi * norm, n.dpsi * norm});
  }
  return out;
}

/// Single-step (no extrapolation) amplitudes, for convergence studies.
inline std::pair<complex, complex> numerov_amplitudes(const SampledPotential& sp, double k) {
  const auto run = detail::numerov_backward(sp, k, false);
  return {run.b / run.a, 1.0 / run.a};  // (r, t)
}

/// Step meeting the refusal bound with margin `ratio` of the local wavelength scale.
inline double oracle_step(const PwcPotential& pot, double k, double ratio = 0.05) {
  double vmax = 0.0;
  for (const auto& b : pot.barriers()) vmax = std::max(vmax, std::abs(b.strength));
  return ratio / std::max(k, std::sqrt(std::abs(2.0 * vmax - k * k)));
}

inline OracleResult oracle_scattering(const PwcPotential& pot, double k, bool keep_state = false) {
  return integrate(SampledPotential::from_pwc(pot, oracle_step(pot, k)), k, keep_state);
}

/// Reflection amplitude for incidence from the right.
inline complex oracle_r_tilde(const PwcPotential& pot, double k) {
  return integrate(SampledPotential::from_pwc(pot, oracle_step(pot, k)).mirrored(), k).r;
}

/// max over the grid of |T_transfer - T_oracle| / max(T_oracle, 1e-6). The
/// two-potential form integrates `actual` and compares against the transfer
/// result for `model`, which exposes a mis-specified geometry.
inline double cross_validate(const PwcPotential& model, const PwcPotential& actual, const std::vector<double>& energies) {
  double worst = 0.0;
  for (double e : energies) {
    if (!(e > 0.0)) throw OracleError("cross_validate: energies must be positive");
    const double k = std::sqrt(2.0 * e);
    const double to = oracle_scattering(actual, k).T;
    worst = std::max(worst, std::abs(scattering(model, k).T() - to) / std::max(to, 1e-6));
  }
  return worst;
}

inline double cross_validate(const PwcPotential& pot, const std::vector<double>& energies) {
  return cross_validate(pot, pot, energies);
}

}  // namespace lpscatter
