#pragma once

// Transfer matrices in the global plane-wave basis e^{+ikx}, e^{-ikx}.
//
// A matrix maps the amplitudes (A, B) of psi = A e^{ikx} + B e^{-ikx} on the
// left of a scatterer to those on its right. Time-reversal symmetry gives the
// form [[w, z], [z*, w*]] with |w|^2 - |z|^2 = 1, and for incidence from the
// left t = 1 / w*, r = -z* / w*.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lpscatter/potential.hpp"
#include "lpscatter/tolerances.hpp"

namespace lpscatter {

class TransferError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TransferMatrix {
  complex w{1.0, 0.0};
  complex z{0.0, 0.0};

  static TransferMatrix identity() noexcept { return {}; }

  /// Composition: (*this) applied after `rhs`.
  TransferMatrix operator*(const TransferMatrix& rhs) const noexcept {
    return {w * rhs.w + z * std::conj(rhs.z), w * rhs.z + z * std::conj(rhs.w)};
  }

  [[nodiscard]] double unimodularity_defect() const noexcept {
    return std::norm(w) - std::norm(z) - 1.0;
  }
};

/// Real propagator of (psi, psi') across a region of length d with constant
/// kappa^2 = k^2 - 2V: psi(x0 + d) = c psi + s psi',  psi'(x0 + d) = -kappa^2 s psi + c psi'.
struct RegionPropagator {
  double c = 1.0;
  double s = 0.0;
};

inline RegionPropagator region_propagator(double kappa_sq, double d) noexcept {
  const double arg_sq = kappa_sq * d * d;
  if (std::abs(arg_sq) < 1e-12) {
    // |kappa d| < 1e-6: removable singularity of sin(kappa d) / kappa
    const double a2 = arg_sq;
    return {1.0 - a2 / 2.0 + a2 * a2 / 24.0, d * (1.0 - a2 / 6.0 + a2 * a2 / 120.0)};
  }
  if (kappa_sq > 0.0) {
    const double kap = std::sqrt(kappa_sq);
    return {std::cos(kap * d), std::sin(kap * d) / kap};
  }
  const double q = std::sqrt(-kappa_sq);
  return {std::cosh(q * d), std::sinh(q * d) / q};
}

/// Exact single-barrier transfer matrix. The barrier position enters through the
/// phase e^{-2ik alpha} of z.
inline TransferMatrix barrier_matrix(const Barrier& b, double k) {
  if (!(k > 0.0)) throw TransferError("barrier_matrix: momentum must be positive");
  const double kappa_sq = k * k - 2.0 * b.strength;
  const auto [c, s] = region_propagator(kappa_sq, b.width);
  const complex i{0.0, 1.0};
  const complex w = std::exp(-i * (k * b.width)) * (c + i * (s * (k * k + kappa_sq) / (2.0 * k)));
  const complex z = -i * std::exp(-2.0 * i * (k * b.center)) * (s * b.strength / k);
  return {w, z};
}

/// Ordered product M_N ... M_1 over the barriers of the array.
inline TransferMatrix total_matrix(const PwcPotential& pot, double k) {
  if (!(k > 0.0)) throw TransferError("total_matrix: momentum must be positive");
  TransferMatrix m;
  for (const auto& b : pot.barriers()) m = barrier_matrix(b, k) * m;
  return m;
}

/// Scattering amplitudes r, t (incidence from the left) and r_tilde (from the right).
struct SMatrix {
  complex r{0.0, 0.0};
  complex t{1.0, 0.0};
  complex r_tilde{0.0, 0.0};

  [[nodiscard]] double T() const noexcept { return std::norm(t); }
  [[nodiscard]] double R() const noexcept { return std::norm(r); }
  /// Overall phase zeta = arg t.
  [[nodiscard]] double overall_phase() const noexcept { return std::arg(t); }
  /// Relative phase eta = arg r - arg t, wrapped to (-pi, pi]; zero when r = 0.
  [[nodiscard]] double relative_phase() const noexcept {
    if (std::abs(r) == 0.0) return 0.0;
    return std::arg(r / t);
  }
};

inline SMatrix s_matrix(const TransferMatrix& m) {
  if (!(std::abs(m.w) > 0.0))
    throw std::logic_error("s_matrix: |w| = 0 contradicts unimodularity");
  const complex wc = std::conj(m.w);
  return {-std::conj(m.z) / wc, 1.0 / wc, m.z / wc};
}

inline SMatrix scattering(const PwcPotential& pot, double k) { return s_matrix(total_matrix(pot, k)); }

inline double momentum(double energy) { return std::sqrt(2.0 * energy); }

struct SpectrumPoint {
  double energy = 0.0;
  double T = 0.0;
  double R = 0.0;
  complex r{};
  complex t{};
};

inline std::vector<SpectrumPoint> transmission_spectrum(const PwcPotential& pot,
                                                        const std::vector<double>& energies) {
  std::vector<SpectrumPoint> out;
  out.reserve(energies.size());
  for (double e : energies) {
    if (!(e > 0.0)) throw TransferError("transmission_spectrum: energies must be positive");
    const auto s = scattering(pot, momentum(e));
    out.push_back({e, s.T(), s.R(), s.r, s.t});
  }
  return out;
}

namespace detail {

// Golden-section minimisation on [a, b].
template <class F>
double golden_minimize(F&& f, double a, double b, double tol) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 400 && (b - a) > tol; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

}  // namespace detail

struct UnitTransmissionResult {
  std::vector<double> energies;
  /// A sampled local minimum of |r|^2 stayed above 0.5: a narrow resonance may be unresolved.
  bool resolution_warning = false;
};

/// Energies in [e_lo, e_hi] with 1 - T < tol_T. A uniform scan of |r|^2 brackets
/// each local minimum, which is then refined by golden-section search on |r|.
inline UnitTransmissionResult find_unit_transmission(const PwcPotential& pot, double e_lo, double e_hi,
                                                     double tol_T = tol::transmission,
                                                     std::size_t scan_points = 2000) {
  if (!(e_lo > 0.0) || !(e_hi > e_lo))
    throw TransferError("find_unit_transmission: need 0 < E_lo < E_hi");
  scan_points = std::max<std::size_t>(scan_points, 3);
  UnitTransmissionResult out;
  std::vector<double> es(scan_points), f(scan_points);
  for (std::size_t i = 0; i < scan_points; ++i) {
    es[i] = e_lo + (e_hi - e_lo) * static_cast<double>(i) / static_cast<double>(scan_points - 1);
    f[i] = scattering(pot, momentum(es[i])).R();
  }
  auto abs_r = [&](double e) { return std::abs(scattering(pot, momentum(e)).r); };
  for (std::size_t i = 0; i < scan_points; ++i) {
    const bool left_ok = i == 0 || f[i] <= f[i - 1];
    const bool right_ok = i + 1 == scan_points || f[i] < f[i + 1];
    if (!left_ok || !right_ok) continue;
    if (f[i] > 0.5) {
      out.resolution_warning = true;
      continue;
    }
    const double a = es[i == 0 ? 0 : i - 1];
    const double b = es[i + 1 == scan_points ? i : i + 1];
    const double e = detail::golden_minimize(abs_r, a, b, 1e-12 * std::max(1.0, es[i]));
    if (scattering(pot, momentum(e)).R() < tol_T) {
      if (out.energies.empty() || std::abs(e - out.energies.back()) > 1e-10 * e) out.energies.push_back(e);
    }
  }
  return out;
}

}  // namespace lpscatter
