#pragma once

#include <complex>

namespace lpscatter {

using complex = std::complex<double>;

/// Tolerance ladder shared by every module. Energies are in units of the
/// arbitrary energy scale with hbar = m = 1, so E = k^2 / 2.
namespace tol {
inline constexpr double position = 1e-9;      // breakpoint comparison
inline constexpr double strength = 1e-9;      // plateau value comparison
inline constexpr double unimodular = 1e-10;   // | |w|^2 - |z|^2 - 1 |
inline constexpr double unitary = 1e-10;      // | T + R - 1 |
inline constexpr double transmission = 1e-8;  // 1 - T at a perfect transmission resonance
inline constexpr double current = 1e-9;       // |j| / k for a zero-current state
inline constexpr double invariant = 1e-8;     // relative constancy of q, density residuals
inline constexpr double design = 1e-10;       // per-condition design residual
inline constexpr double node = 1e-12;         // density below this (relative) counts as a node
inline constexpr double oracle = 1e-6;        // oracle-integrated checks
}  // namespace tol

inline constexpr double pi = 3.14159265358979323846;

}  // namespace lpscatter
