#pragma once

// Test-side reference solutions, independent of the library's matrix products.

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <vector>

#include "lpscatter/potential.hpp"

namespace ref {

using cd = std::complex<double>;

struct Amplitudes {
  cd r, t;
  std::vector<cd> a, b;  // per region: psi = a e^{i q (x - x0)} + b e^{-i q (x - x0)}
  std::vector<cd> q;
  std::vector<double> edges;
};

// Solve the global matching problem: unit wave from the left, regions with local
// wavevectors q_j = sqrt(k^2 - 2 V_j) (complex), psi and psi' continuous at every edge.
inline Amplitudes match(const lpscatter::PwcPotential& pot, double k) {
  std::vector<double> edges;
  std::vector<double> vs{0.0};
  for (std::size_t i = 0; i < pot.size(); ++i) {
    const auto& b = pot[i];
    if (i > 0 && b.lo() > pot[i - 1].hi()) {
      edges.push_back(pot[i - 1].hi());
      vs.push_back(0.0);
    }
    edges.push_back(b.lo());
    vs.push_back(b.strength);
  }
  if (!pot.empty()) {
    edges.push_back(pot.x_b());
    vs.push_back(0.0);
  }
  const std::size_t nr = vs.size();
  Amplitudes out;
  out.edges = edges;
  for (double v : vs) out.q.push_back(std::sqrt(cd(k * k - 2.0 * v, 0.0)));
  // unknowns: b_0 (= r), (a_j, b_j) j = 1..nr-2, a_{nr-1} (= t); b_{nr-1} = 0, a_0 = 1
  const std::size_t nu = 2 * (nr - 1);
  out.a.assign(nr, 0.0);
  out.b.assign(nr, 0.0);
  if (nr == 1) {
    out.r = 0.0;
    out.t = 1.0;
    out.a[0] = 1.0;
    return out;
  }
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(nu, nu);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(nu);
  const cd I(0, 1);
  auto col_a = [&](std::size_t j) -> long { return j == nr - 1 ? long(nu - 1) : long(2 * j - 1); };
  auto col_b = [&](std::size_t j) -> long { return j == 0 ? 0L : long(2 * j); };
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double x = edges[e];
    const std::size_t L = e, R = e + 1;
    // psi_L(x) - psi_R(x) = 0 and derivative. Inner regions are referenced to
    // their left edge so evanescent exponentials stay bounded.
    for (int row_kind = 0; row_kind < 2; ++row_kind) {
      const long row = long(2 * e + row_kind);
      auto put = [&](std::size_t j, double sign) {
        const cd q = out.q[j];
        const double x0 = (j == 0 || j == nr - 1) ? 0.0 : edges[j - 1];
        const cd ea = std::exp(I * q * (x - x0)), eb = std::exp(-I * q * (x - x0));
        const cd fa = row_kind == 0 ? ea : I * q * ea;
        const cd fb = row_kind == 0 ? eb : -I * q * eb;
        // a_0 = 1 known and b_{nr-1} = 0
        if (j == 0) {
          rhs(row) -= sign * fa;
          A(row, col_b(0)) += sign * fb;
        } else if (j == nr - 1) {
          A(row, col_a(j)) += sign * fa;
        } else {
          A(row, col_a(j)) += sign * fa;
          A(row, col_b(j)) += sign * fb;
        }
      };
      put(L, 1.0);
      put(R, -1.0);
    }
  }
  Eigen::VectorXcd sol = A.fullPivLu().solve(rhs);
  out.a[0] = 1.0;
  out.b[0] = sol(0);
  for (std::size_t j = 1; j + 1 < nr; ++j) {
    out.a[j] = sol(col_a(j));
    out.b[j] = sol(col_b(j));
  }
  out.a[nr - 1] = sol(long(nu - 1));
  out.r = out.b[0];
  out.t = out.a[nr - 1];
  return out;
}

inline lpscatter::PwcPotential random_array(std::mt19937_64& rng, int n_min, int n_max, double v_max = 10.0,
                                            double l_min = 0.1, double l_max = 3.0, double g_max = 3.0) {
  std::uniform_int_distribution<int> nd(n_min, n_max);
  std::uniform_real_distribution<double> V(0.0, v_max), L(l_min, l_max), G(0.0, g_max), X(-2.0, 2.0);
  const int n = nd(rng);
  std::vector<double> vs, ls, gs;
  for (int i = 0; i < n; ++i) {
    double v = V(rng);
    while (v == 0.0) v = V(rng);
    vs.push_back(v);
    ls.push_back(L(rng));
    if (i + 1 < n) gs.push_back(G(rng));
  }
  return lpscatter::PwcPotential::from_layout(X(rng), vs, ls, gs);
}

}  // namespace ref
