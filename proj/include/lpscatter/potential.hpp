#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lpscatter/tolerances.hpp"

namespace lpscatter {

class PotentialError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Rectangular barrier of constant strength on [center - width/2, center + width/2].
struct Barrier {
  double strength = 0.0;
  double width = 1.0;
  double center = 0.0;

  [[nodiscard]] double lo() const noexcept { return center - 0.5 * width; }
  [[nodiscard]] double hi() const noexcept { return center + 0.5 * width; }
};

/// Ordered array of non-overlapping rectangular barriers with compact support.
/// Gaps between neighbours may have zero width.
class PwcPotential {
 public:
  PwcPotential() = default;

  explicit PwcPotential(std::vector<Barrier> barriers) : barriers_(std::move(barriers)) {
    std::stable_sort(barriers_.begin(), barriers_.end(),
                     [](const Barrier& a, const Barrier& b) { return a.center < b.center; });
    for (std::size_t i = 0; i < barriers_.size(); ++i) {
      const auto& b = barriers_[i];
      if (!(b.width > 0.0) || !std::isfinite(b.width))
        throw PotentialError("barrier " + std::to_string(i) + ": width must be positive and finite");
      if (!std::isfinite(b.strength) || !std::isfinite(b.center))
        throw PotentialError("barrier " + std::to_string(i) + ": strength and center must be finite");
      if (i > 0 && barriers_[i - 1].hi() > b.lo() + tol::position)
        throw PotentialError("barriers " + std::to_string(i - 1) + " and " + std::to_string(i) +
                             " overlap");
    }
  }

  /// Builds an array left to right from `x_start`: widths[i] is the width of
  /// barrier i, gaps[i] the free region between barrier i and i + 1.
  static PwcPotential from_layout(double x_start, const std::vector<double>& strengths,
                                  const std::vector<double>& widths,
                                  const std::vector<double>& gaps) {
    if (strengths.size() != widths.size() ||
        (!widths.empty() && gaps.size() + 1 != widths.size()))
      throw PotentialError("layout: inconsistent strength/width/gap counts");
    std::vector<Barrier> out;
    out.reserve(widths.size());
    double x = x_start;
    for (std::size_t i = 0; i < widths.size(); ++i) {
      out.push_back({strengths[i], widths[i], x + 0.5 * widths[i]});
      x += widths[i];
      if (i < gaps.size()) {
        if (gaps[i] < 0.0) throw PotentialError("layout: gap " + std::to_string(i) + " is negative");
        x += gaps[i];
      }
    }
    return PwcPotential(std::move(out));
  }

  [[nodiscard]] const std::vector<Barrier>& barriers() const noexcept { return barriers_; }
  [[nodiscard]] std::size_t size() const noexcept { return barriers_.size(); }
  [[nodiscard]] bool empty() const noexcept { return barriers_.empty(); }
  [[nodiscard]] const Barrier& operator[](std::size_t i) const { return barriers_[i]; }

  /// Left end of the support (0 for the empty potential).
  [[nodiscard]] double x_a() const noexcept { return empty() ? 0.0 : barriers_.front().lo(); }
  [[nodiscard]] double x_b() const noexcept { return empty() ? 0.0 : barriers_.back().hi(); }
  [[nodiscard]] double x_c() const noexcept { return 0.5 * (x_a() + x_b()); }

  /// Standalone sub-array made of barriers first..last (inclusive).
  [[nodiscard]] PwcPotential slice(std::size_t first, std::size_t last) const {
    if (first > last || last >= size()) throw PotentialError("slice: invalid barrier range");
    return PwcPotential(std::vector<Barrier>(barriers_.begin() + static_cast<std::ptrdiff_t>(first),
                                             barriers_.begin() + static_cast<std::ptrdiff_t>(last) + 1));
  }

  /// Mirror image about x = axis.
  [[nodiscard]] PwcPotential mirrored(double axis = 0.0) const {
    std::vector<Barrier> out = barriers_;
    for (auto& b : out) b.center = 2.0 * axis - b.center;
    return PwcPotential(std::move(out));
  }

  [[nodiscard]] PwcPotential translated(double dx) const {
    std::vector<Barrier> out = barriers_;
    for (auto& b : out) b.center += dx;
    return PwcPotential(std::move(out));
  }

  /// Gap widths between neighbouring barriers (size() - 1 entries).
  [[nodiscard]] std::vector<double> gaps() const {
    std::vector<double> g;
    for (std::size_t i = 1; i < size(); ++i)
      g.push_back(std::max(0.0, barriers_[i].lo() - barriers_[i - 1].hi()));
    return g;
  }

 private:
  std::vector<Barrier> barriers_;
};

/// Value of the potential at x: strength of the covering barrier, 0 elsewhere.
inline double value_at(const PwcPotential& pot, double x) {
  const auto& bs = pot.barriers();
  auto it = std::upper_bound(bs.begin(), bs.end(), x,
                             [](double v, const Barrier& b) { return v < b.lo(); });
  if (it == bs.begin()) return 0.0;
  --it;
  return x <= it->hi() ? it->strength : 0.0;
}

enum class SubdomainKind { barrier, gap, composite };

inline const char* to_string(SubdomainKind k) {
  switch (k) {
    case SubdomainKind::barrier: return "barrier";
    case SubdomainKind::gap: return "gap";
    case SubdomainKind::composite: return "composite";
  }
  return "?";
}

/// Closed interval [center - half_width, center + half_width].
struct Subdomain {
  double center = 0.0;
  double half_width = 0.0;
  SubdomainKind kind = SubdomainKind::composite;

  static Subdomain from_interval(double lo, double hi, SubdomainKind kind) {
    return {0.5 * (lo + hi), 0.5 * (hi - lo), kind};
  }
  [[nodiscard]] double lo() const noexcept { return center - half_width; }
  [[nodiscard]] double hi() const noexcept { return center + half_width; }
  [[nodiscard]] double width() const noexcept { return 2.0 * half_width; }
};

namespace detail {

struct Plateau {
  double lo, hi, value;
};

// Maximal constant pieces of V over the support, zeros between barriers included.
inline std::vector<Plateau> plateaus(const PwcPotential& pot, double tol_V) {
  std::vector<Plateau> out;
  auto push = [&](double lo, double hi, double v) {
    if (hi - lo <= 0.0) return;
    if (!out.empty() && std::abs(out.back().value - v) <= tol_V && std::abs(out.back().hi - lo) <= tol::position) {
      out.back().hi = hi;
      return;
    }
    out.push_back({lo, hi, v});
  };
  const auto& bs = pot.barriers();
  for (std::size_t i = 0; i < bs.size(); ++i) {
    if (i > 0) push(bs[i - 1].hi(), bs[i].lo(), 0.0);
    push(bs[i].lo(), bs[i].hi(), bs[i].strength);
  }
  return out;
}

}  // namespace detail

/// Breakpoint-exact mirror test of V inside `sub`: the breakpoints inside the
/// interval must map onto each other under x -> 2 alpha - x and every plateau
/// must match its mirror image.
inline bool is_lp_symmetric(const PwcPotential& pot, const Subdomain& sub,
                            double tol_V = tol::strength, double tol_x = tol::position) {
  const double lo = sub.lo(), hi = sub.hi(), alpha = sub.center;
  std::vector<double> cuts;
  for (const auto& p : detail::plateaus(pot, tol_V)) {
    for (double b : {p.lo, p.hi})
      if (b > lo + tol_x && b < hi - tol_x) cuts.push_back(b);
  }
  // outer support edges are breakpoints too when V is nonzero there
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [&](double a, double b) { return std::abs(a - b) <= tol_x; }),
             cuts.end());
  for (double c : cuts) {
    const double m = 2.0 * alpha - c;
    auto it = std::lower_bound(cuts.begin(), cuts.end(), m - tol_x);
    if (it == cuts.end() || std::abs(*it - m) > tol_x) return false;
  }
  std::vector<double> nodes;
  nodes.push_back(lo);
  nodes.insert(nodes.end(), cuts.begin(), cuts.end());
  nodes.push_back(hi);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double mid = 0.5 * (nodes[i] + nodes[i + 1]);
    if (std::abs(value_at(pot, mid) - value_at(pot, 2.0 * alpha - mid)) > tol_V) return false;
  }
  return true;
}

/// Barrier index range [first, last] grouped into one resonator.
struct BarrierRange {
  std::size_t first = 0;
  std::size_t last = 0;
  friend bool operator==(const BarrierRange&, const BarrierRange&) = default;
};

struct Resonator {
  BarrierRange range;
  Subdomain domain;
};

/// Tightest subdomain containing barriers first..last.
inline Subdomain tight_subdomain(const PwcPotential& pot, BarrierRange r) {
  return Subdomain::from_interval(pot[r.first].lo(), pot[r.last].hi(),
                                  r.first == r.last ? SubdomainKind::barrier : SubdomainKind::composite);
}

/// A tiling of [x_a, x_b] by LP-symmetric resonators and the gaps between them.
struct Decomposition {
  std::vector<Resonator> resonators;
  std::vector<Subdomain> gaps;  // gaps[l] separates resonators l and l + 1; may be zero width
  std::size_t index = 0;

  /// Resonators and nonzero-width gaps in spatial order.
  [[nodiscard]] std::vector<Subdomain> subdomains(bool include_empty_gaps = false) const {
    std::vector<Subdomain> out;
    for (std::size_t l = 0; l < resonators.size(); ++l) {
      out.push_back(resonators[l].domain);
      if (l < gaps.size() && (include_empty_gaps || gaps[l].width() > tol::position))
        out.push_back(gaps[l]);
    }
    return out;
  }
  [[nodiscard]] std::vector<BarrierRange> ranges() const {
    std::vector<BarrierRange> out;
    for (const auto& r : resonators) out.push_back(r.range);
    return out;
  }
};

/// Builds the decomposition given by consecutive barrier ranges. Throws when the
/// ranges do not tile the array or a resonator is not mirror-symmetric.
inline Decomposition make_decomposition(const PwcPotential& pot, const std::vector<BarrierRange>& ranges,
                                        std::size_t index = 0) {
  Decomposition d;
  d.index = index;
  std::size_t next = 0;
  for (const auto& r : ranges) {
    if (r.first != next || r.last < r.first || r.last >= pot.size())
      throw PotentialError("decomposition: ranges must tile barriers 0.." + std::to_string(pot.size() - 1));
    const auto sub = tight_subdomain(pot, r);
    if (!is_lp_symmetric(pot, sub))
      throw PotentialError("decomposition: barriers " + std::to_string(r.first) + ".." +
                           std::to_string(r.last) + " are not mirror-symmetric");
    if (!d.resonators.empty())
      d.gaps.push_back(Subdomain::from_interval(d.resonators.back().domain.hi(), sub.lo(), SubdomainKind::gap));
    d.resonators.push_back({r, sub});
    next = r.last + 1;
  }
  if (next != pot.size())
    throw PotentialError("decomposition: ranges must tile barriers 0.." + std::to_string(pot.size() - 1));
  return d;
}

/// Every barrier range whose tight interval is LP-symmetric, indexed by first barrier
/// and sorted by increasing last barrier.
inline std::vector<std::vector<std::size_t>> symmetric_ranges(const PwcPotential& pot) {
  const std::size_t n = pot.size();
  std::vector<std::vector<std::size_t>> ends(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      if (j == i || is_lp_symmetric(pot, tight_subdomain(pot, {i, j}))) ends[i].push_back(j);
  return ends;
}

struct DecompositionSet {
  std::vector<Decomposition> items;
  bool truncated = false;
};

/// All tilings of the support into LP-symmetric resonators, coarsest first.
/// Resonators are canonicalised to the tightest interval around their barriers.
inline DecompositionSet enumerate_decompositions(const PwcPotential& pot, std::size_t cap = 10000) {
  DecompositionSet out;
  const std::size_t n = pot.size();
  if (n == 0) return out;
  const auto ends = symmetric_ranges(pot);

  // fewest[i]: minimum resonator count tiling barriers i..n-1
  std::vector<std::size_t> fewest(n + 1, 0);
  for (std::size_t i = n; i-- > 0;) {
    fewest[i] = std::numeric_limits<std::size_t>::max();
    for (std::size_t j : ends[i]) fewest[i] = std::min(fewest[i], 1 + fewest[j + 1]);
  }

  std::vector<BarrierRange> path;
  std::function<void(std::size_t, std::size_t)> walk = [&](std::size_t i, std::size_t remaining) {
    if (i == n) {
      if (remaining != 0) return;
      if (out.items.size() >= cap) {
        out.truncated = true;
        return;
      }
      out.items.push_back(make_decomposition(pot, path, out.items.size()));
      return;
    }
    if (remaining == 0 || fewest[i] > remaining || n - i < remaining) return;
    for (auto it = ends[i].rbegin(); it != ends[i].rend(); ++it) {
      path.push_back({i, *it});
      walk(*it + 1, remaining - 1);
      path.pop_back();
      if (out.truncated) return;
    }
  };
  for (std::size_t count = fewest[0]; count <= n && !out.truncated; ++count) walk(0, count);

  if (out.truncated) {
    // the finest tiling is always reported
    std::vector<BarrierRange> finest;
    for (std::size_t i = 0; i < n; ++i) finest.push_back({i, i});
    const bool present = std::any_of(out.items.begin(), out.items.end(),
                                     [&](const Decomposition& d) { return d.resonators.size() == n; });
    if (!present) out.items.push_back(make_decomposition(pot, finest, out.items.size()));
  }
  return out;
}

}  // namespace lpscatter
