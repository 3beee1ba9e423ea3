#pragma once

// Design problems shared by the unit and acceptance suites.

#include <string>
#include <vector>

#include "lpscatter/design.hpp"

namespace designs {

using namespace lpscatter;

inline Parameter fixed(std::string name, double v) { return {std::move(name), v, false, std::nullopt}; }
inline Parameter free_par(std::string name, double v) { return {std::move(name), v, true, std::nullopt}; }

inline Target ptr(double e, std::vector<BarrierRange> rs, std::string label = "") {
  return {TargetKind::ptr, e, std::move(rs), {}, std::move(label)};
}

// one barrier, width free
inline DesignProblem single_barrier(double v0, double l_seed, double e) {
  DesignProblem p;
  p.parameters = {free_par("L", l_seed)};
  p.layout.barriers = {{Slot::literal(v0), Slot::ref("L")}};
  p.targets = {ptr(e, {{0, 0}}, "abr")};
  return p;
}

// two unequal barriers, each its own resonator; both widths free
inline DesignProblem asymmetric_double(double v1, double v2, double gap, double e, double l1, double l2) {
  DesignProblem p;
  p.parameters = {free_par("L1", l1), free_par("L2", l2)};
  p.layout.barriers = {{Slot::literal(v1), Slot::ref("L1")}, {Slot::literal(v2), Slot::ref("L2")}};
  p.layout.gaps = {Slot::literal(gap)};
  p.targets = {ptr(e, {{0, 0}, {1, 1}}, "E_r")};
  return p;
}

// R1: 5 equal barriers (Va, La, inner gap ga); gap 1; R2: 9 equal barriers (Vb, Lb, gb).
// E1: R1 and every single barrier of R2 transparent (R2 reducible); E2: R1 and R2 as a whole.
inline DesignProblem two_resonator(std::vector<double> seed = {0.969, 0.287, 1.571, 1.888}) {
  DesignProblem p;
  p.parameters = {fixed("Va", 9.0), free_par("La", seed[0]), free_par("ga", seed[1]), fixed("Vb", 5.0),
                  free_par("Lb", seed[2]), free_par("gb", seed[3])};
  for (int i = 0; i < 5; ++i) p.layout.barriers.push_back({Slot::ref("Va"), Slot::ref("La")});
  for (int i = 0; i < 9; ++i) p.layout.barriers.push_back({Slot::ref("Vb"), Slot::ref("Lb")});
  for (int i = 0; i < 4; ++i) p.layout.gaps.push_back(Slot::ref("ga"));
  p.layout.gaps.push_back(Slot::literal(1.0));
  for (int i = 0; i < 8; ++i) p.layout.gaps.push_back(Slot::ref("gb"));
  std::vector<BarrierRange> fine{{0, 4}};
  for (std::size_t i = 5; i < 14; ++i) fine.push_back({i, i});
  p.targets = {ptr(7.0, fine, "E1"), ptr(7.46, {{0, 4}, {5, 13}}, "E2")};
  return p;
}

inline const std::vector<int>& five_resonator_signs() {
  static const std::vector<int> s{-1, -1, 1, 1, 1, -1, 1, 1, 1};
  return s;
}

// R1: single barrier V = 6; R2..R5: double barriers (9, Ld, inner gap d) separated by g1..g4.
// R2..R5 are transparent and the whole SAC state is an LP eigenstate at E = 7.354.
inline DesignProblem five_resonator(std::vector<double> seed = {-0.797, 0.85, 0.769, 2.704, 1.065, 1.884, 1.065,
                                                                  1.884}) {
  DesignProblem p;
  p.parameters = {free_par("x0", seed[0]), free_par("L1", seed[1]), free_par("Ld", seed[2]), free_par("d", seed[3]),
                  free_par("g1", seed[4]), free_par("g2", seed[5]), free_par("g3", seed[6]), free_par("g4", seed[7])};
  p.layout.origin = Slot::ref("x0");
  p.layout.barriers.push_back({Slot::literal(6.0), Slot::ref("L1")});
  for (int l = 0; l < 4; ++l) {
    p.layout.gaps.push_back(Slot::ref("g" + std::to_string(l + 1)));
    p.layout.barriers.push_back({Slot::literal(9.0), Slot::ref("Ld")});
    p.layout.gaps.push_back(Slot::ref("d"));
    p.layout.barriers.push_back({Slot::literal(9.0), Slot::ref("Ld")});
  }
  const double e = 7.354;
  p.targets.push_back(ptr(e, {{1, 2}, {3, 4}, {5, 6}, {7, 8}}, "R2-R5"));
  p.targets.push_back({TargetKind::zero_current, e, {{0, 0}, {1, 2}, {3, 4}, {5, 6}, {7, 8}}, five_resonator_signs(),
                       "zero current"});
  p.least_squares = true;
  return p;
}

}  // namespace designs
