#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "lpscatter/io.hpp"
#include "lpscatter/potential.hpp"
#include "reference.hpp"

using namespace lpscatter;

namespace {

PwcPotential pair(double v1, double v2) { return PwcPotential({{v1, 1.0, -2.0}, {v2, 1.0, 2.0}}); }

// brute-force probe of V(x) = V(2a - x)
bool sampled_symmetric(const PwcPotential& pot, const Subdomain& sub, int n = 1000) {
  for (int i = 0; i < n; ++i) {
    // offset the probes so they never land exactly on a breakpoint
    const double x = sub.lo() + sub.width() * (i + 0.5 + 1e-3) / n;
    if (std::abs(value_at(pot, x) - value_at(pot, 2 * sub.center - x)) > 1e-9) return false;
  }
  return true;
}

std::set<std::vector<std::pair<std::size_t, std::size_t>>> as_set(const DecompositionSet& ds) {
  std::set<std::vector<std::pair<std::size_t, std::size_t>>> out;
  for (const auto& d : ds.items) {
    std::vector<std::pair<std::size_t, std::size_t>> v;
    for (const auto& r : d.ranges()) v.emplace_back(r.first, r.last);
    out.insert(v);
  }
  return out;
}

}  // namespace

TEST(Potential, ValueAtExamples) {
  EXPECT_EQ(value_at(PwcPotential{}, 1.0), 0.0);
  const PwcPotential one({{4.0, 2.0, 0.0}});
  EXPECT_EQ(value_at(one, 0.5), 4.0);
  EXPECT_EQ(value_at(one, 1.5), 0.0);
}

TEST(Potential, DerivedSupport) {
  const auto p = pair(4, 4);
  EXPECT_DOUBLE_EQ(p.x_a(), -2.5);
  EXPECT_DOUBLE_EQ(p.x_b(), 2.5);
  EXPECT_DOUBLE_EQ(p.x_c(), 0.0);
  ASSERT_EQ(p.gaps().size(), 1u);
  EXPECT_DOUBLE_EQ(p.gaps()[0], 3.0);
}

TEST(Potential, RejectsOverlapAndBadWidth) {
  EXPECT_THROW(PwcPotential({{1.0, 2.0, 0.0}, {1.0, 2.0, 1.0}}), PotentialError);
  EXPECT_THROW(PwcPotential({{1.0, 0.0, 0.0}}), PotentialError);
  EXPECT_THROW(PwcPotential({{1.0, -1.0, 0.0}}), PotentialError);
  // touching barriers are allowed
  EXPECT_NO_THROW(PwcPotential({{1.0, 1.0, 0.0}, {2.0, 1.0, 1.0}}));
}

TEST(Potential, FromLayout) {
  const auto p = PwcPotential::from_layout(-1.0, {3, 4}, {1.0, 0.5}, {0.25});
  EXPECT_DOUBLE_EQ(p[0].center, -0.5);
  EXPECT_DOUBLE_EQ(p[1].lo(), 0.25);
  EXPECT_THROW(PwcPotential::from_layout(0.0, {1, 1}, {1, 1}, {-0.1}), PotentialError);
}

TEST(Potential, SymmetryExamples) {
  const PwcPotential one({{4.0, 2.0, 0.3}});
  EXPECT_TRUE(is_lp_symmetric(one, tight_subdomain(one, {0, 0})));
  EXPECT_TRUE(is_lp_symmetric(pair(4, 4), Subdomain{0.0, 3.0, SubdomainKind::composite}));
  EXPECT_FALSE(is_lp_symmetric(pair(4, 5), Subdomain{0.0, 3.0, SubdomainKind::composite}));
}

TEST(Potential, SymmetryRejectsShiftedCenter) {
  EXPECT_FALSE(is_lp_symmetric(pair(4, 4), Subdomain{0.1, 2.9, SubdomainKind::composite}));
  // widened into the outer zero region, still symmetric
  EXPECT_TRUE(is_lp_symmetric(pair(4, 4), Subdomain{0.0, 4.0, SubdomainKind::composite}));
}

TEST(Potential, SymmetryMatchesDenseProbe) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int agree = 0, trials = 0;
  for (int t = 0; t < 300; ++t) {
    // palindromic layouts half the time so both answers are exercised
    std::vector<double> vs, ls, gs;
    const int n = 2 + static_cast<int>(U(rng) * 4);
    for (int i = 0; i < n; ++i) {
      vs.push_back(1 + std::floor(U(rng) * 3));
      ls.push_back(0.5 + std::floor(U(rng) * 3) * 0.25);
      if (i + 1 < n) gs.push_back(std::floor(U(rng) * 3) * 0.5);
    }
    if (U(rng) < 0.5) {
      for (int i = 0; i < n / 2; ++i) {
        vs[n - 1 - i] = vs[i];
        ls[n - 1 - i] = ls[i];
      }
      for (int i = 0; i < (n - 1) / 2; ++i) gs[n - 2 - i] = gs[i];
    }
    const auto pot = PwcPotential::from_layout(0.0, vs, ls, gs);
    const auto sub = tight_subdomain(pot, {0, pot.size() - 1});
    ++trials;
    if (is_lp_symmetric(pot, sub) == sampled_symmetric(pot, sub)) ++agree;
  }
  EXPECT_EQ(agree, trials);
}

TEST(Potential, SingleBarrierHasOneDecomposition) {
  const PwcPotential one({{4.0, 2.0, 0.0}});
  const auto ds = enumerate_decompositions(one);
  ASSERT_EQ(ds.items.size(), 1u);
  EXPECT_EQ(ds.items[0].resonators.size(), 1u);
  EXPECT_FALSE(ds.truncated);
}

TEST(Potential, UniformTripleDecompositions) {
  const auto p = PwcPotential::from_layout(0.0, {2, 2, 2}, {1, 1, 1}, {0.5, 0.5});
  const auto ds = enumerate_decompositions(p);
  const auto got = as_set(ds);
  using V = std::vector<std::pair<std::size_t, std::size_t>>;
  EXPECT_TRUE(got.count(V{{0, 2}}));
  EXPECT_TRUE(got.count(V{{0, 1}, {2, 2}}));
  EXPECT_TRUE(got.count(V{{0, 0}, {1, 2}}));
  EXPECT_TRUE(got.count(V{{0, 0}, {1, 1}, {2, 2}}));
  EXPECT_EQ(got.size(), 4u);
  // globally symmetric array: whole array first
  EXPECT_EQ(ds.items.front().resonators.size(), 1u);
}

TEST(Potential, NestedSymmetriesAbacCaba) {
  // A B A C C A B A: the whole array, the two halves, and the inner ABA blocks
  const double a = 3, b = 5, c = 7;
  const auto p = PwcPotential::from_layout(0.0, {a, b, a, c, c, a, b, a}, {1, 0.5, 1, 0.7, 0.7, 1, 0.5, 1},
                                          {0.4, 0.4, 0.8, 0.6, 0.8, 0.4, 0.4});
  const auto ds = enumerate_decompositions(p);
  const auto got = as_set(ds);
  using V = std::vector<std::pair<std::size_t, std::size_t>>;
  EXPECT_TRUE(got.count(V{{0, 7}}));
  EXPECT_TRUE(got.count(V{{0, 2}, {3, 4}, {5, 7}}));
  EXPECT_TRUE(got.count(V{{0, 2}, {3, 3}, {4, 4}, {5, 7}}));

  // brute force: count tilings by symmetric ranges found by dense probing
  const std::size_t n = p.size();
  std::vector<std::vector<bool>> sym(n, std::vector<bool>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) sym[i][j] = sampled_symmetric(p, tight_subdomain(p, {i, j}));
  std::vector<double> count(n + 1, 0.0);
  count[n] = 1;
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = i; j < n; ++j)
      if (sym[i][j]) count[i] += count[j + 1];
  EXPECT_EQ(static_cast<double>(ds.items.size()), count[0]);
}

TEST(Potential, DecompositionsTileAndAreOrdered) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    // few distinct values so nontrivial symmetries appear
    std::uniform_int_distribution<int> pick(0, 1);
    const int n = 2 + t % 6;
    std::vector<double> vs, ls, gs;
    for (int i = 0; i < n; ++i) {
      vs.push_back(1 + pick(rng));
      ls.push_back(1.0);
      if (i + 1 < n) gs.push_back(0.5 * pick(rng));
    }
    const auto p = PwcPotential::from_layout(0.0, vs, ls, gs);
    const auto ds = enumerate_decompositions(p);
    ASSERT_FALSE(ds.items.empty());
    std::size_t prev = 0;
    bool finest = false;
    for (const auto& d : ds.items) {
      EXPECT_GE(d.resonators.size(), prev);
      prev = d.resonators.size();
      finest = finest || d.resonators.size() == p.size();
      const auto subs = d.subdomains(true);
      EXPECT_NEAR(subs.front().lo(), p.x_a(), 1e-12);
      EXPECT_NEAR(subs.back().hi(), p.x_b(), 1e-12);
      for (std::size_t i = 1; i < subs.size(); ++i) EXPECT_NEAR(subs[i - 1].hi(), subs[i].lo(), 1e-12);
      for (const auto& r : d.resonators) EXPECT_TRUE(sampled_symmetric(p, r.domain));
    }
    EXPECT_TRUE(finest);
    EXPECT_EQ(as_set(ds).size(), ds.items.size());
  }
}

TEST(Potential, TruncationFlag) {
  // 12 identical touching barriers: number of compositions 2^11 > cap
  std::vector<double> vs(12, 1.0), ls(12, 1.0), gs(11, 0.0);
  const auto p = PwcPotential::from_layout(0.0, vs, ls, gs);
  const auto ds = enumerate_decompositions(p, 100);
  EXPECT_TRUE(ds.truncated);
  EXPECT_TRUE(std::any_of(ds.items.begin(), ds.items.end(),
                          [](const Decomposition& d) { return d.resonators.size() == 12; }));
  EXPECT_FALSE(enumerate_decompositions(p, 1u << 12).truncated);
  EXPECT_EQ(enumerate_decompositions(p, 1u << 12).items.size(), 2048u);
}

TEST(Potential, MakeDecompositionValidates) {
  const auto p = pair(4, 5);
  EXPECT_THROW(make_decomposition(p, {{0, 1}}), PotentialError);
  EXPECT_THROW(make_decomposition(p, {{0, 0}}), PotentialError);
  const auto d = make_decomposition(p, {{0, 0}, {1, 1}});
  ASSERT_EQ(d.gaps.size(), 1u);
  EXPECT_DOUBLE_EQ(d.gaps[0].width(), 3.0);
}

TEST(PotentialIo, ParsesAndRoundTrips) {
  std::istringstream in("# two barriers\nbarrier V0=4 L=1 alpha=-2\n\n  barrier alpha=2 L=1 V0=5 # trailing\n");
  const auto p = parse_potential(in);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[1].strength, 5.0);
  std::istringstream again(format_potential(p));
  const auto q = parse_potential(again);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(p[i].strength, q[i].strength);
    EXPECT_EQ(p[i].width, q[i].width);
    EXPECT_EQ(p[i].center, q[i].center);
  }
}

TEST(PotentialIo, EmptyFileIsEmptyPotential) {
  std::istringstream in("# nothing here\n");
  EXPECT_TRUE(parse_potential(in).empty());
}

TEST(PotentialIo, DiagnosticsNameLines) {
  auto err = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_potential(in, "f.pot");
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(err("barrier V0=1 L=2 alpha=0\nbarrier V0=1 L=2 alpha=1\n").find("lines 1 and 2 overlap"),
            std::string::npos);
  EXPECT_NE(err("barrier V0=1 L=2\n").find("f.pot:1"), std::string::npos);
  EXPECT_NE(err("\nbarrier V0=x L=2 alpha=0\n").find("f.pot:2"), std::string::npos);
  EXPECT_NE(err("well V0=1 L=2 alpha=0\n").find("unknown record"), std::string::npos);
  EXPECT_NE(err("barrier V0=1 L=-2 alpha=0\n").find("positive"), std::string::npos);
  EXPECT_NE(err("barrier V0=1 L=2 alpha=0 W=3\n").find("unknown key"), std::string::npos);
}
