#include <gtest/gtest.h>

#include <random>

#include "homlim/grid/grid.hpp"

using namespace homlim;
using namespace homlim::grid;

namespace {

Point P(std::string_view s) { return Point::parse(s); }

// evens = S1, odds = S2, fin{0} = S3, pow(2) = S4.
GridSession base_session() {
  GridSession g;
  g.add_base(BaseSet::evens());
  g.add_base(BaseSet::odds());
  g.add_base(BaseSet::finite({0}));
  g.add_base(BaseSet::powers(2));
  return g;
}

// f^w computed straight from the finite maps, for words over step-0 letters.
std::optional<SetId> f_oracle(const GridSession& g, const Word& w, SetId x) {
  for (std::size_t i = w.size(); i-- > 0;) {
    auto y = g.demand(w[i].demand).f_image(x, w[i].inverse);
    if (!y) return std::nullopt;
    x = *y;
  }
  return x;
}

}  // namespace

TEST(GridPoint, TextRoundTrip) {
  for (auto s : {"a0", "a12\xC2\xB7[0:d1]", "a3\xC2\xB7[0:d1.d2']\xC2\xB7[2:d3]"}) EXPECT_EQ(P(s).str(), s);
  EXPECT_THROW(P("a0\xC2\xB7[1:d1]\xC2\xB7[0:d2]"), Error);
  EXPECT_THROW(P("a0\xC2\xB7[0:e]"), Error);
  EXPECT_EQ(P("a3\xC2\xB7[0:d1]\xC2\xB7[2:d3]").level(), 3u);
}

TEST(Grid, XiApplyExamples) {
  auto g = base_session();
  auto d = g.add_demand(0, {{P("a0"), P("a1")}}, {{1, 2}, {2, 1}});
  Word c = Word::letter(d);
  EXPECT_EQ(g.xi_apply(0, Word{}, P("a4")), P("a4"));
  EXPECT_EQ(g.xi_apply(0, c, P("a0")), P("a1"));
  auto moved = g.xi_apply(0, c, P("a9"));
  EXPECT_EQ(moved.str(), "a9\xC2\xB7[0:d1]");
  EXPECT_EQ(g.xi_apply(0, c.inverse(), moved), P("a9"));
  EXPECT_EQ(g.xi_apply(0, c.inverse(), P("a1")), P("a0"));
  EXPECT_THROW(g.xi_apply(0, Word::letter(7), P("a0")), Error);
}

TEST(Grid, GroupAction) {
  auto g = base_session();
  auto d1 = g.add_demand(0, {{P("a0"), P("a1")}}, {{1, 2}, {2, 1}});
  auto d2 = g.add_demand(0, {{P("a2"), P("a4")}}, {{1, 1}});
  auto d3 = g.add_demand(1, {{P("a1\xC2\xB7[0:d1]"), P("a3\xC2\xB7[0:d2]")}}, {});
  std::vector<DemandId> step0{d1, d2}, step1{d1, d2, d3};
  auto points = g.enumerate_points(4, 1, 2);
  for (const auto& p : points) {
    ASSERT_TRUE(g.valid(p)) << p.str();
    for (const auto& u : reduced_words_up_to(step0, 2))
      for (const auto& v : reduced_words_up_to(step0, 2))
        EXPECT_EQ(g.xi_apply(0, compose(u, v), p), g.xi_apply(0, u, g.xi_apply(0, v, p))) << p.str();
  }
  for (const auto& p : g.enumerate_points(3, 2, 2)) {
    ASSERT_TRUE(g.valid(p)) << p.str();
    for (const auto& u : reduced_words_up_to(step1, 2)) {
      auto q = g.xi_apply(1, u, p);
      EXPECT_TRUE(g.valid(q)) << q.str();
      EXPECT_EQ(g.xi_apply(1, u.inverse(), q), p);
    }
  }
}

TEST(Grid, FreeAction) {
  auto g = base_session();
  auto d1 = g.add_demand(0, {{P("a0"), P("a1")}}, {{1, 2}, {2, 1}});
  auto d2 = g.add_demand(0, {}, {{1, 1}});
  for (const auto& w : reduced_words_up_to(std::vector<DemandId>{d1, d2}, 3, false)) {
    auto p = P("a7");
    EXPECT_NE(g.xi_apply(0, w, p), p) << w.str();
    EXPECT_LE(g.m_point(g.xi_apply(0, w, p)), std::max(g.m_point(p), g.m_word(w)));
  }
}

TEST(Grid, MembershipExamples) {
  auto g = base_session();
  auto d = g.add_demand(0, {}, {{1, 2}});
  auto c = Word::letter(d);
  auto p = g.xi_apply(0, c, P("a0"));
  EXPECT_TRUE(g.member(p, g.phi(0, 2)));
  EXPECT_FALSE(g.member(p, g.phi(0, 1)));
  for (AtomIndex a = 0; a < 20; ++a)
    for (SetId s = 1; s <= 4; ++s) EXPECT_EQ(g.member(Point(a), g.phi(0, s)), g.name(s).base.contains(a));
  EXPECT_THROW(g.member(p, 1), Error);
  EXPECT_FALSE(g.limit_member(p, 1));
  EXPECT_TRUE(g.limit_member(p, 2));
}

TEST(Grid, CharacterizationAgainstFiniteMaps) {
  auto g = base_session();
  auto d1 = g.add_demand(0, {{P("a0"), P("a1")}}, {{1, 2}, {2, 1}});
  auto d2 = g.add_demand(0, {{P("a3"), P("a6")}}, {{1, 2}, {2, 1}, {4, 4}});
  std::vector<DemandId> gens{d1, d2};
  int checked = 0;
  for (const auto& w : reduced_words_up_to(gens, 3))
    for (AtomIndex a = 7; a < 15; ++a)
      for (SetId x = 1; x <= 4; ++x) {
        auto p = g.xi_apply(0, w, Point(a));
        auto pre = f_oracle(g, w.inverse(), x);
        bool want = pre && g.name(*pre).base.contains(a);
        EXPECT_EQ(g.member(p, g.phi(0, x)), want) << p.str() << " " << set_ref(x);
        ++checked;
      }
  EXPECT_GT(checked, 1000);
}

TEST(Grid, CanonicalizeExamples) {
  auto g = base_session();
  auto d = g.add_demand(0, {{P("a0"), P("a1")}}, {{1, 2}});
  auto c = Word::letter(d);
  EXPECT_EQ(g.canonical_xi(0, Word{}, 1), g.phi(0, 1));
  EXPECT_EQ(g.canonical_xi(0, c, 1), g.phi(0, 2));
  std::mt19937_64 rng(7);
  auto pool = g.enumerate_points(12, 1, 3);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(200);
  for (const auto& p : pool)
    EXPECT_EQ(g.member(p, g.phi(0, 2)), g.member(g.xi_apply(0, c.inverse(), p), g.phi(0, 1))) << p.str();

  SetId orphan = g.canonical_xi(0, c, 3);
  EXPECT_EQ(g.name(orphan).kind, Name::Kind::Xi);
  EXPECT_EQ(g.set_name(orphan), "xi0(d1)[Phi0(S3)]");
  EXPECT_EQ(g.orphan_bound(orphan), 1u);
  auto t = g.trace(orphan);
  EXPECT_FALSE(t.in_family);
  EXPECT_EQ(t.atoms, std::vector<AtomIndex>{1});
  EXPECT_EQ(g.trace_str(t), "FiniteTrace[a1]");
  for (AtomIndex a = 0; a < 40; ++a) EXPECT_EQ(g.member(Point(a), orphan), a == 1);
  EXPECT_EQ(g.parse_set("xi0(d1)[Phi0(S3)]"), orphan);
  EXPECT_EQ(g.parse_set("xi0(d1)[Phi0(S1)]"), g.phi(0, 2));
}

TEST(Grid, TraceDescendsPhiChain) {
  auto g = base_session();
  SetId s = g.lift_to(1, 3);
  EXPECT_EQ(g.set_name(s), "Phi2(Phi1(Phi0(S1)))");
  EXPECT_EQ(g.trace_str(g.trace(s)), "InFamily(S1)");
}

TEST(Grid, OldLetterCommutation) {
  auto g = base_session();
  auto d1 = g.add_demand(0, {{P("a0"), P("a1")}}, {{1, 2}, {2, 1}});
  auto d2 = g.add_demand(0, {}, {{1, 1}, {2, 2}});
  g.add_demand(1, {}, {{g.phi(0, 1), g.phi(0, 2)}});
  std::vector<DemandId> old{d1, d2};
  auto points = g.enumerate_points(5, 2, 2);
  for (const auto& w : reduced_words_up_to(old, 2))
    for (SetId x : {g.phi(0, 1), g.phi(0, 2), g.phi(0, 3)}) {
      SetId img = g.xi_image(0, w, x);  // φ₁(w)[X] at step 1
      SetId lhs = g.phi(1, img);
      SetId rhs = g.canonical_xi(1, w, x);
      EXPECT_EQ(lhs, rhs);
      for (const auto& p : points)
        EXPECT_EQ(g.member(p, rhs), g.member(g.xi_apply(1, w.inverse(), p), g.phi(1, x))) << p.str();
    }
}

TEST(Grid, SatisfierSatisfiesDemands) {
  auto g = base_session();
  auto d1 = g.add_demand(0, {{P("a0"), P("a1")}}, {{1, 2}, {2, 1}});
  auto d2 = g.add_demand(1, {{P("a2\xC2\xB7[0:d1]"), P("a5")}}, {{g.phi(0, 1), g.phi(0, 1)}});
  auto pts = g.enumerate_points(6, 3, 2);
  for (auto id : {d1, d2}) {
    const auto& d = g.demand(id);
    const unsigned top = 3;
    for (const auto& [x, y] : d.h) EXPECT_EQ(g.satisfier_apply(id, top, x), y);
    for (auto [s, t] : d.f) {
      SetId S = g.lift_to(s, top), T = g.lift_to(t, top);
      for (const auto& p : pts) {
        EXPECT_EQ(g.member(p, S), g.member(g.satisfier_apply(id, top, p), T)) << p.str();
        EXPECT_EQ(g.member(p, T), g.member(g.satisfier_apply(id, top, p, true), S)) << p.str();
      }
    }
  }
}

TEST(Grid, MLevelsAndRestriction) {
  auto g = base_session();
  EXPECT_EQ(g.m_point(P("a7")), 7u);
  EXPECT_EQ(g.m_word(Word{}), 0u);
  auto far = g.add_demand(0, {{P("a5"), P("a3")}}, {});
  EXPECT_FALSE(g.restrict_demand(far, 4));
  EXPECT_TRUE(g.restrict_demand(far, 5));
  auto sep = g.add_demand(0, {}, {{1, 2}});
  EXPECT_EQ(g.m_demand(sep), 0u);
  EXPECT_EQ(g.separator(1, 2)->str(), "a0");
  auto mid = g.add_demand(0, {}, {{1, 1}, {3, 3}});  // evens vs fin{0} first differ at a2
  EXPECT_EQ(g.m_demand(mid), 2u);
  EXPECT_EQ(g.m_point(g.xi_apply(0, Word::letter(far), P("a2"))), 5u);
  for (auto id : g.demand_ids()) {
    bool seen = false;
    for (unsigned m = 0; m < 12; ++m) {
      bool def = g.restrict_demand(id, m).has_value();
      EXPECT_TRUE(!seen || def);
      seen = seen || def;
    }
    EXPECT_TRUE(seen);
  }
}

TEST(Grid, HomogenizeSmall) {
  GridSession g;
  g.add_base(BaseSet::evens());
  g.add_base(BaseSet::odds());
  for (auto [s, dep] : g.enumerate_names(1, 2)) EXPECT_EQ(g.trace(s).in_family, true);
  auto d = g.add_demand(0, {}, {{1, 2}});
  for (auto [s, dep] : g.enumerate_names(2, 3)) {
    auto t = g.trace(s);
    EXPECT_TRUE(t.in_family || t.atoms.size() <= t.bound + 1);
  }
  auto pts = g.enumerate_points(5, 2, 2);
  for (const auto& p : pts)
    EXPECT_EQ(g.member(p, g.lift_to(1, 2)), g.member(g.satisfier_apply(d, 2, p), g.lift_to(2, 2)));
}

TEST(Grid, Errors) {
  auto g = base_session();
  EXPECT_THROW(g.add_demand(0, {{P("a0"), P("a2")}}, {{1, 2}}), Error);
  EXPECT_THROW(g.add_demand(0, {{P("a0"), P("a1")}, {P("a0"), P("a3")}}, {}), Error);
  EXPECT_THROW(g.add_demand(0, {}, {{1, 99}}), Error);
  EXPECT_THROW(g.parse_set("S42"), Error);
  EXPECT_THROW(g.phi(1, 1), Error);
  try {
    g.add_demand(0, {{P("a0"), P("a2")}}, {{1, 2}});
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CompatibilityViolation);
  }
}

TEST(Grid, EtaAndPruning) {
  auto g = base_session();
  SetId p2 = 4;
  SetId cp2 = g.add_base(BaseSet::powers(2).complement());
  auto eta = g.eta_make({1, 2, p2, cp2}, {{1, true}, {p2, false}});
  EXPECT_TRUE(eta(1));
  EXPECT_FALSE(eta(2));
  EXPECT_FALSE(eta(p2));
  EXPECT_TRUE(eta(cp2));
  for (SetId s : {1u, 2u, p2, cp2}) EXPECT_EQ(eta(s) + eta(*g.partner(s)), 1);
  EXPECT_THROW(g.eta_make({1, 3}, {{1, true}}), Error);
  try {
    g.eta_make({1}, {{1, true}});
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotComplementClosed);
  }

  auto keep = g.add_demand(0, {}, {{1, 1}});
  auto drop = g.add_demand(0, {}, {{1, 1}, {2, 2}});
  auto drop2 = g.add_demand(0, {}, {{1, 2}, {p2, 1}});  // range holds evens and odds
  auto allowed = g.prune_alphabet();
  EXPECT_TRUE(allowed.count(keep));
  EXPECT_FALSE(allowed.count(drop));
  EXPECT_FALSE(allowed.count(drop2));
  EXPECT_TRUE(g.pruned_member(P("a3"), allowed));
  EXPECT_FALSE(g.pruned_member(g.xi_apply(0, Word::letter(drop), P("a3")), allowed));

  // E is closed under allowed words, and the lifted complements stay disjoint on E.
  auto in_e = g.enumerate_points(10, 2, 3, [&](DemandId id) { return allowed.count(id) > 0; });
  for (const auto& p : in_e) {
    EXPECT_TRUE(g.pruned_member(p, allowed));
    EXPECT_TRUE(g.pruned_member(g.xi_apply(1, Word::letter(keep), p), allowed));
    for (auto [x0, x1] : {std::pair{1u, 2u}, std::pair{p2, cp2}}) {
      unsigned k = std::max(1u, p.level());
      EXPECT_FALSE(g.member(p, g.lift_to(x0, k)) && g.member(p, g.lift_to(x1, k))) << p.str();
    }
  }
}
