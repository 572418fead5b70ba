#include <gtest/gtest.h>

#include "homlim/base_set.hpp"

using homlim::BaseSet;

TEST(BaseSet, Membership) {
  EXPECT_TRUE(BaseSet::finite({0, 2}).contains(2));
  EXPECT_FALSE(BaseSet::finite({0, 2}).contains(1));
  EXPECT_FALSE(BaseSet::evens().contains(7));
  EXPECT_TRUE(BaseSet::evens().complement().contains(7));
}

TEST(BaseSet, ComplementExamples) {
  auto c = BaseSet::finite({1}).complement();
  EXPECT_EQ(c.str(), "ep(10;1)");
  EXPECT_EQ(BaseSet::evens().complement(), BaseSet::odds());
  EXPECT_EQ(BaseSet::parse("ep(;10)"), BaseSet::evens());
}

TEST(BaseSet, ComplementIsInvolutionAndPointwise) {
  std::vector<BaseSet> sample = {
      BaseSet::finite({0}),       BaseSet::finite({3, 5, 9}), BaseSet::evens(),
      BaseSet::odds(),            BaseSet::empty(),           BaseSet::everything(),
      BaseSet::periodic({1, 1, 0}, {0, 1, 1}), BaseSet::powers(2),
      BaseSet::periodic({0, 0, 0, 1}, {1, 0, 0}),
  };
  for (const auto& s : sample) {
    auto c = s.complement();
    EXPECT_EQ(c.complement(), s) << s.str();
    std::size_t span = s.preperiod().size() + 2 * std::max<std::size_t>(s.period().size(), 1) + 16;
    for (homlim::AtomIndex a = 0; a < span; ++a) EXPECT_NE(c.contains(a), s.contains(a)) << s.str() << " at " << a;
  }
}

TEST(BaseSet, NormalizationGivesUniqueForm) {
  EXPECT_EQ(BaseSet::periodic({1, 0}, {1, 0, 1, 0}), BaseSet::evens());
  EXPECT_THROW(BaseSet::periodic({1, 0, 1}, {}), homlim::Error);
  EXPECT_EQ(BaseSet::periodic({1, 0, 1}, {0}), BaseSet::finite({0, 2}));
}

TEST(BaseSet, RoundTrip) {
  for (const char* s : {"fin[0,2]", "ep(;10)", "ep(10;1)", "ep(;0)", "ep(;1)", "pow(2)", "copow(3)", "ep(0;011)"}) {
    EXPECT_EQ(BaseSet::parse(s).str(), s);
  }
  EXPECT_THROW(BaseSet::parse("fin[]"), homlim::Error);
  EXPECT_THROW(BaseSet::parse("ep(1;)"), homlim::Error);
}

TEST(BaseSet, PowersOfTwo) {
  auto p = BaseSet::powers(2);
  for (homlim::AtomIndex a : {1u, 2u, 4u, 8u, 1024u}) EXPECT_TRUE(p.contains(a));
  for (homlim::AtomIndex a : {0u, 3u, 6u, 12u}) EXPECT_FALSE(p.contains(a));
  EXPECT_FALSE(p.is_finite());
}

TEST(BaseSet, FirstDifference) {
  EXPECT_EQ(BaseSet::evens().first_difference(BaseSet::odds()), 0u);
  EXPECT_EQ(BaseSet::evens().first_difference(BaseSet::evens()), std::nullopt);
  EXPECT_EQ(BaseSet::finite({0, 2}).first_difference(BaseSet::evens()), 4u);
  EXPECT_EQ(BaseSet::powers(2).first_difference(BaseSet::evens()), 0u);
}

TEST(BaseSet, Permuted) {
  std::map<homlim::AtomIndex, homlim::AtomIndex> swap{{0, 1}, {1, 0}};
  auto e = BaseSet::evens().permuted(swap);
  EXPECT_FALSE(e.contains(0));
  EXPECT_TRUE(e.contains(1));
  EXPECT_TRUE(e.contains(2));
  EXPECT_FALSE(e.contains(3));
}
