#include <gtest/gtest.h>

#include <map>

#include "homlim/base_set.hpp"
#include "homlim/demand.hpp"

using homlim::BaseSet;
using homlim::Error;
using homlim::ErrorKind;
using homlim::SetId;

namespace {

struct Atom {
  homlim::AtomIndex i;
  std::string str() const { return "a" + std::to_string(i); }
  friend bool operator==(const Atom&, const Atom&) = default;
};

struct Fixture {
  std::map<SetId, BaseSet> sets{{1, BaseSet::evens()}, {2, BaseSet::odds()}};
  auto member() const {
    return [this](const Atom& a, SetId s) { return sets.at(s).contains(a.i); };
  }
  auto known() const {
    return [this](SetId s) { return sets.count(s) > 0; };
  }
};

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Usage;
}

struct Ctx {
  std::map<homlim::DemandId, homlim::Demand<Atom>> demands;
  const homlim::Demand<Atom>* find_demand(homlim::DemandId id) const {
    auto it = demands.find(id);
    return it == demands.end() ? nullptr : &it->second;
  }
  std::optional<SetId> old_set_image(homlim::Letter, SetId, unsigned) const { return std::nullopt; }
  Atom old_point_image(homlim::Letter, const Atom& a, unsigned) const { return a; }
};

}  // namespace

TEST(Demand, ValidateExamples) {
  Fixture fx;
  EXPECT_NO_THROW(homlim::validate_demand<Atom>({}, {{1, 2}}, fx.member(), fx.known()));
  EXPECT_EQ(kind_of([&] { homlim::validate_demand<Atom>({{Atom{0}, Atom{1}}}, {{1, 1}}, fx.member(), fx.known()); }),
            ErrorKind::CompatibilityViolation);
  EXPECT_NO_THROW(homlim::validate_demand<Atom>({{Atom{0}, Atom{2}}}, {{1, 1}}, fx.member(), fx.known()));
  EXPECT_EQ(kind_of([&] { homlim::validate_demand<Atom>({}, {{1, 9}}, fx.member(), fx.known()); }),
            ErrorKind::UnknownSetId);
  EXPECT_EQ(kind_of([&] {
              homlim::validate_demand<Atom>({{Atom{0}, Atom{2}}, {Atom{4}, Atom{2}}}, {}, fx.member(), fx.known());
            }),
            ErrorKind::NotInjective);
}

TEST(Demand, ViolationNamesThePair) {
  Fixture fx;
  try {
    homlim::validate_demand<Atom>({{Atom{0}, Atom{1}}}, {{1, 1}}, fx.member(), fx.known());
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("a0"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("S1"), std::string::npos);
  }
}

TEST(Demand, PartialComposites) {
  Ctx ctx;
  homlim::Demand<Atom> d;
  d.id = 1;
  d.h = {{Atom{0}, Atom{1}}};
  d.f = {{10, 11}, {11, 12}};
  ctx.demands[1] = d;
  auto dd = homlim::Word::parse("d1.d1");
  EXPECT_EQ(homlim::f_word(ctx, homlim::Word{}, 10, 0), 10u);
  EXPECT_EQ(homlim::f_word(ctx, dd, 10, 0), 12u);
  EXPECT_EQ(homlim::f_word(ctx, dd, 11, 0), std::nullopt);
  EXPECT_EQ(homlim::f_word(ctx, homlim::Word::parse("d1'"), 12, 0), 11u);
  auto one = homlim::Word::parse("d1");
  EXPECT_EQ(homlim::h_word(ctx, homlim::Word{}, Atom{5}, 0), Atom{5});
  EXPECT_EQ(homlim::h_word(ctx, one, Atom{0}, 0), Atom{1});
  EXPECT_EQ(homlim::h_word(ctx, one, Atom{1}, 0), std::nullopt);
  EXPECT_EQ(homlim::h_word(ctx, homlim::Word::parse("d1'"), Atom{1}, 0), Atom{0});
  EXPECT_THROW(homlim::f_word(ctx, homlim::Word::parse("d2"), 10, 0), Error);
}

TEST(Demand, SatisfactionOnFragment) {
  Fixture fx;
  std::vector<std::pair<Atom, Atom>> h{{Atom{0}, Atom{1}}};
  std::vector<std::pair<SetId, SetId>> f;
  std::vector<Atom> frag{Atom{0}, Atom{1}, Atom{2}};
  auto id = [](const Atom& a) { return a; };
  EXPECT_TRUE(homlim::satisfaction_failure<Atom>(h, f, frag, id, id, fx.member()).has_value());
  std::vector<std::pair<Atom, Atom>> none;
  EXPECT_FALSE(homlim::satisfaction_failure<Atom>(none, f, frag, id, id, fx.member()).has_value());
}
