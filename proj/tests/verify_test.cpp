#include <gtest/gtest.h>

#include "homlim/io/session_io.hpp"
#include "homlim/verify/checks.hpp"

using namespace homlim;
using namespace homlim::verify;

namespace {

// Σ over subsets D of {0..K-1} with |D| <= k of 2^(2^|D|), by direct subset walk.
std::uint64_t brute_count(unsigned atoms, unsigned bound) {
  std::uint64_t total = 0;
  for (std::uint32_t d = 0; d < (1u << atoms); ++d) {
    unsigned s = __builtin_popcount(d);
    if (s <= bound) total += std::uint64_t{1} << (1u << s);
  }
  return total;
}

}  // namespace

TEST(MicroModel, CountsMatchSubsetWalk) {
  EXPECT_EQ(brute_count(3, 3), 318u);
  EXPECT_EQ(MicroModel::count_formula(3, 3), 318u);
  EXPECT_EQ(MicroModel(3, 3).points().size(), 321u);
  EXPECT_EQ(MicroModel(2, 2).bpoint_count(), 26u);
  EXPECT_EQ(MicroModel(2, 2).points().size(), 28u);
  for (unsigned k = 0; k <= 3; ++k)
    for (unsigned K = 0; K <= 4; ++K)
      if (K <= 3 || k <= 2) EXPECT_EQ(MicroModel::count_formula(K, k), brute_count(K, k)) << K << " " << k;
}

TEST(MicroModel, TableMembership) {
  // support {a0,a1}, table 1 exactly on {a1}
  auto p = tower::Point::bpoint(0, {tower::Point::atom(0), tower::Point::atom(1)}, {false, false, true, false});
  EXPECT_FALSE(MicroModel::member(p, 0b000));
  EXPECT_FALSE(MicroModel::member(p, 0b001));
  EXPECT_TRUE(MicroModel::member(p, 0b010));
  EXPECT_TRUE(MicroModel::member(p, 0b110));
  EXPECT_FALSE(MicroModel::member(p, 0b011));
  EXPECT_THROW(MicroModel(5, 3), Error);
}

TEST(Checks, EveryCheckPasses) {
  for (const auto& r : run_checks(check_names(), 7)) {
    EXPECT_TRUE(r.pass) << r.name << ": " << (r.witnesses.empty() ? "" : r.witnesses.front());
  }
}

TEST(Checks, MicroEnumerationCounts) {
  auto r = check_micro_enumeration();
  ASSERT_TRUE(r.pass);
  EXPECT_EQ(r.counts["bpoints"], 318u);
  EXPECT_EQ(r.counts["points"], 321u);
  EXPECT_EQ(r.counts["membership_checks"], 321u * 8);
}

TEST(Checks, NegativeControlReportsWitness) {
  auto r = check_homogeneity_negative_control();
  EXPECT_TRUE(r.pass);
  ASSERT_FALSE(r.witnesses.empty());
  EXPECT_NE(r.witnesses.front().find("detected"), std::string::npos);
}

TEST(Checks, IndependenceFailsWhenDemandTooHigh) {
  // Two atoms, support bound 1: no cell can hold a thousand witnesses.
  auto r = check_independence(2, 1, 1, 1000, 3);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.witnesses.empty());
}

TEST(Checks, DisjointRejectsNonComplementPair) {
  auto g = pruned_session();
  try {
    check_disjoint(g, 1, 3, 1, 1, 4);
    FAIL() << "evens and fin{0} accepted as a pair";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotComplementClosed);
  }
}

TEST(Checks, TrivialGuard) {
  EXPECT_EQ(trivial_type({Family::Kind::Singletons, {}}), 3);
  EXPECT_EQ(trivial_type({Family::Kind::Fin, {}}), 0);
  EXPECT_EQ(trivial_type({Family::Kind::Generated, {BaseSet::everything()}}), 2);
  auto w = fin_witness();
  ASSERT_TRUE(w.has_value());
  EXPECT_NE(w->find("sizes 1 != 2"), std::string::npos);
}

TEST(Checks, SeedChangesSamplesNotOutcome) {
  auto a = check_homogeneity_sample(1, 20);
  auto b = check_homogeneity_sample(2, 20);
  EXPECT_TRUE(a.pass);
  EXPECT_TRUE(b.pass);
  auto a2 = check_homogeneity_sample(1, 20);
  EXPECT_EQ(a.to_json().dump(), a2.to_json().dump());
}

TEST(Checks, UnknownName) { EXPECT_THROW(run_check("nope", 1), Error); }

TEST(Certificate, DeterministicAndReadable) {
  auto names = check_names();
  auto c1 = io::write_certificate("x", 7, run_checks(names, 7));
  auto c2 = io::write_certificate("x", 7, run_checks(names, 7));
  EXPECT_EQ(c1, c2);
  auto back = io::read_certificate_checks(c1);
  ASSERT_EQ(back.size(), names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    EXPECT_EQ(back[i].name, names[i]);
    EXPECT_TRUE(back[i].pass);
  }
  EXPECT_EQ(c1.find("elapsed"), std::string::npos);
  EXPECT_THROW(io::read_certificate_checks("{broken"), Error);
}
