#include <gtest/gtest.h>

#include <random>

#include "homlim/word.hpp"

using homlim::Letter;
using homlim::Word;

namespace {

// Naive reduction oracle: repeatedly delete the first adjacent inverse pair.
std::vector<Letter> naive_reduce(std::vector<Letter> v) {
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      if (v[i].demand == v[i + 1].demand && v[i].inverse != v[i + 1].inverse) {
        v.erase(v.begin() + i, v.begin() + i + 2);
        changed = true;
        break;
      }
    }
  }
  return v;
}

std::vector<Letter> random_letters(std::mt19937_64& rng, std::size_t max_len, unsigned gens) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<unsigned> g(1, gens);
  std::bernoulli_distribution sign(0.5);
  std::vector<Letter> out(len(rng));
  for (auto& c : out) c = Letter{g(rng), sign(rng)};
  return out;
}

std::vector<Word> all_up_to(std::size_t n) {
  std::vector<homlim::DemandId> gens{1, 2, 3};
  return homlim::reduced_words_up_to(gens, n);
}

}  // namespace

TEST(Word, ReduceExamples) {
  EXPECT_EQ(Word::reduce({{1, false}, {1, true}, {1, false}}), Word::letter(1));
  EXPECT_TRUE(Word::reduce(std::span<const Letter>{}).empty());
  EXPECT_TRUE(Word::reduce({{1, false}, {2, false}, {2, true}, {1, true}}).empty());
}

TEST(Word, ComposeAndInvertExamples) {
  auto d = Word::letter(4);
  EXPECT_EQ(homlim::compose(d, Word{}), d);
  EXPECT_TRUE(homlim::compose(d, d.inverse()).empty());
  EXPECT_TRUE(homlim::invert(Word{}).empty());
  EXPECT_EQ(homlim::invert(Word::parse("d1.d2'")).str(), "d2.d1'");
}

TEST(Word, TextRoundTrip) {
  for (const char* s : {"e", "d1", "d1'", "d12.d3'.d12"}) EXPECT_EQ(Word::parse(s).str(), s);
  EXPECT_EQ(Word::parse("d1.d1'").str(), "e");
  EXPECT_THROW(Word::parse("d"), homlim::Error);
  EXPECT_THROW(Word::parse("x1"), homlim::Error);
}

TEST(Word, GroupLawsExhaustiveLength4) {
  auto words = all_up_to(4);
  // 1 + 6 + 30 + 150 + 750 reduced words over 3 generators.
  ASSERT_EQ(words.size(), 937u);
  for (const auto& w : words) {
    EXPECT_EQ(Word::reduce(w.letters()), w);
    EXPECT_EQ(homlim::invert(homlim::invert(w)), w);
    EXPECT_TRUE(homlim::compose(w, homlim::invert(w)).empty());
    EXPECT_TRUE(homlim::compose(homlim::invert(w), w).empty());
    EXPECT_EQ(homlim::compose(w, Word{}), w);
    EXPECT_EQ(homlim::compose(Word{}, w), w);
  }
  auto short_words = all_up_to(2);
  for (const auto& u : short_words)
    for (const auto& v : short_words)
      for (const auto& w : short_words)
        EXPECT_EQ(homlim::compose(homlim::compose(u, v), w), homlim::compose(u, homlim::compose(v, w)));
}

TEST(Word, RandomTriplesAgreeWithNaiveReduction) {
  std::mt19937_64 rng(12345);
  for (int i = 0; i < 1000; ++i) {
    auto a = random_letters(rng, 8, 3), b = random_letters(rng, 8, 3), c = random_letters(rng, 8, 3);
    Word u = Word::reduce(a), v = Word::reduce(b), w = Word::reduce(c);
    std::vector<Letter> cat = a;
    cat.insert(cat.end(), b.begin(), b.end());
    cat.insert(cat.end(), c.begin(), c.end());
    auto expected = naive_reduce(cat);
    auto left = homlim::compose(homlim::compose(u, v), w);
    auto right = homlim::compose(u, homlim::compose(v, w));
    ASSERT_EQ(left, right);
    ASSERT_EQ(std::vector<Letter>(left.letters().begin(), left.letters().end()), expected);
  }
}

TEST(Word, CountFormula) {
  // Reduced words of length n over k generators: 2k(2k-1)^(n-1).
  for (unsigned k = 1; k <= 5; ++k) {
    std::vector<homlim::DemandId> gens;
    for (unsigned i = 1; i <= k; ++i) gens.push_back(i);
    for (std::size_t n = 1; n <= 4; ++n) {
      std::size_t expect = 2 * k;
      for (std::size_t i = 1; i < n; ++i) expect *= 2 * k - 1;
      EXPECT_EQ(homlim::reduced_words_of_length(gens, n).size(), expect) << k << " " << n;
    }
  }
}
