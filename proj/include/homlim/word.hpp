#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "homlim/text.hpp"

namespace homlim {

using DemandId = std::uint32_t;

// A generator of the free group over registered demands, or its inverse.
struct Letter {
  DemandId demand = 0;
  bool inverse = false;

  Letter inverted() const { return {demand, !inverse}; }

  friend auto operator<=>(const Letter&, const Letter&) = default;
  friend bool operator==(const Letter&, const Letter&) = default;
};

inline bool cancels(Letter a, Letter b) { return a.demand == b.demand && a.inverse != b.inverse; }

// A reduced word. The empty word is the unit e.
class Word {
 public:
  Word() = default;

  // Free reduction with a stack; idempotent on reduced input.
  static Word reduce(std::span<const Letter> letters) {
    Word w;
    for (Letter c : letters) w.push_back(c);
    return w;
  }

  static Word reduce(std::initializer_list<Letter> letters) {
    return reduce(std::span<const Letter>(letters.begin(), letters.size()));
  }

  static Word letter(DemandId d, bool inverse = false) { return reduce({Letter{d, inverse}}); }

  const std::vector<Letter>& letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  Letter operator[](std::size_t i) const { return letters_[i]; }
  Letter front() const { return letters_.front(); }
  Letter back() const { return letters_.back(); }

  Word inverse() const {
    Word w;
    w.letters_.reserve(letters_.size());
    for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) w.letters_.push_back(it->inverted());
    return w;
  }

  // Suffix/prefix slices of a reduced word are reduced.
  Word drop_front(std::size_t k = 1) const {
    Word w;
    w.letters_.assign(letters_.begin() + static_cast<std::ptrdiff_t>(k), letters_.end());
    return w;
  }
  Word take_front(std::size_t k) const {
    Word w;
    w.letters_.assign(letters_.begin(), letters_.begin() + static_cast<std::ptrdiff_t>(k));
    return w;
  }

  std::string str() const {
    if (letters_.empty()) return "e";
    std::string out;
    for (std::size_t i = 0; i < letters_.size(); ++i) {
      if (i) out += '.';
      out += 'd';
      out += std::to_string(letters_[i].demand);
      if (letters_[i].inverse) out += '\'';
    }
    return out;
  }

  static Word parse(text::Cursor& in) {
    if (in.accept("e")) return {};
    std::vector<Letter> raw;
    do {
      in.expect("d");
      auto id = in.nat();
      bool inv = in.accept("'");
      raw.push_back({static_cast<DemandId>(id), inv});
    } while (in.accept("."));
    return reduce(raw);
  }

  static Word parse(std::string_view s) {
    text::Cursor in(s);
    auto w = parse(in);
    in.expect_end();
    return w;
  }

  friend auto operator<=>(const Word&, const Word&) = default;
  friend bool operator==(const Word&, const Word&) = default;

 private:
  void push_back(Letter c) {
    if (!letters_.empty() && cancels(letters_.back(), c)) {
      letters_.pop_back();
    } else {
      letters_.push_back(c);
    }
  }

  friend Word compose(const Word& a, const Word& b);

  std::vector<Letter> letters_;
};

// a∘b: juxtaposition followed by cancellation at the seam.
inline Word compose(const Word& a, const Word& b) {
  Word w = a;
  for (Letter c : b.letters_) w.push_back(c);
  return w;
}

inline Word invert(const Word& w) { return w.inverse(); }

// All reduced words of length exactly `len` over the given generators, in
// lexicographic order of (demand, sign) per position.
inline std::vector<Word> reduced_words_of_length(std::span<const DemandId> gens, std::size_t len) {
  std::vector<Letter> alphabet;
  for (DemandId d : gens) {
    alphabet.push_back({d, false});
    alphabet.push_back({d, true});
  }
  std::vector<Word> out;
  std::vector<Letter> cur;
  std::function<void()> rec = [&] {
    if (cur.size() == len) {
      out.push_back(Word::reduce(cur));
      return;
    }
    for (Letter c : alphabet) {
      if (!cur.empty() && cancels(cur.back(), c)) continue;
      cur.push_back(c);
      rec();
      cur.pop_back();
    }
  };
  rec();
  return out;
}

inline std::vector<Word> reduced_words_up_to(std::span<const DemandId> gens, std::size_t max_len,
                                             bool include_unit = true) {
  std::vector<Word> out;
  for (std::size_t len = include_unit ? 0 : 1; len <= max_len; ++len) {
    auto layer = reduced_words_of_length(gens, len);
    out.insert(out.end(), layer.begin(), layer.end());
  }
  return out;
}

struct WordHash {
  std::size_t operator()(const Word& w) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (Letter c : w.letters()) h = (h ^ (c.demand * 2u + c.inverse)) * 1099511628211ull;
    return h;
  }
};

}  // namespace homlim
