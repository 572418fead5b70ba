#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "homlim/base_set.hpp"
#include "homlim/error.hpp"
#include "homlim/text.hpp"
#include "homlim/word.hpp"

namespace homlim::grid {

// A string point x·w of the grid, flattened: a base atom followed by one
// nonempty reduced word per step, steps strictly increasing. The point
// a·[0:u]·[2:v] is ξ₃(v)(ξ₁(u)(a)) with both words appended formally.
class Point {
 public:
  using Entry = std::pair<unsigned, Word>;

  Point() = default;
  explicit Point(AtomIndex a) : atom_(a) {}
  Point(AtomIndex a, std::vector<Entry> history) : atom_(a), history_(std::move(history)) {
    for (std::size_t i = 0; i < history_.size(); ++i) {
      if (history_[i].second.empty()) throw Error(ErrorKind::Syntax, "empty history word");
      if (i && history_[i].first <= history_[i - 1].first)
        throw Error(ErrorKind::Syntax, "history steps must increase");
    }
  }

  static Point atom(AtomIndex a) { return Point(a); }

  AtomIndex base() const { return atom_; }
  bool is_atom() const { return history_.empty(); }
  const std::vector<Entry>& history() const { return history_; }
  unsigned level() const { return history_.empty() ? 0 : history_.back().first + 1; }

  // Total number of letters over all steps.
  std::size_t depth() const {
    std::size_t n = 0;
    for (const auto& [s, w] : history_) n += w.size();
    return n;
  }

  // The point without its last history entry.
  Point prefix() const {
    Point p = *this;
    p.history_.pop_back();
    return p;
  }

  // Replaces the word at the top step, dropping the entry when it cancels.
  Point with_top(Word w) const {
    Point p = *this;
    if (w.empty())
      p.history_.pop_back();
    else
      p.history_.back().second = std::move(w);
    return p;
  }

  Point pushed(unsigned step, Word w) const {
    Point p = *this;
    if (!w.empty()) p.history_.emplace_back(step, std::move(w));
    return p;
  }

  std::string str() const {
    std::string out = "a" + std::to_string(atom_);
    for (const auto& [s, w] : history_) {
      out += text::kMiddleDot;
      out += "[" + std::to_string(s) + ":" + w.str() + "]";
    }
    return out;
  }

  static Point parse(text::Cursor& in) {
    in.expect("a");
    AtomIndex a = in.nat();
    std::vector<Entry> hist;
    while (in.accept(text::kMiddleDot)) {
      in.expect("[");
      auto s = static_cast<unsigned>(in.nat());
      in.expect(":");
      Word w = Word::parse(in);
      in.expect("]");
      if (w.empty()) in.fail("empty history word");
      if (!hist.empty() && s <= hist.back().first) in.fail("history steps must increase");
      hist.emplace_back(s, std::move(w));
    }
    return Point(a, std::move(hist));
  }

  static Point parse(std::string_view s) {
    text::Cursor in(s);
    auto p = parse(in);
    in.expect_end();
    return p;
  }

  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point& a, const Point& b) {
    if (auto c = a.level() <=> b.level(); c != 0) return c;
    if (auto c = a.depth() <=> b.depth(); c != 0) return c;
    if (auto c = a.atom_ <=> b.atom_; c != 0) return c;
    return a.history_ <=> b.history_;
  }

 private:
  AtomIndex atom_ = 0;
  std::vector<Entry> history_;
};

struct PointHash {
  std::size_t operator()(const Point& p) const noexcept { return std::hash<std::string>{}(p.str()); }
};

}  // namespace homlim::grid
