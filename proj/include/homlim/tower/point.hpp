#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "homlim/base_set.hpp"
#include "homlim/error.hpp"
#include "homlim/text.hpp"

namespace homlim::tower {

inline constexpr std::size_t kMaxSupport = 16;

// Subset masks of a k-element sorted support, ordered as sorted point lists
// compared lexicographically ([] first). Depends only on k.
inline const std::vector<std::uint32_t>& subset_order(std::size_t k) {
  static std::mutex mu;
  static std::map<std::size_t, std::vector<std::uint32_t>> cache;
  std::lock_guard lock(mu);
  auto& out = cache[k];
  if (out.empty()) {
    out.resize(std::size_t{1} << k);
    std::iota(out.begin(), out.end(), 0u);
    auto seq = [](std::uint32_t m) {
      std::vector<int> s;
      for (int i = 0; m; ++i, m >>= 1)
        if (m & 1u) s.push_back(i);
      return s;
    };
    std::sort(out.begin(), out.end(), [&](std::uint32_t a, std::uint32_t b) { return seq(a) < seq(b); });
  }
  return out;
}

// A point of the tower universe: a base atom, or a B-point created when level
// `step` was extended. A B-point is a finite support of lower points together
// with a 0/1 table on every subset of the support.
class Point {
 public:
  Point() = default;

  static Point atom(AtomIndex a) {
    Point p;
    p.atom_ = a;
    return p;
  }

  // `table[mask]` is the value on the subset of `support` selected by `mask`
  // (bit i = support[i]); the support may be given in any order.
  static Point bpoint(unsigned step, std::vector<Point> support, const std::vector<bool>& table) {
    const std::size_t k = support.size();
    if (k > kMaxSupport) throw Error(ErrorKind::BudgetExceeded, "support too large");
    if (table.size() != (std::size_t{1} << k)) throw Error(ErrorKind::Syntax, "table size mismatch");
    for (const auto& q : support)
      if (q.level() > step)
        throw Error(ErrorKind::LevelMismatch, "support point " + q.str() + " above step " +
                                                  std::to_string(step));
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return support[a].str() < support[b].str(); });
    for (std::size_t i = 1; i < k; ++i)
      if (support[order[i]] == support[order[i - 1]])
        throw Error(ErrorKind::Syntax, "duplicate support point " + support[order[i]].str());
    auto node = std::make_shared<Node>();
    node->step = step;
    node->support.reserve(k);
    for (auto i : order) node->support.push_back(support[i]);
    node->table.assign(table.size(), false);
    for (std::uint32_t m = 0; m < table.size(); ++m) {
      std::uint32_t orig = 0;
      for (std::size_t i = 0; i < k; ++i)
        if (m & (1u << i)) orig |= 1u << order[i];
      node->table[m] = table[orig];
    }
    node->weight = 1;
    for (const auto& q : node->support) node->weight += q.weight();
    node->enc = encode(*node);
    Point p;
    p.node_ = std::move(node);
    return p;
  }

  bool is_atom() const { return !node_; }
  AtomIndex atom_index() const { return atom_; }
  unsigned level() const { return node_ ? node_->step + 1 : 0; }
  unsigned step() const { return node_ ? node_->step : 0; }
  const std::vector<Point>& support() const {
    static const std::vector<Point> none;
    return node_ ? node_->support : none;
  }
  bool table(std::uint32_t mask) const { return node_->table[mask]; }
  const std::vector<bool>& table_bits() const { return node_->table; }
  std::uint64_t weight() const { return node_ ? node_->weight : atom_ + 1; }

  std::string str() const { return node_ ? node_->enc : "a" + std::to_string(atom_); }

  static Point parse(text::Cursor& in) {
    if (in.accept("a")) return atom(in.nat());
    in.expect("b");
    auto step = static_cast<unsigned>(in.nat());
    in.expect("{[");
    std::vector<Point> support;
    if (!in.peek("]")) {
      do support.push_back(parse(in));
      while (in.accept(","));
    }
    in.expect("];[");
    std::vector<bool> table(std::size_t{1} << std::min(support.size(), kMaxSupport + 1));
    std::vector<bool> seen(table.size());
    if (!in.peek("]")) {
      do {
        in.expect("[");
        std::uint32_t mask = 0;
        if (!in.peek("]")) {
          do {
            auto q = parse(in);
            auto it = std::find(support.begin(), support.end(), q);
            if (it == support.end()) in.fail("table subset point not in support");
            mask |= 1u << (it - support.begin());
          } while (in.accept(","));
        }
        in.expect("]:");
        bool bit = in.accept("1");
        if (!bit) in.expect("0");
        if (mask >= table.size() || seen[mask]) in.fail("bad table entry");
        seen[mask] = true;
        table[mask] = bit;
      } while (in.accept(","));
    }
    in.expect("]}");
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) in.fail("incomplete table");
    return bpoint(step, std::move(support), table);
  }

  static Point parse(std::string_view s) {
    text::Cursor in(s);
    auto p = parse(in);
    in.expect_end();
    return p;
  }

  friend bool operator==(const Point& a, const Point& b) {
    if (a.is_atom() || b.is_atom()) return a.is_atom() && b.is_atom() && a.atom_ == b.atom_;
    return a.node_ == b.node_ || a.node_->enc == b.node_->enc;
  }

  // Canonical enumeration order: weight, then level, then encoding length,
  // then encoding. Finitely many points precede any point.
  friend bool canonical_less(const Point& a, const Point& b) {
    if (a.weight() != b.weight()) return a.weight() < b.weight();
    if (a.level() != b.level()) return a.level() < b.level();
    auto sa = a.str(), sb = b.str();
    if (sa.size() != sb.size()) return sa.size() < sb.size();
    return sa < sb;
  }

  friend bool operator<(const Point& a, const Point& b) { return canonical_less(a, b); }

 private:
  struct Node {
    unsigned step = 0;
    std::vector<Point> support;
    std::vector<bool> table;
    std::uint64_t weight = 1;
    std::string enc;
  };

  static std::string encode(const Node& n) {
    std::string out = "b" + std::to_string(n.step) + "{[";
    for (std::size_t i = 0; i < n.support.size(); ++i) {
      if (i) out += ',';
      out += n.support[i].str();
    }
    out += "];[";
    bool first = true;
    for (std::uint32_t m : subset_order(n.support.size())) {
      if (!first) out += ',';
      first = false;
      out += '[';
      bool f2 = true;
      for (std::size_t i = 0; i < n.support.size(); ++i) {
        if (!(m & (1u << i))) continue;
        if (!f2) out += ',';
        f2 = false;
        out += n.support[i].str();
      }
      out += "]:";
      out += n.table[m] ? '1' : '0';
    }
    return out + "]}";
  }

  std::shared_ptr<const Node> node_;
  AtomIndex atom_ = 0;
};

struct PointHash {
  std::size_t operator()(const Point& p) const noexcept {
    return p.is_atom() ? std::hash<AtomIndex>{}(p.atom_index()) : std::hash<std::string>{}(p.str());
  }
};

// Every B-point of the given step with support inside `pool`, |support| <= k,
// and every table, in canonical order.
inline std::vector<Point> enumerate_b(unsigned step, const std::vector<Point>& pool, std::size_t k,
                                      std::size_t cap = 5'000'000) {
  std::vector<Point> sorted = pool;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  k = std::min(k, sorted.size());
  if (k > kMaxSupport) throw Error(ErrorKind::BudgetExceeded, "support bound above 16");
  // Count first so the cap is checked before any allocation.
  long double total = 0;
  long double binom = 1;
  for (std::size_t s = 0; s <= k; ++s) {
    if (s > 0) binom = binom * static_cast<long double>(sorted.size() - s + 1) / s;
    total += binom * std::pow(2.0L, std::pow(2.0L, static_cast<long double>(s)));
    if (total > static_cast<long double>(cap))
      throw Error(ErrorKind::BudgetExceeded, "B-point enumeration exceeds cap " + std::to_string(cap));
  }
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(total));
  std::vector<Point> chosen;
  std::function<void(std::size_t)> rec = [&](std::size_t from) {
    const std::size_t entries = std::size_t{1} << chosen.size();
    std::vector<bool> table(entries);
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << entries); ++bits) {
      for (std::size_t m = 0; m < entries; ++m) table[m] = (bits >> m) & 1u;
      out.push_back(Point::bpoint(step, chosen, table));
    }
    if (chosen.size() == k) return;
    for (std::size_t i = from; i < sorted.size(); ++i) {
      chosen.push_back(sorted[i]);
      rec(i + 1);
      chosen.pop_back();
    }
  };
  rec(0);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace homlim::tower
