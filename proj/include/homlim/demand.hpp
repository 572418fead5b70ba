#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "homlim/error.hpp"
#include "homlim/word.hpp"

namespace homlim {

using SetId = std::uint32_t;

inline std::string set_ref(SetId id) { return "S" + std::to_string(id); }

// A pair of finite injections, one on points and one on set names, obeying
// x in X <=> h(x) in f(X) on their domains.
template <class Point>
struct Demand {
  DemandId id = 0;
  unsigned level = 0;
  std::vector<std::pair<Point, Point>> h;
  std::vector<std::pair<SetId, SetId>> f;

  std::optional<Point> h_image(const Point& p, bool inverse = false) const {
    for (const auto& [x, y] : h) {
      if (!inverse && x == p) return y;
      if (inverse && y == p) return x;
    }
    return std::nullopt;
  }

  std::optional<SetId> f_image(SetId s, bool inverse = false) const {
    for (auto [x, y] : f) {
      if (!inverse && x == s) return y;
      if (inverse && y == s) return x;
    }
    return std::nullopt;
  }

  std::optional<Point> h_image(const Point& p, Letter c) const { return h_image(p, c.inverse); }
  std::optional<SetId> f_image(SetId s, Letter c) const { return f_image(s, c.inverse); }

  bool empty() const { return h.empty() && f.empty(); }

  std::vector<Point> h_points() const {
    std::vector<Point> out;
    for (const auto& [x, y] : h) {
      out.push_back(x);
      out.push_back(y);
    }
    return out;
  }

  std::vector<SetId> f_sets() const {
    std::vector<SetId> out;
    for (auto [x, y] : f) {
      out.push_back(x);
      out.push_back(y);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

// Checks injectivity and the compatibility law. `member(p, S)` decides
// membership, `known(S)` says whether a set name is registered.
template <class Point, class Member, class Known>
Demand<Point> validate_demand(std::vector<std::pair<Point, Point>> h,
                              std::vector<std::pair<SetId, SetId>> f, Member&& member,
                              Known&& known) {
  for (auto [x, y] : f) {
    if (!known(x)) throw Error(ErrorKind::UnknownSetId, set_ref(x));
    if (!known(y)) throw Error(ErrorKind::UnknownSetId, set_ref(y));
  }
  for (std::size_t i = 0; i < h.size(); ++i)
    for (std::size_t j = i + 1; j < h.size(); ++j)
      if (h[i].first == h[j].first || h[i].second == h[j].second)
        throw Error(ErrorKind::NotInjective, "point map repeats " + h[i].first.str() + " or " +
                                                 h[i].second.str());
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = i + 1; j < f.size(); ++j)
      if (f[i].first == f[j].first || f[i].second == f[j].second)
        throw Error(ErrorKind::NotInjective, "set map repeats " + set_ref(f[i].first) + " or " +
                                                 set_ref(f[i].second));
  for (const auto& [x, hx] : h)
    for (auto [X, fX] : f)
      if (member(x, X) != member(hx, fX))
        throw Error(ErrorKind::CompatibilityViolation, "(" + x.str() + ", " + set_ref(X) + ")");
  Demand<Point> d;
  d.h = std::move(h);
  d.f = std::move(f);
  return d;
}

// Context interface for the partial composites f^w and h^w:
//   const Demand<P>* ctx.find_demand(DemandId)
//   std::optional<SetId> ctx.old_set_image(Letter, SetId, unsigned level)
//   P ctx.old_point_image(Letter, const P&, unsigned level)
// Letters registered at `level` act through their finite maps; letters from
// earlier levels act through the automorphism already chosen for them.
// The rightmost letter acts first, so f^{u∘v} = f^u ∘ f^v.
template <class Ctx>
std::optional<SetId> f_word(const Ctx& ctx, const Word& w, SetId x, unsigned level) {
  for (std::size_t i = w.size(); i-- > 0;) {
    Letter c = w[i];
    const auto* d = ctx.find_demand(c.demand);
    if (!d || d->level > level) throw Error(ErrorKind::UnknownWord, w.str());
    if (d->level == level) {
      auto y = d->f_image(x, c);
      if (!y) return std::nullopt;
      x = *y;
    } else {
      auto y = ctx.old_set_image(c, x, level);
      if (!y) return std::nullopt;
      x = *y;
    }
  }
  return x;
}

template <class Ctx, class Point>
std::optional<Point> h_word(const Ctx& ctx, const Word& w, Point p, unsigned level) {
  for (std::size_t i = w.size(); i-- > 0;) {
    Letter c = w[i];
    const auto* d = ctx.find_demand(c.demand);
    if (!d || d->level > level) throw Error(ErrorKind::UnknownWord, w.str());
    if (d->level == level) {
      auto q = d->h_image(p, c);
      if (!q) return std::nullopt;
      p = *q;
    } else {
      p = ctx.old_point_image(c, p, level);
    }
  }
  return p;
}

// Extensional satisfaction on a finite fragment: g agrees with h on its domain,
// and for every (S, T) pair and fragment point p, p in S <=> g(p) in T and
// p in T <=> g^-1(p) in S. Returns the first counterexample, if any.
template <class Point, class Apply, class Unapply, class Member>
std::optional<std::string> satisfaction_failure(
    std::span<const std::pair<Point, Point>> h, std::span<const std::pair<SetId, SetId>> sets,
    std::span<const Point> fragment, Apply&& apply, Unapply&& unapply, Member&& member) {
  for (const auto& [x, y] : h) {
    auto gx = apply(x);
    if (!(gx == y)) return "g(" + x.str() + ") = " + gx.str() + " != " + y.str();
  }
  for (auto [s, t] : sets) {
    for (const auto& p : fragment) {
      if (member(p, s) != member(apply(p), t))
        return "forward " + p.str() + " " + set_ref(s) + "->" + set_ref(t);
      if (member(p, t) != member(unapply(p), s))
        return "backward " + p.str() + " " + set_ref(t) + "->" + set_ref(s);
    }
  }
  return std::nullopt;
}

}  // namespace homlim
