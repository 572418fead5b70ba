#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "homlim/base_set.hpp"
#include "homlim/demand.hpp"
#include "homlim/error.hpp"
#include "homlim/text.hpp"
#include "homlim/tower/point.hpp"
#include "homlim/word.hpp"

namespace homlim::tower {

using PermId = std::uint32_t;
using TowerDemand = Demand<Point>;
using CellSignature = std::map<SetId, bool>;

struct TowerOptions {
  std::uint64_t atoms = 3;          // materialized atoms a0..a{atoms-1}
  std::size_t support_bound = 1;    // support bound for materialized B-points
  std::uint64_t budget = 5'000'000; // evaluation steps per top-level query
  std::size_t enum_cap = 2'000'000; // points per enumeration layer / per materialized step
  AtomIndex separator_bound = 256;  // atoms searched for separating witnesses
};

struct SetExpr {
  enum class Kind : std::uint8_t { Base, Lift, Image };
  Kind kind = Kind::Base;
  unsigned level = 0;
  BaseSet base;                // Base at level 0
  std::vector<Point> points;   // Base at level > 0: finite list, or its complement
  bool cofinite = false;
  SetId inner = 0;
  PermId perm = 0;
};

struct PermNode {
  enum class Kind : std::uint8_t { Identity, Atoms, Lift, Satisfier, Compose, Inverse };
  Kind kind = Kind::Identity;
  unsigned level = 0;
  std::map<AtomIndex, AtomIndex> atoms;  // Atoms: moved atoms only
  DemandId demand = 0;                   // Satisfier
  std::vector<PermId> parts;             // Compose: parts[0] applied last
  PermId inner = 0;                      // Lift, Inverse
};

class TowerSession {
 public:
  explicit TowerSession(TowerOptions opt = {}) : opt_(opt) {
    perms_.push_back(PermNode{});  // PermId 0 is the identity
    perm_names_["id"] = 0;
    std::vector<Point> atoms;
    for (AtomIndex a = 0; a < opt_.atoms; ++a) atoms.push_back(Point::atom(a));
    pools_.push_back(atoms);
  }

  const TowerOptions& options() const { return opt_; }
  void set_budget(std::uint64_t steps) { opt_.budget = steps; }

  // ---- materialized fragment ----

  // Extend the materialized fragment through level `depth`: each step adds all
  // B-points over the previous fragment within the support bound.
  void materialize(unsigned depth) {
    while (pools_.size() <= depth) {
      unsigned step = static_cast<unsigned>(pools_.size() - 1);
      auto next = pools_.back();
      auto fresh = enumerate_b(step, pools_.back(), opt_.support_bound, opt_.enum_cap);
      next.insert(next.end(), fresh.begin(), fresh.end());
      std::sort(next.begin(), next.end());
      pools_.push_back(std::move(next));
    }
  }

  unsigned depth() const { return static_cast<unsigned>(pools_.size() - 1); }

  // Materialized points of level <= n (n clamped to the built depth).
  const std::vector<Point>& fragment(unsigned n) const { return pools_[std::min<std::size_t>(n, pools_.size() - 1)]; }

  // ---- set registry ----

  std::size_t set_count() const { return sets_.size(); }
  bool known_set(SetId id) const { return id >= 1 && id <= sets_.size(); }
  const SetExpr& set(SetId id) const {
    if (!known_set(id)) throw Error(ErrorKind::UnknownSetId, set_ref(id));
    return sets_[id - 1];
  }
  unsigned set_level(SetId id) const { return set(id).level; }

  SetId add_base(const BaseSet& b) {
    SetExpr e;
    e.base = b;
    return intern(e);
  }

  // A finite (or cofinite) set of points at a level above 0.
  SetId add_points(unsigned level, std::vector<Point> pts, bool cofinite) {
    if (level == 0) throw Error(ErrorKind::LevelMismatch, "use a base set at level 0");
    for (const auto& p : pts)
      if (p.level() > level) throw Error(ErrorKind::LevelMismatch, p.str());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    SetExpr e;
    e.level = level;
    e.points = std::move(pts);
    e.cofinite = cofinite;
    return intern(e);
  }

  SetId phi_set(SetId x) {
    SetExpr e;
    e.kind = SetExpr::Kind::Lift;
    e.level = set_level(x) + 1;
    e.inner = x;
    return intern(e);
  }

  // Φ^k(x).
  SetId phi_chain(SetId x, unsigned k) {
    for (unsigned i = 0; i < k; ++i) x = phi_set(x);
    return x;
  }

  SetId perm_image(PermId pi, SetId x) {
    if (perm(pi).level > set_level(x))
      throw Error(ErrorKind::LevelMismatch, "permutation above set level");
    if (pi == 0) return x;
    SetExpr e;
    e.kind = SetExpr::Kind::Image;
    e.level = set_level(x);
    e.inner = x;
    e.perm = pi;
    return intern(e);
  }

  std::optional<Point> separator(SetId a, SetId b) const {
    auto it = separators_.find(std::minmax(a, b));
    if (it == separators_.end()) return std::nullopt;
    return it->second;
  }

  // Pairs of derived names found equal on every searched point.
  const std::set<std::pair<SetId, SetId>>& unseparated() const { return unseparated_; }

  std::string set_name(SetId id) const {
    const auto& e = set(id);
    switch (e.kind) {
      case SetExpr::Kind::Base: return set_ref(id);
      case SetExpr::Kind::Lift: return "Phi" + std::to_string(e.level - 1) + "(" + set_name(e.inner) + ")";
      case SetExpr::Kind::Image: return "img(" + perm_name(e.perm) + ")(" + set_name(e.inner) + ")";
    }
    return {};
  }

  // Resolves a registered name; Phi and img wrappers are registered on demand.
  SetId parse_set(text::Cursor& in) {
    if (in.accept("S")) {
      SetId id = static_cast<SetId>(in.nat());
      if (!known_set(id)) throw Error(ErrorKind::UnknownSetId, set_ref(id));
      return id;
    }
    if (in.accept("Phi")) {
      auto n = in.nat();
      in.expect("(");
      SetId x = parse_set(in);
      in.expect(")");
      if (set_level(x) != n) throw Error(ErrorKind::LevelMismatch, "Phi" + std::to_string(n) + " over level " + std::to_string(set_level(x)));
      return phi_set(x);
    }
    if (in.accept("img(")) {
      PermId p = parse_perm(in);
      in.expect(")(");
      SetId x = parse_set(in);
      in.expect(")");
      return perm_image(p, x);
    }
    in.fail("expected set expression");
  }

  SetId parse_set(std::string_view s) {
    text::Cursor in(s);
    auto id = parse_set(in);
    in.expect_end();
    return id;
  }

  // ---- membership ----

  bool member(const Point& p, SetId s) const {
    Budget budget(opt_.budget);
    return member(p, s, budget);
  }

  bool member(const Point& p, SetId s, Budget& budget) const {
    const auto& e = set(s);
    if (p.level() > e.level)
      throw Error(ErrorKind::LevelMismatch, p.str() + " above level of " + set_name(s));
    budget.charge();
    switch (e.kind) {
      case SetExpr::Kind::Base:
        if (e.level == 0) return e.base.contains(p.atom_index());
        return std::binary_search(e.points.begin(), e.points.end(), p) != e.cofinite;
      case SetExpr::Kind::Lift: {
        if (p.level() < e.level) return member(p, e.inner, budget);
        return p.table(support_mask(p, e.inner, budget));
      }
      case SetExpr::Kind::Image:
        return member(unapply(e.perm, p, budget), e.inner, budget);
    }
    return false;
  }

  // Membership in the direct limit: a set named at level n stands for its
  // Φ-chain at every higher level.
  bool limit_member(const Point& p, SetId s) const {
    Budget budget(opt_.budget);
    return limit_member(p, s, budget);
  }

  bool limit_member(const Point& p, SetId s, Budget& budget) const {
    if (p.level() <= set_level(s)) return member(p, s, budget);
    budget.charge();
    std::uint32_t mask = 0;
    const auto& sup = p.support();
    for (std::size_t i = 0; i < sup.size(); ++i)
      if (limit_member(sup[i], s, budget)) mask |= 1u << i;
    return p.table(mask);
  }

  // ---- permutation handles ----

  const PermNode& perm(PermId id) const {
    if (id >= perms_.size()) throw Error(ErrorKind::Syntax, "unknown permutation handle " + std::to_string(id));
    return perms_[id];
  }

  PermId identity() const { return 0; }

  PermId atom_perm(std::map<AtomIndex, AtomIndex> sigma) {
    std::erase_if(sigma, [](const auto& kv) { return kv.first == kv.second; });
    std::set<AtomIndex> dom, ran;
    for (auto [a, b] : sigma) {
      dom.insert(a);
      ran.insert(b);
    }
    if (dom != ran || ran.size() != sigma.size())
      throw Error(ErrorKind::NotInjective, "atom map is not a finite permutation");
    if (sigma.empty()) return 0;
    PermNode n;
    n.kind = PermNode::Kind::Atoms;
    n.atoms = std::move(sigma);
    return intern_perm(std::move(n));
  }

  PermId swap(AtomIndex a, AtomIndex b) { return atom_perm({{a, b}, {b, a}}); }

  PermId phi_perm(PermId sigma) {
    PermNode n;
    n.kind = PermNode::Kind::Lift;
    n.level = perm(sigma).level + 1;
    n.inner = sigma;
    return intern_perm(std::move(n));
  }

  PermId compose(std::vector<PermId> parts) {
    std::erase(parts, PermId{0});
    if (parts.empty()) return 0;
    if (parts.size() == 1) return parts[0];
    PermNode n;
    n.kind = PermNode::Kind::Compose;
    for (auto p : parts) n.level = std::max(n.level, perm(p).level);
    n.parts = std::move(parts);
    return intern_perm(std::move(n));
  }

  PermId inverse(PermId p) {
    if (p == 0) return 0;
    if (perm(p).kind == PermNode::Kind::Inverse) return perm(p).inner;
    PermNode n;
    n.kind = PermNode::Kind::Inverse;
    n.level = perm(p).level;
    n.inner = p;
    return intern_perm(std::move(n));
  }

  std::string perm_name(PermId id) const {
    const auto& n = perm(id);
    switch (n.kind) {
      case PermNode::Kind::Identity: return "id";
      case PermNode::Kind::Atoms: {
        std::string out = "atoms(";
        bool first = true;
        for (auto [a, b] : n.atoms) {
          if (!first) out += ',';
          first = false;
          out += std::to_string(a) + ">" + std::to_string(b);
        }
        return out + ")";
      }
      case PermNode::Kind::Lift: return "lift(" + perm_name(n.inner) + ")";
      case PermNode::Kind::Satisfier: return "sat(d" + std::to_string(n.demand) + ")";
      case PermNode::Kind::Compose: {
        std::string out = "comp(";
        for (std::size_t i = 0; i < n.parts.size(); ++i) {
          if (i) out += ',';
          out += perm_name(n.parts[i]);
        }
        return out + ")";
      }
      case PermNode::Kind::Inverse: return "inv(" + perm_name(n.inner) + ")";
    }
    return {};
  }

  PermId parse_perm(text::Cursor& in) {
    if (in.accept("id")) return 0;
    if (in.accept("atoms(")) {
      std::map<AtomIndex, AtomIndex> m;
      do {
        auto a = in.nat();
        in.expect(">");
        m[a] = in.nat();
      } while (in.accept(","));
      in.expect(")");
      return atom_perm(std::move(m));
    }
    if (in.accept("lift(")) {
      auto p = parse_perm(in);
      in.expect(")");
      return phi_perm(p);
    }
    if (in.accept("inv(")) {
      auto p = parse_perm(in);
      in.expect(")");
      return inverse(p);
    }
    if (in.accept("sat(d")) {
      auto d = static_cast<DemandId>(in.nat());
      in.expect(")");
      return satisfier(d);
    }
    if (in.accept("comp(")) {
      std::vector<PermId> parts{parse_perm(in)};
      while (in.accept(",")) parts.push_back(parse_perm(in));
      in.expect(")");
      return compose(std::move(parts));
    }
    in.fail("expected permutation handle");
  }

  Point apply(PermId id, const Point& p) const {
    Budget budget(opt_.budget);
    return apply(id, p, budget);
  }
  Point unapply(PermId id, const Point& p) const {
    Budget budget(opt_.budget);
    return unapply(id, p, budget);
  }

  Point apply(PermId id, const Point& p, Budget& budget) const { return act(id, p, false, budget); }
  Point unapply(PermId id, const Point& p, Budget& budget) const { return act(id, p, true, budget); }

  // ---- demands and satisfiers ----

  // Registers a level-n demand; its satisfier acts on level n+1.
  DemandId add_demand(unsigned level, std::vector<std::pair<Point, Point>> h,
                      std::vector<std::pair<SetId, SetId>> f, std::optional<DemandId> want = {}) {
    for (const auto& [x, y] : h)
      if (x.level() > level || y.level() > level)
        throw Error(ErrorKind::LevelMismatch, "demand point above level " + std::to_string(level));
    for (auto [x, y] : f) {
      if (known_set(x) && set_level(x) != level)
        throw Error(ErrorKind::LevelMismatch, set_name(x) + " is not a level-" + std::to_string(level) + " set");
      if (known_set(y) && set_level(y) != level)
        throw Error(ErrorKind::LevelMismatch, set_name(y) + " is not a level-" + std::to_string(level) + " set");
    }
    auto d = validate_demand(
        std::move(h), std::move(f), [&](const Point& p, SetId s) { return member(p, s); },
        [&](SetId s) { return known_set(s); });
    d.level = level;
    d.id = want ? *want : next_demand_id();
    if (demands_.count(d.id)) throw Error(ErrorKind::InvalidDemand, "duplicate demand d" + std::to_string(d.id));
    DemandId id = d.id;
    demands_.emplace(id, std::move(d));
    return id;
  }

  const TowerDemand* find_demand(DemandId id) const {
    auto it = demands_.find(id);
    return it == demands_.end() ? nullptr : &it->second;
  }
  const TowerDemand& demand(DemandId id) const {
    if (auto* d = find_demand(id)) return *d;
    throw Error(ErrorKind::UnknownWord, "d" + std::to_string(id));
  }
  std::vector<DemandId> demand_ids() const {
    std::vector<DemandId> out;
    for (const auto& [id, d] : demands_) out.push_back(id);
    return out;
  }

  // The cell-pairing satisfier of d, a permutation of level d.level + 1.
  PermId satisfier(DemandId id) {
    const auto& d = demand(id);
    if (d.empty()) return 0;
    if (auto it = sat_of_.find(id); it != sat_of_.end()) return it->second;
    // Lifted names for the sets of d, one level up.
    auto st = std::make_shared<Pairing>();
    for (auto [x, y] : d.f) {
      st->src_sets.push_back(phi_set(x));
      st->dst_sets.push_back(phi_set(y));
    }
    PermNode n;
    n.kind = PermNode::Kind::Satisfier;
    n.level = d.level + 1;
    n.demand = id;
    PermId pid = intern_perm(std::move(n));
    pairings_[pid] = st;
    sat_of_[id] = pid;
    // Validity puts every h-pair in matching cells; a failure here is a defect.
    Budget budget(opt_.budget);
    for (const auto& [x, y] : d.h)
      if (signature(*st, x, false, budget) != signature(*st, y, true, budget))
        throw Error(ErrorKind::CompatibilityViolation, "h-pair " + x.str() + ">" + y.str() + " crosses cells");
    return pid;
  }

  // The Φ-image of d: same points, lifted sets.
  std::vector<std::pair<SetId, SetId>> lifted_sets(DemandId id) {
    std::vector<std::pair<SetId, SetId>> out;
    for (auto [x, y] : demand(id).f) out.emplace_back(phi_set(x), phi_set(y));
    return out;
  }

  // First failure of `g` against the Φ-image of d on the fragment, if any.
  std::optional<std::string> satisfies(PermId g, DemandId id, const std::vector<Point>& frag) {
    const auto& d = demand(id);
    auto sets = lifted_sets(id);
    return satisfaction_failure<Point>(
        d.h, sets, frag, [&](const Point& p) { return apply(g, p); },
        [&](const Point& p) { return unapply(g, p); },
        [&](const Point& p, SetId s) { return limit_member(p, s); });
  }

  // ---- independence ----

  // Constructive witnesses of the cell τ one level up: B-points of step n
  // whose support carries pairwise separators of the τ-sets.
  std::vector<Point> cell_witnesses(const CellSignature& tau, std::size_t limit, std::size_t bound) const {
    if (tau.empty()) {
      std::vector<Point> out;
      for (bool bit : {false, true})
        if (out.size() < limit) out.push_back(Point::bpoint(0, {}, {bit}));
      return out;
    }
    unsigned n = set_level(tau.begin()->first);
    for (auto [s, sign] : tau)
      if (set_level(s) != n) throw Error(ErrorKind::LevelMismatch, "cell sets on different levels");
    std::vector<SetId> ids;
    for (auto [s, sign] : tau) ids.push_back(s);
    std::vector<Point> core;
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        auto sep = separator(ids[i], ids[j]);
        if (!sep) throw Error(ErrorKind::SeparationFailure, set_name(ids[i]) + " vs " + set_name(ids[j]));
        if (std::find(core.begin(), core.end(), *sep) == core.end()) core.push_back(*sep);
      }
    if (core.size() > bound) return {};
    std::vector<Point> pad;
    for (const auto& p : fragment(n))
      if (std::find(core.begin(), core.end(), p) == core.end()) pad.push_back(p);
    std::vector<Point> out;
    std::set<std::string> seen;
    Budget budget(opt_.budget);
    std::vector<Point> support = core;
    std::function<void(std::size_t)> grow = [&](std::size_t from) {
      if (out.size() >= limit) return;
      emit_cell(n, tau, support, limit, out, seen, budget);
      if (support.size() >= bound) return;
      for (std::size_t i = from; i < pad.size() && out.size() < limit; ++i) {
        support.push_back(pad[i]);
        grow(i + 1);
        support.pop_back();
      }
    };
    grow(0);
    return out;
  }

 private:
  struct Pairing {
    std::vector<SetId> src_sets, dst_sets;
    std::uint64_t weight = 0;  // current enumeration layer
    std::size_t pos = 0;       // next index in that layer
    std::map<std::vector<bool>, std::vector<Point>> src, dst;
    std::unordered_map<Point, std::pair<std::vector<bool>, std::size_t>, PointHash> src_at, dst_at;
  };

  DemandId next_demand_id() const { return demands_.empty() ? 1 : demands_.rbegin()->first + 1; }

  SetId intern(const SetExpr& e) {
    std::string key = expr_key(e);
    if (auto it = set_names_.find(key); it != set_names_.end()) return it->second;
    SetId id = static_cast<SetId>(sets_.size() + 1);
    sets_.push_back(e);
    try {
      record_separators(id);
    } catch (...) {
      sets_.pop_back();
      throw;
    }
    set_names_[key] = id;
    return id;
  }

  std::string expr_key(const SetExpr& e) const {
    switch (e.kind) {
      case SetExpr::Kind::Base: {
        if (e.level == 0) return e.base.str();
        std::string out = (e.cofinite ? "cop" : "pts") + std::to_string(e.level) + "[";
        for (const auto& p : e.points) out += p.str() + ";";
        return out + "]";
      }
      case SetExpr::Kind::Lift: return "Phi(" + std::to_string(e.inner) + ")";
      case SetExpr::Kind::Image: return "img(" + std::to_string(e.perm) + "," + std::to_string(e.inner) + ")";
    }
    return {};
  }

  void record_separators(SetId id) {
    const auto& e = sets_[id - 1];
    for (SetId other = 1; other < id; ++other) {
      const auto& o = sets_[other - 1];
      if (o.level != e.level) continue;
      auto sep = find_separator(id, other);
      if (sep) {
        separators_[std::minmax(id, other)] = *sep;
        continue;
      }
      // Permutation images are derived names and may coincide with a
      // certified name; only certified names must be pairwise separated.
      if (e.kind == SetExpr::Kind::Image || o.kind == SetExpr::Kind::Image) {
        unseparated_.emplace(std::minmax(id, other));
        continue;
      }
      throw Error(ErrorKind::SeparationFailure,
                  "no separating point for " + set_name(id) + " and " + set_name(other));
    }
  }

  std::optional<Point> find_separator(SetId a, SetId b) const {
    const auto& ea = sets_[a - 1];
    const auto& eb = sets_[b - 1];
    if (ea.kind == SetExpr::Kind::Base && eb.kind == SetExpr::Kind::Base && ea.level == 0) {
      try {
        if (auto x = ea.base.first_difference(eb.base, opt_.separator_bound)) return Point::atom(*x);
        return std::nullopt;
      } catch (const Error&) {
        return std::nullopt;
      }
    }
    if (ea.kind == SetExpr::Kind::Lift && eb.kind == SetExpr::Kind::Lift) {
      if (auto s = separator(ea.inner, eb.inner)) return s;
    }
    Budget budget(opt_.budget);
    auto differs = [&](const Point& p) { return member(p, a, budget) != member(p, b, budget); };
    for (AtomIndex x = 0; x <= opt_.separator_bound; ++x)
      if (differs(Point::atom(x))) return Point::atom(x);
    for (const auto& p : fragment(ea.level))
      if (differs(p)) return p;
    if (ea.level > 0) {
      // One-point supports over the lower fragment separate lifted sets that
      // differ only through their tables.
      for (bool b0 : {false, true})
        for (bool b1 : {false, true}) {
          auto empty = Point::bpoint(ea.level - 1, {}, {b0});
          if (differs(empty)) return empty;
          for (const auto& q : fragment(ea.level - 1)) {
            auto p = Point::bpoint(ea.level - 1, {q}, {b0, b1});
            if (differs(p)) return p;
          }
        }
    }
    return std::nullopt;
  }

  PermId intern_perm(PermNode n) {
    perms_.push_back(std::move(n));
    PermId id = static_cast<PermId>(perms_.size() - 1);
    std::string name = perm_name(id);
    if (auto it = perm_names_.find(name); it != perm_names_.end()) {
      perms_.pop_back();
      return it->second;
    }
    perm_names_[name] = id;
    return id;
  }

  std::uint32_t support_mask(const Point& p, SetId s, Budget& budget) const {
    std::uint32_t mask = 0;
    const auto& sup = p.support();
    for (std::size_t i = 0; i < sup.size(); ++i)
      if (member(sup[i], s, budget)) mask |= 1u << i;
    return mask;
  }

  Point lift_rule(PermId id, const Point& p, bool inv, Budget& budget) const {
    std::vector<Point> sup;
    sup.reserve(p.support().size());
    for (const auto& q : p.support()) sup.push_back(act(id, q, inv, budget));
    return Point::bpoint(p.step(), std::move(sup), p.table_bits());
  }

  Point act(PermId id, const Point& p, bool inv, Budget& budget) const {
    const auto& n = perm(id);
    budget.charge();
    if (n.kind == PermNode::Kind::Identity) return p;
    if (p.level() > n.level) return lift_rule(id, p, inv, budget);
    switch (n.kind) {
      case PermNode::Kind::Identity: return p;
      case PermNode::Kind::Atoms: {
        if (inv) {
          for (auto [a, b] : n.atoms)
            if (b == p.atom_index()) return Point::atom(a);
          return p;
        }
        auto it = n.atoms.find(p.atom_index());
        return it == n.atoms.end() ? p : Point::atom(it->second);
      }
      case PermNode::Kind::Lift: return act(n.inner, p, inv, budget);
      case PermNode::Kind::Inverse: return act(n.inner, p, !inv, budget);
      case PermNode::Kind::Compose: {
        Point q = p;
        if (!inv)
          for (auto it = n.parts.rbegin(); it != n.parts.rend(); ++it) q = act(*it, q, false, budget);
        else
          for (auto part : n.parts) q = act(part, q, true, budget);
        return q;
      }
      case PermNode::Kind::Satisfier: return pair_point(id, p, inv, budget);
    }
    return p;
  }

  std::vector<bool> signature(const Pairing& st, const Point& p, bool dst, Budget& budget) const {
    const auto& sets = dst ? st.dst_sets : st.src_sets;
    std::vector<bool> sig;
    sig.reserve(sets.size());
    for (auto s : sets) sig.push_back(member(p, s, budget));
    return sig;
  }

  // The k-th point of a source cell (outside dom h) goes to the k-th point of
  // the matching target cell (outside ran h), both in canonical order.
  Point pair_point(PermId id, const Point& p, bool inv, Budget& budget) const {
    const auto& n = perms_[id];
    const auto& d = demands_.at(n.demand);
    if (auto q = d.h_image(p, inv)) return *q;
    std::lock_guard lock(*mu_);
    auto& st = *pairings_.at(id);
    auto& here_at = inv ? st.dst_at : st.src_at;
    auto& there = inv ? st.src : st.dst;
    while (!here_at.count(p)) scan(st, d, n.level, budget);
    auto [sig, k] = here_at.at(p);
    while (there[sig].size() <= k) scan(st, d, n.level, budget);
    return there[sig][k];
  }

  void scan(Pairing& st, const TowerDemand& d, unsigned level, Budget& budget) const {
    for (;;) {
      const auto& lay = layer(level, st.weight);
      if (st.pos < lay.size()) break;
      ++st.weight;
      st.pos = 0;
      if (st.weight > 4096) throw Error(ErrorKind::BudgetExceeded, "cell enumeration ran past weight cap");
    }
    const Point q = layer(level, st.weight)[st.pos++];
    budget.charge();
    bool in_dom = false, in_ran = false;
    for (const auto& [x, y] : d.h) {
      in_dom = in_dom || x == q;
      in_ran = in_ran || y == q;
    }
    if (!in_dom) {
      auto sig = signature(st, q, false, budget);
      auto& cell = st.src[sig];
      st.src_at.emplace(q, std::make_pair(sig, cell.size()));
      cell.push_back(q);
    }
    if (!in_ran) {
      auto sig = signature(st, q, true, budget);
      auto& cell = st.dst[sig];
      st.dst_at.emplace(q, std::make_pair(sig, cell.size()));
      cell.push_back(q);
    }
  }

 public:
  // Points of level <= L and exact weight w, in canonical order. Each layer is
  // finite; together they enumerate the level-L universe.
  const std::vector<Point>& layer(unsigned L, std::uint64_t w) const {
    std::lock_guard lock(*layer_mu_);
    auto key = std::make_pair(L, w);
    if (auto it = layers_.find(key); it != layers_.end()) return it->second;
    std::vector<Point> out;
    if (w >= 1) out.push_back(Point::atom(w - 1));
    for (unsigned s = 0; s < L && w >= 1; ++s) {
      // Candidate support points: level <= s and weight < w.
      std::vector<Point> cand;
      for (std::uint64_t v = 1; v + 1 <= w; ++v) {
        const auto& lv = layer(s, v);
        cand.insert(cand.end(), lv.begin(), lv.end());
      }
      std::vector<Point> chosen;
      std::function<void(std::size_t, std::uint64_t)> rec = [&](std::size_t from, std::uint64_t left) {
        if (left == 0) {
          const std::size_t entries = std::size_t{1} << chosen.size();
          if (entries >= 63 || out.size() + (std::uint64_t{1} << entries) > opt_.enum_cap)
            throw Error(ErrorKind::BudgetExceeded, "enumeration layer " + std::to_string(w) + " too large");
          std::vector<bool> table(entries);
          for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << entries); ++bits) {
            for (std::size_t m = 0; m < entries; ++m) table[m] = (bits >> m) & 1u;
            out.push_back(Point::bpoint(s, chosen, table));
          }
          return;
        }
        for (std::size_t i = from; i < cand.size(); ++i) {
          if (cand[i].weight() > left) continue;
          chosen.push_back(cand[i]);
          rec(i + 1, left - cand[i].weight());
          chosen.pop_back();
        }
      };
      rec(0, w - 1);
    }
    std::sort(out.begin(), out.end());
    return layers_.emplace(key, std::move(out)).first->second;
  }

 private:
  void emit_cell(unsigned n, const CellSignature& tau, const std::vector<Point>& support, std::size_t limit,
                 std::vector<Point>& out, std::set<std::string>& seen, Budget& budget) const {
    const std::size_t k = support.size();
    const std::size_t entries = std::size_t{1} << k;
    std::vector<int> forced(entries, -1);
    for (auto [s, sign] : tau) {
      std::uint32_t mask = 0;
      for (std::size_t i = 0; i < k; ++i)
        if (member(support[i], s, budget)) mask |= 1u << i;
      if (forced[mask] >= 0 && forced[mask] != static_cast<int>(sign)) return;
      forced[mask] = sign;
    }
    std::vector<std::size_t> free;
    for (std::size_t m = 0; m < entries; ++m)
      if (forced[m] < 0) free.push_back(m);
    if (free.size() >= 63) throw Error(ErrorKind::BudgetExceeded, "too many free table entries");
    std::vector<bool> table(entries);
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << free.size()) && out.size() < limit; ++bits) {
      for (std::size_t m = 0; m < entries; ++m) table[m] = forced[m] > 0;
      for (std::size_t i = 0; i < free.size(); ++i) table[free[i]] = (bits >> i) & 1u;
      auto p = Point::bpoint(n, support, table);
      if (seen.insert(p.str()).second) out.push_back(p);
    }
  }

  TowerOptions opt_;
  std::vector<std::vector<Point>> pools_;
  std::vector<SetExpr> sets_;
  std::map<std::string, SetId> set_names_;
  std::map<std::pair<SetId, SetId>, Point> separators_;
  std::set<std::pair<SetId, SetId>> unseparated_;
  std::vector<PermNode> perms_;
  std::map<std::string, PermId> perm_names_;
  std::map<DemandId, TowerDemand> demands_;
  std::map<DemandId, PermId> sat_of_;
  std::map<PermId, std::shared_ptr<Pairing>> pairings_;
  std::unique_ptr<std::recursive_mutex> mu_ = std::make_unique<std::recursive_mutex>();
  std::unique_ptr<std::recursive_mutex> layer_mu_ = std::make_unique<std::recursive_mutex>();
  mutable std::map<std::pair<unsigned, std::uint64_t>, std::vector<Point>> layers_;
};

}  // namespace homlim::tower
