#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "homlim/base_set.hpp"
#include "homlim/demand.hpp"
#include "homlim/error.hpp"
#include "homlim/grid/point.hpp"
#include "homlim/text.hpp"
#include "homlim/word.hpp"

namespace homlim::grid {

using GridDemand = Demand<Point>;

struct GridOptions {
  std::uint64_t budget = 2'000'000;  // evaluation steps per top-level query
  AtomIndex separator_bound = 256;   // atoms searched for separating witnesses
  AtomIndex candidate_atoms = 6;     // atoms used for non-atomic separator candidates
  bool fin_included = true;          // Fin(A0) belongs to the base family
};

// A set name in the grid. Base names live at step 0; Phi(n, X) and the orphan
// form Xi(n, w, Phi(n, X)) live at step n + 1.
struct Name {
  enum class Kind : std::uint8_t { Base, Phi, Xi };
  Kind kind = Kind::Base;
  unsigned step = 0;
  BaseSet base;
  SetId inner = 0;
  Word word;
};

// The A0-trace of a name: a registered base set, or a finite atom list.
struct Trace {
  bool in_family = false;
  SetId base = 0;
  std::vector<AtomIndex> atoms;
  unsigned bound = 0;
};

struct EtaSelector {
  std::map<SetId, bool> choice;
  bool operator()(SetId s) const { return choice.at(s); }
};

class GridSession {
 public:
  explicit GridSession(GridOptions opt = {}) : opt_(opt) {}

  const GridOptions& options() const { return opt_; }
  void set_budget(std::uint64_t steps) { opt_.budget = steps; }

  // ---- names ----

  std::size_t set_count() const { return names_.size(); }
  bool known_set(SetId id) const { return id >= 1 && id <= names_.size(); }
  const Name& name(SetId id) const {
    std::lock_guard lock(*mu_);
    if (!known_set(id)) throw Error(ErrorKind::UnknownSetId, set_ref(id));
    return names_[id - 1];
  }
  unsigned step(SetId id) const { return name(id).step; }

  SetId add_base(const BaseSet& b) {
    Name n;
    n.base = b;
    return intern(std::move(n));
  }

  std::optional<SetId> find_base(const BaseSet& b) const {
    auto it = keys_.find("base:" + b.str());
    if (it == keys_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<SetId> base_ids() const {
    std::vector<SetId> out;
    for (SetId id = 1; id <= names_.size(); ++id)
      if (names_[id - 1].kind == Name::Kind::Base) out.push_back(id);
    return out;
  }

  // Φ_n^{n+1}(X) for a step-n name X.
  SetId phi(unsigned n, SetId x) {
    if (step(x) != n) throw Error(ErrorKind::LevelMismatch, set_name(x) + " is not a step-" + std::to_string(n) + " name");
    Name nm;
    nm.kind = Name::Kind::Phi;
    nm.step = n + 1;
    nm.inner = x;
    return intern(std::move(nm));
  }

  // Φ-chain lifting a name from its step up to `target`.
  SetId lift_to(SetId x, unsigned target) {
    while (step(x) < target) x = phi(step(x), x);
    return x;
  }

  // Canonical name of ξ_{n+1}(w)[Φ_n^{n+1}(X)]: new letters act through f,
  // old letters through the step-n image of X; an undefined new letter leaves
  // an orphan name.
  SetId canonical_xi(unsigned n, const Word& w, SetId x) {
    if (step(x) != n) throw Error(ErrorKind::LevelMismatch, set_name(x) + " is not a step-" + std::to_string(n) + " name");
    auto key = std::make_tuple(n, w, x);
    {
      std::lock_guard lock(*mu_);
      if (auto it = canon_.find(key); it != canon_.end()) return it->second;
    }
    SetId cur = x;
    std::optional<SetId> out;
    for (std::size_t i = w.size(); i-- > 0;) {
      Letter c = w[i];
      const auto& d = letter_demand(c, n, w);
      if (d.level == n) {
        auto y = d.f_image(cur, c);
        if (!y) {
          Name nm;
          nm.kind = Name::Kind::Xi;
          nm.step = n + 1;
          nm.word = w.take_front(i + 1);
          nm.inner = phi(n, cur);
          out = intern(std::move(nm));
          break;
        }
        cur = *y;
      } else {
        cur = xi_image(n - 1, Word::reduce({c}), cur);
      }
    }
    if (!out) out = phi(n, cur);
    std::lock_guard lock(*mu_);
    canon_.emplace(key, *out);
    return *out;
  }

  // Name of ξ_{n+1}(u)[S] for a step-(n+1) name S.
  SetId xi_image(unsigned n, const Word& u, SetId s) {
    const Name nm = name(s);
    if (nm.step != n + 1) throw Error(ErrorKind::LevelMismatch, set_name(s) + " is not a step-" + std::to_string(n + 1) + " name");
    if (nm.kind == Name::Kind::Phi) return canonical_xi(n, u, nm.inner);
    if (nm.kind == Name::Kind::Xi) return canonical_xi(n, compose(u, nm.word), name(nm.inner).inner);
    throw Error(ErrorKind::LevelMismatch, "base name has no step-" + std::to_string(n) + " image");
  }

  std::string set_name(SetId id) const {
    const auto& nm = name(id);
    switch (nm.kind) {
      case Name::Kind::Base: return set_ref(id);
      case Name::Kind::Phi: return "Phi" + std::to_string(nm.step - 1) + "(" + set_name(nm.inner) + ")";
      case Name::Kind::Xi:
        return "xi" + std::to_string(nm.step - 1) + "(" + nm.word.str() + ")[" + set_name(nm.inner) + "]";
    }
    return {};
  }

  SetId parse_set(text::Cursor& in) {
    if (in.accept("S")) {
      SetId id = static_cast<SetId>(in.nat());
      if (!known_set(id)) throw Error(ErrorKind::UnknownSetId, set_ref(id));
      return id;
    }
    if (in.accept("Phi")) {
      auto n = static_cast<unsigned>(in.nat());
      in.expect("(");
      SetId x = parse_set(in);
      in.expect(")");
      return phi(n, x);
    }
    if (in.accept("xi")) {
      auto n = static_cast<unsigned>(in.nat());
      in.expect("(");
      Word w = Word::parse(in);
      in.expect(")[");
      SetId s = parse_set(in);
      in.expect("]");
      return xi_image(n, w, s);
    }
    in.fail("expected grid set name");
  }

  SetId parse_set(std::string_view s) {
    text::Cursor in(s);
    auto id = parse_set(in);
    in.expect_end();
    return id;
  }

  // ---- demands ----

  DemandId add_demand(unsigned step_n, std::vector<std::pair<Point, Point>> h,
                      std::vector<std::pair<SetId, SetId>> f, std::optional<DemandId> want = {}) {
    for (const auto& [x, y] : h) {
      for (const auto* p : {&x, &y}) {
        if (p->level() > step_n)
          throw Error(ErrorKind::LevelMismatch, p->str() + " above step " + std::to_string(step_n));
        if (!valid(*p)) throw Error(ErrorKind::InvalidDemand, p->str() + " is not a point of the universe");
      }
    }
    for (auto [x, y] : f)
      for (SetId s : {x, y})
        if (known_set(s) && step(s) != step_n)
          throw Error(ErrorKind::LevelMismatch, set_name(s) + " is not a step-" + std::to_string(step_n) + " name");
    auto d = validate_demand(
        std::move(h), std::move(f), [&](const Point& p, SetId s) { return member(p, s); },
        [&](SetId s) { return known_set(s); });
    d.level = step_n;
    d.id = want ? *want : (demands_.empty() ? 1 : demands_.rbegin()->first + 1);
    if (demands_.count(d.id)) throw Error(ErrorKind::InvalidDemand, "duplicate demand d" + std::to_string(d.id));
    // Distinct sets of the demand must be separated; m(d) is read off the
    // separators and the h-points.
    unsigned m = 0;
    for (const auto& p : d.h_points()) m = std::max(m, m_point(p));
    auto sets = d.f_sets();
    for (std::size_t i = 0; i < sets.size(); ++i)
      for (std::size_t j = i + 1; j < sets.size(); ++j) {
        auto sep = separator(sets[i], sets[j]);
        if (!sep)
          throw Error(ErrorKind::SeparationFailure, set_name(sets[i]) + " and " + set_name(sets[j]));
        m = std::max(m, m_point(*sep));
      }
    DemandId id = d.id;
    m_demand_[id] = m;
    demands_.emplace(id, std::move(d));
    return id;
  }

  const GridDemand* find_demand(DemandId id) const {
    auto it = demands_.find(id);
    return it == demands_.end() ? nullptr : &it->second;
  }
  const GridDemand& demand(DemandId id) const {
    if (auto* d = find_demand(id)) return *d;
    throw Error(ErrorKind::UnknownWord, "d" + std::to_string(id));
  }
  std::vector<DemandId> demand_ids() const {
    std::vector<DemandId> out;
    for (const auto& [id, d] : demands_) out.push_back(id);
    return out;
  }
  // Demands usable as letters at step n (registered at steps <= n).
  std::vector<DemandId> letters_at(unsigned n) const {
    std::vector<DemandId> out;
    for (const auto& [id, d] : demands_)
      if (d.level <= n) out.push_back(id);
    return out;
  }
  unsigned max_demand_step() const {
    unsigned s = 0;
    for (const auto& [id, d] : demands_) s = std::max(s, d.level);
    return s;
  }

  // ---- the action ----

  // A flattened string is a point of the universe when no prefix lies in the
  // domain of the h-map of the letter that first acted on it.
  bool valid(const Point& p) const {
    Point q(p.base());
    for (const auto& [s, w] : p.history()) {
      for (Letter c : w.letters()) {
        const auto* d = find_demand(c.demand);
        if (!d || d->level > s) return false;
      }
      Letter first = w.back();
      if (demand(first.demand).h_image(q, first)) return false;
      q = q.pushed(s, w);
    }
    return true;
  }

  // ξ_{n+1}(w) applied to a point of level <= n + 1; the rightmost letter acts first.
  Point xi_apply(unsigned n, const Word& w, const Point& p) const {
    Budget budget(opt_.budget);
    return xi_apply(n, w, p, budget);
  }

  Point xi_apply(unsigned n, const Word& w, const Point& p, Budget& budget) const {
    if (p.level() > n + 1)
      throw Error(ErrorKind::LevelMismatch, p.str() + " above level " + std::to_string(n + 1));
    Point cur = p;
    for (std::size_t i = w.size(); i-- > 0;) {
      budget.charge();
      Letter c = w[i];
      const auto& d = letter_demand(c, n, w);
      if (cur.level() <= n) {
        if (auto y = d.h_image(cur, c)) {
          cur = *y;
          continue;
        }
      }
      if (cur.level() == n + 1)
        cur = cur.with_top(compose(Word::reduce({c}), cur.history().back().second));
      else
        cur = cur.pushed(n, Word::reduce({c}));
    }
    return cur;
  }

  // The satisfier of d on the top level `top` (> d's step): ξ_top(d).
  Point satisfier_apply(DemandId id, unsigned top, const Point& p, bool inverse = false) const {
    if (top <= demand(id).level)
      throw Error(ErrorKind::LevelMismatch, "satisfier of d" + std::to_string(id) + " lives above step " +
                                                std::to_string(demand(id).level));
    return xi_apply(top - 1, Word::letter(id, inverse), p);
  }

  // ---- membership ----

  bool member(const Point& p, SetId s) {
    Budget budget(opt_.budget);
    return member(p, s, budget);
  }

  bool member(const Point& p, SetId s, Budget& budget) {
    const Name nm = name(s);
    if (p.level() > nm.step)
      throw Error(ErrorKind::LevelMismatch, p.str() + " above step of " + set_name(s));
    budget.charge();
    switch (nm.kind) {
      case Name::Kind::Base:
        return nm.base.contains(p.base());
      case Name::Kind::Phi: {
        const unsigned n = nm.step - 1;
        if (p.level() <= n) return member(p, nm.inner, budget);
        // Strip the most recent letter c of the step-n word.
        const Word& top = p.history().back().second;
        Letter c = top.front();
        Point rest = p.with_top(top.drop_front());
        const auto& d = letter_demand(c, n, top);
        SetId y;
        if (d.level == n) {
          auto pre = d.f_image(nm.inner, c.inverted());
          if (!pre) return false;
          y = *pre;
        } else {
          y = xi_image(n - 1, Word::reduce({c.inverted()}), nm.inner);
        }
        return member(rest, phi(n, y), budget);
      }
      case Name::Kind::Xi: {
        const unsigned n = nm.step - 1;
        return member(xi_apply(n, nm.word.inverse(), p, budget), nm.inner, budget);
      }
    }
    return false;
  }

  // Membership in the limit: a name stands for its Φ-chain above its step.
  bool limit_member(const Point& p, SetId s) { return member(p, lift_to(s, std::max(step(s), p.level()))); }

  // ---- f^w and h^w ----

  std::optional<SetId> old_set_image(Letter c, SetId x, unsigned level) {
    return xi_image(level - 1, Word::reduce({c}), x);
  }
  Point old_point_image(Letter c, const Point& p, unsigned level) const {
    return xi_apply(level - 1, Word::reduce({c}), p);
  }
  std::optional<Point> h_word(const Word& w, const Point& p, unsigned level) const {
    return homlim::h_word(*this, w, p, level);
  }

  // ---- levels ----

  unsigned m_demand(DemandId id) const {
    auto it = m_demand_.find(id);
    if (it == m_demand_.end()) throw Error(ErrorKind::UnknownWord, "d" + std::to_string(id));
    return it->second;
  }

  unsigned m_word(const Word& w) const {
    unsigned m = 0;
    for (Letter c : w.letters()) m = std::max(m, m_demand(c.demand));
    return m;
  }

  unsigned m_point(const Point& p) const {
    unsigned m = static_cast<unsigned>(p.base());
    for (const auto& [s, w] : p.history()) m = std::max(m, m_word(w));
    return m;
  }

  unsigned m_name(SetId s) const {
    const auto& nm = name(s);
    switch (nm.kind) {
      case Name::Kind::Base: return 0;
      case Name::Kind::Phi: return m_name(nm.inner);
      case Name::Kind::Xi: return std::max(m_word(nm.word), m_name(nm.inner));
    }
    return 0;
  }

  // d↾A^m: defined once m reaches m(d), and then for every larger m.
  std::optional<GridDemand> restrict_demand(DemandId id, unsigned m) const {
    if (m < m_demand(id)) return std::nullopt;
    return demand(id);
  }

  // A recorded point telling two names of the same step apart.
  std::optional<Point> separator(SetId a, SetId b) {
    if (a == b) return std::nullopt;
    auto key = std::minmax(a, b);
    if (auto it = separators_.find(key); it != separators_.end()) return it->second;
    auto sep = find_separator(a, b);
    if (sep) separators_[key] = *sep;
    return sep;
  }

  // Bound on the m-level of every point in the lower trace of an orphan.
  unsigned orphan_bound(SetId s) const {
    const auto& nm = name(s);
    if (nm.kind != Name::Kind::Xi) return 0;
    unsigned m = 0;
    for (Letter c : nm.word.letters())
      for (const auto& p : demand(c.demand).h_points()) m = std::max(m, m_point(p));
    return m;
  }

  Trace trace(SetId s) {
    const Name nm = name(s);
    Trace t;
    if (nm.kind == Name::Kind::Base) {
      t.in_family = true;
      t.base = s;
      return t;
    }
    if (nm.kind == Name::Kind::Phi) return trace(nm.inner);
    t.bound = orphan_bound(s);
    for (AtomIndex a = 0; a <= t.bound; ++a)
      if (member(Point(a), s)) t.atoms.push_back(a);
    return t;
  }

  std::string trace_str(const Trace& t) const {
    if (t.in_family) return "InFamily(" + set_ref(t.base) + ")";
    std::string out = "FiniteTrace[";
    for (std::size_t i = 0; i < t.atoms.size(); ++i) {
      if (i) out += ',';
      out += "a" + std::to_string(t.atoms[i]);
    }
    return out + "]";
  }

  // ---- enumeration ----

  // Points of level <= max_level over atoms <= max_atom with at most
  // max_letters letters in total, using letters accepted by `allow`.
  template <class Allow>
  std::vector<Point> enumerate_points(AtomIndex max_atom, unsigned max_level, std::size_t max_letters,
                                      Allow&& allow) const {
    std::vector<Point> out;
    for (AtomIndex a = 0; a <= max_atom; ++a) out.emplace_back(a);
    for (unsigned s = 0; s < max_level; ++s) {
      std::vector<DemandId> gens;
      for (auto id : letters_at(s))
        if (allow(id)) gens.push_back(id);
      if (gens.empty()) continue;
      std::vector<Point> fresh;
      for (const auto& q : out) {
        if (q.depth() >= max_letters) continue;
        for (const auto& w : reduced_words_up_to(gens, max_letters - q.depth(), false)) {
          Letter first = w.back();
          if (demand(first.demand).h_image(q, first)) continue;
          fresh.push_back(q.pushed(s, w));
        }
      }
      out.insert(out.end(), fresh.begin(), fresh.end());
    }
    return out;
  }

  std::vector<Point> enumerate_points(AtomIndex max_atom, unsigned max_level, std::size_t max_letters) const {
    return enumerate_points(max_atom, max_level, max_letters, [](DemandId) { return true; });
  }

  // Canonical names reachable from the base names through steps < max_step,
  // using words of total length <= max_letters; each with its depth.
  std::vector<std::pair<SetId, std::size_t>> enumerate_names(unsigned max_step, std::size_t max_letters) {
    return enumerate_names(max_step, max_letters, [](DemandId) { return true; });
  }

  template <class Allow>
  std::vector<std::pair<SetId, std::size_t>> enumerate_names(unsigned max_step, std::size_t max_letters,
                                                             Allow&& allow) {
    std::map<SetId, std::size_t> seen;
    std::vector<std::pair<SetId, std::size_t>> layer;
    for (auto id : base_ids()) layer.emplace_back(id, 0);
    for (auto [id, dep] : layer) seen[id] = dep;
    for (unsigned s = 0; s < max_step; ++s) {
      std::vector<DemandId> gens;
      for (auto id : letters_at(s))
        if (allow(id)) gens.push_back(id);
      std::vector<std::pair<SetId, std::size_t>> next;
      std::set<SetId> here;
      for (auto [x, dep] : layer) {
        auto words = reduced_words_up_to(gens, max_letters - dep, true);
        for (const auto& w : words) {
          SetId y = canonical_xi(s, w, x);
          std::size_t nd = dep + w.size();
          if (!seen.count(y) || seen[y] > nd) seen[y] = nd;
          if (here.insert(y).second) next.emplace_back(y, nd);
        }
      }
      for (auto& [y, nd] : next) nd = seen[y];
      layer = std::move(next);
    }
    return {seen.begin(), seen.end()};
  }

  // ---- pairwise incompatibility ----

  // The complementary partner of a name: base complement, carried through Φ
  // and through the orphan's word.
  std::optional<SetId> partner(SetId s) {
    const Name nm = name(s);
    switch (nm.kind) {
      case Name::Kind::Base: return find_base(nm.base.complement());
      case Name::Kind::Phi: {
        auto p = partner(nm.inner);
        if (!p) return std::nullopt;
        return phi(nm.step - 1, *p);
      }
      case Name::Kind::Xi: {
        auto p = partner(name(nm.inner).inner);
        if (!p) return std::nullopt;
        return canonical_xi(nm.step - 1, nm.word, *p);
      }
    }
    return std::nullopt;
  }

  EtaSelector eta_make(const std::vector<SetId>& generators, const std::map<SetId, bool>& picks) {
    EtaSelector eta;
    std::set<SetId> gen(generators.begin(), generators.end());
    for (SetId g : generators) {
      auto c = partner(g);
      if (!c || !gen.count(*c) || name(g).kind != Name::Kind::Base)
        throw Error(ErrorKind::NotComplementClosed, set_name(g) + " has no listed complement");
    }
    for (SetId g : generators) {
      SetId c = *partner(g);
      auto pg = picks.find(g), pc = picks.find(c);
      bool v;
      if (pg != picks.end())
        v = pg->second;
      else if (pc != picks.end())
        v = !pc->second;
      else
        throw Error(ErrorKind::NotComplementClosed, "no pick for " + set_name(g));
      if (pg != picks.end() && pc != picks.end() && pg->second == pc->second)
        throw Error(ErrorKind::NotComplementClosed, "picks for " + set_name(g) + " and its complement agree");
      eta.choice[g] = v;
      eta.choice[c] = !v;
    }
    return eta;
  }

  // A demand is dropped when its f-range, or its f-domain (the range of its
  // inverse letter), holds a complementary pair.
  bool pruned(DemandId id) {
    const auto& d = demand(id);
    auto has_pair = [&](bool range) {
      std::set<SetId> side;
      for (auto [x, y] : d.f) side.insert(range ? y : x);
      for (SetId s : side) {
        auto p = partner(s);
        if (p && side.count(*p)) return true;
      }
      return false;
    };
    return has_pair(true) || has_pair(false);
  }

  std::set<DemandId> prune_alphabet() {
    std::set<DemandId> allowed;
    for (auto id : demand_ids())
      if (!pruned(id)) allowed.insert(id);
    return allowed;
  }

  // Membership in the pruned universe E: the orbit of the atoms under allowed words.
  bool pruned_member(const Point& p, const std::set<DemandId>& allowed) const {
    if (!valid(p)) return false;
    for (const auto& [s, w] : p.history())
      for (Letter c : w.letters())
        if (!allowed.count(c.demand)) return false;
    return true;
  }

 private:
  const GridDemand& letter_demand(Letter c, unsigned n, const Word& w) const {
    const auto* d = find_demand(c.demand);
    if (!d || d->level > n) throw Error(ErrorKind::UnknownWord, w.str() + " at step " + std::to_string(n));
    return *d;
  }

  SetId intern(Name nm) {
    std::string key;
    switch (nm.kind) {
      case Name::Kind::Base: key = "base:" + nm.base.str(); break;
      case Name::Kind::Phi: key = "phi:" + std::to_string(nm.inner); break;
      case Name::Kind::Xi: key = "xi:" + nm.word.str() + ":" + std::to_string(nm.inner); break;
    }
    std::lock_guard lock(*mu_);
    if (auto it = keys_.find(key); it != keys_.end()) return it->second;
    names_.push_back(std::move(nm));
    SetId id = static_cast<SetId>(names_.size());
    keys_.emplace(std::move(key), id);
    return id;
  }

  std::optional<Point> find_separator(SetId a, SetId b) {
    const Name na = name(a), nb = name(b);
    if (na.step != nb.step) throw Error(ErrorKind::LevelMismatch, "separator across steps");
    if (na.kind == Name::Kind::Base && nb.kind == Name::Kind::Base) {
      try {
        if (auto x = na.base.first_difference(nb.base, opt_.separator_bound)) return Point(*x);
      } catch (const Error&) {
      }
      return std::nullopt;
    }
    if (na.kind == Name::Kind::Phi && nb.kind == Name::Kind::Phi)
      if (auto s = separator(na.inner, nb.inner)) return s;
    Budget budget(opt_.budget);
    auto differs = [&](const Point& p) { return member(p, a, budget) != member(p, b, budget); };
    auto cands = enumerate_points(opt_.candidate_atoms, na.step, 2);
    std::stable_sort(cands.begin(), cands.end(),
                     [&](const Point& x, const Point& y) { return m_point(x) < m_point(y); });
    for (const auto& p : cands)
      if (valid(p) && differs(p)) return p;
    for (AtomIndex x = opt_.candidate_atoms + 1; x <= opt_.separator_bound; ++x)
      if (differs(Point(x))) return Point(x);
    return std::nullopt;
  }

  GridOptions opt_;
  std::deque<Name> names_;
  std::map<std::string, SetId> keys_;
  std::map<std::tuple<unsigned, Word, SetId>, SetId> canon_;
  std::map<std::pair<SetId, SetId>, Point> separators_;
  std::map<DemandId, GridDemand> demands_;
  std::map<DemandId, unsigned> m_demand_;
  std::unique_ptr<std::recursive_mutex> mu_ = std::make_unique<std::recursive_mutex>();
};

}  // namespace homlim::grid
