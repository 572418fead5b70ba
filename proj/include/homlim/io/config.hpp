#pragma once

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "homlim/base_set.hpp"
#include "homlim/error.hpp"
#include "homlim/grid/grid.hpp"
#include "homlim/text.hpp"
#include "homlim/tower/tower.hpp"

namespace homlim::io {

// One `demand` line: points and set tokens kept as text until a session is built.
struct DemandDecl {
  DemandId id = 0;
  unsigned step = 0;
  std::vector<std::pair<std::string, std::string>> h;
  std::vector<std::pair<std::string, std::string>> f;
  friend bool operator==(const DemandDecl&, const DemandDecl&) = default;
};

struct SessionConfig {
  std::string mode = "grid";  // tower | grid | grid-pruned
  unsigned atoms = 3;
  unsigned depth = 1;
  unsigned support_bound = 1;
  bool fin = true;
  std::uint64_t budget = 2'000'000;
  std::uint64_t enum_cap = 2'000'000;
  std::uint64_t separator_bound = 256;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, BaseSet>> sets;
  std::vector<DemandDecl> demands;
  std::vector<std::pair<std::string, bool>> eta;
  friend bool operator==(const SessionConfig&, const SessionConfig&) = default;

  std::optional<SetId> set_id(const std::string& name) const {
    for (std::size_t i = 0; i < sets.size(); ++i)
      if (sets[i].first == name) return static_cast<SetId>(i + 1);
    return std::nullopt;
  }
};

namespace detail {

// Whitespace-separated tokens with their 1-based columns.
inline std::vector<std::pair<std::string, std::size_t>> split_ws(const std::string& line) {
  std::vector<std::pair<std::string, std::size_t>> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i), i + 1);
    i = j;
  }
  return out;
}

// h entries must read as a point of either engine; the mode decides at build time.
inline void check_point_token(const std::string& tok, const std::string& where) {
  try {
    grid::Point::parse(tok);
    return;
  } catch (const Error&) {
  }
  try {
    tower::Point::parse(tok);
  } catch (const Error& e) {
    throw Error(ErrorKind::Syntax, where + ": bad point " + tok + " (" + e.what() + ")");
  }
}

inline bool is_ident(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

// Set tokens: an alias, S<n>, or Phi<n>(token).
inline void check_set_token(const std::string& tok, const SessionConfig& cfg, const std::string& where) {
  std::string inner = tok;
  while (inner.rfind("Phi", 0) == 0) {
    auto open = inner.find('(');
    if (open == std::string::npos || inner.back() != ')' ||
        inner.find_first_not_of("0123456789", 3) != open || open == 3)
      throw Error(ErrorKind::Syntax, where + ": bad set token " + tok);
    inner = inner.substr(open + 1, inner.size() - open - 2);
  }
  if (cfg.set_id(inner)) return;
  if (inner.size() > 1 && inner[0] == 'S' && inner.find_first_not_of("0123456789", 1) == std::string::npos) {
    auto id = std::stoull(inner.substr(1));
    if (id >= 1 && id <= cfg.sets.size()) return;
  }
  throw Error(ErrorKind::UndeclaredName, where + ": " + inner);
}

inline std::uint64_t number(const std::string& tok, const std::string& where) {
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
    throw Error(ErrorKind::Syntax, where + ": expected a number, got '" + tok + "'");
  return std::stoull(tok);
}

}  // namespace detail

// Line-based format; `#` starts a comment. Errors carry line and column.
inline SessionConfig parse_config(const std::string& source) {
  SessionConfig cfg;
  std::istringstream in(source);
  std::string raw;
  unsigned lineno = 0;
  std::set<DemandId> ids;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw.substr(0, raw.find('#'));
    auto cols = detail::split_ws(line);
    if (cols.empty()) continue;
    std::vector<std::string> toks;
    for (const auto& [t, c] : cols) toks.push_back(t);
    auto where = [&](std::size_t i) {
      return "line " + std::to_string(lineno) + " col " + std::to_string(cols[std::min(i, cols.size() - 1)].second);
    };
    auto need = [&](std::size_t n) {
      if (toks.size() != n) throw Error(ErrorKind::Syntax, where(0) + ": '" + toks[0] + "' takes " + std::to_string(n - 1) + " argument(s)");
    };
    const std::string& key = toks[0];
    if (key == "mode") {
      need(2);
      if (toks[1] != "tower" && toks[1] != "grid" && toks[1] != "grid-pruned")
        throw Error(ErrorKind::Syntax, where(1) + ": unknown mode " + toks[1]);
      cfg.mode = toks[1];
    } else if (key == "atoms") {
      need(2);
      cfg.atoms = static_cast<unsigned>(detail::number(toks[1], where(1)));
    } else if (key == "depth") {
      need(2);
      cfg.depth = static_cast<unsigned>(detail::number(toks[1], where(1)));
    } else if (key == "support-bound") {
      need(2);
      cfg.support_bound = static_cast<unsigned>(detail::number(toks[1], where(1)));
    } else if (key == "fin") {
      need(2);
      if (toks[1] != "yes" && toks[1] != "no") throw Error(ErrorKind::Syntax, where(1) + ": expected yes or no");
      cfg.fin = toks[1] == "yes";
    } else if (key == "budget") {
      need(3);
      auto v = detail::number(toks[2], where(2));
      if (toks[1] == "steps")
        cfg.budget = v;
      else if (toks[1] == "enum")
        cfg.enum_cap = v;
      else if (toks[1] == "separator")
        cfg.separator_bound = v;
      else
        throw Error(ErrorKind::Syntax, where(1) + ": unknown budget " + toks[1]);
    } else if (key == "seed") {
      need(2);
      cfg.seed = detail::number(toks[1], where(1));
    } else if (key == "set") {
      need(3);
      if (!detail::is_ident(toks[1]) || (toks[1][0] == 'S' && toks[1].find_first_not_of("0123456789", 1) == std::string::npos))
        throw Error(ErrorKind::Syntax, where(1) + ": bad set name " + toks[1]);
      if (cfg.set_id(toks[1])) throw Error(ErrorKind::Syntax, where(1) + ": set " + toks[1] + " declared twice");
      BaseSet b;
      try {
        b = BaseSet::parse(toks[2]);
      } catch (const Error& e) {
        std::string msg = e.what();
        throw Error(ErrorKind::Syntax, where(2) + ": " + msg.substr(msg.find(": ") + 2));
      }
      cfg.sets.emplace_back(toks[1], b);
    } else if (key == "demand") {
      if (toks.size() < 4 || toks[2] != "step") throw Error(ErrorKind::Syntax, where(0) + ": demand dN step K [h ...] [f ...]");
      DemandDecl d;
      if (toks[1].size() < 2 || toks[1][0] != 'd') throw Error(ErrorKind::Syntax, where(1) + ": demand id must be dN");
      d.id = static_cast<DemandId>(detail::number(toks[1].substr(1), where(1)));
      if (!ids.insert(d.id).second) throw Error(ErrorKind::InvalidDemand, where(1) + ": duplicate demand " + toks[1]);
      d.step = static_cast<unsigned>(detail::number(toks[3], where(3)));
      int section = 0;  // 1 = h, 2 = f
      for (std::size_t i = 4; i < toks.size(); ++i) {
        if (toks[i] == "h" && section == 0) {
          section = 1;
          continue;
        }
        if (toks[i] == "f" && section <= 1) {
          section = 2;
          continue;
        }
        auto gt = toks[i].find('>');
        if (section == 0 || gt == std::string::npos || gt == 0 || gt + 1 == toks[i].size())
          throw Error(ErrorKind::Syntax, where(i) + ": expected X>Y pair");
        std::string a = toks[i].substr(0, gt), b = toks[i].substr(gt + 1);
        if (section == 1) {
          detail::check_point_token(a, where(i));
          detail::check_point_token(b, where(i));
          d.h.emplace_back(a, b);
        } else {
          detail::check_set_token(a, cfg, where(i));
          detail::check_set_token(b, cfg, where(i));
          d.f.emplace_back(a, b);
        }
      }
      cfg.demands.push_back(std::move(d));
    } else if (key == "eta") {
      need(3);
      if (!cfg.set_id(toks[1])) throw Error(ErrorKind::UndeclaredName, where(1) + ": " + toks[1]);
      if (toks[2] != "0" && toks[2] != "1") throw Error(ErrorKind::Syntax, where(2) + ": eta pick is 0 or 1");
      cfg.eta.emplace_back(toks[1], toks[2] == "1");
    } else {
      throw Error(ErrorKind::Syntax, where(0) + ": unknown key " + key);
    }
  }
  return cfg;
}

inline std::string print_config(const SessionConfig& cfg) {
  std::ostringstream out;
  out << "mode " << cfg.mode << '\n';
  out << "atoms " << cfg.atoms << '\n';
  out << "depth " << cfg.depth << '\n';
  out << "support-bound " << cfg.support_bound << '\n';
  out << "fin " << (cfg.fin ? "yes" : "no") << '\n';
  out << "budget steps " << cfg.budget << '\n';
  out << "budget enum " << cfg.enum_cap << '\n';
  out << "budget separator " << cfg.separator_bound << '\n';
  out << "seed " << cfg.seed << '\n';
  for (const auto& [name, b] : cfg.sets) out << "set " << name << ' ' << b.str() << '\n';
  for (const auto& d : cfg.demands) {
    out << "demand d" << d.id << " step " << d.step;
    if (!d.h.empty()) {
      out << " h";
      for (const auto& [a, b] : d.h) out << ' ' << a << '>' << b;
    }
    if (!d.f.empty()) {
      out << " f";
      for (const auto& [a, b] : d.f) out << ' ' << a << '>' << b;
    }
    out << '\n';
  }
  for (const auto& [name, v] : cfg.eta) out << "eta " << name << ' ' << (v ? 1 : 0) << '\n';
  return out.str();
}

// HOMLIM_BUDGET, when set to a number, replaces the step budget.
inline std::uint64_t effective_budget(const SessionConfig& cfg) {
  if (const char* env = std::getenv("HOMLIM_BUDGET")) {
    std::string v(env);
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
      throw Error(ErrorKind::Usage, "HOMLIM_BUDGET must be a number");
    return std::stoull(v);
  }
  return cfg.budget;
}

// Resolves a set token against the config's aliases, producing the session's
// canonical text (S<n> with Φ wrappers), then hands it to `parse`.
template <class Parse>
SetId resolve_set(const SessionConfig& cfg, const std::string& tok, Parse&& parse) {
  std::string out;
  std::size_t i = 0;
  while (i < tok.size()) {
    if (std::isalpha(static_cast<unsigned char>(tok[i])) || tok[i] == '_') {
      std::size_t j = i;
      while (j < tok.size() && (std::isalnum(static_cast<unsigned char>(tok[j])) || tok[j] == '_' || tok[j] == '-')) ++j;
      std::string word = tok.substr(i, j - i);
      if (auto id = cfg.set_id(word); id && (j == tok.size() || tok[j] != '('))
        out += set_ref(*id);
      else
        out += word;
      i = j;
    } else {
      out += tok[i++];
    }
  }
  return parse(out);
}

inline grid::GridSession build_grid(const SessionConfig& cfg) {
  if (cfg.mode == "tower") throw Error(ErrorKind::Usage, "config is in tower mode");
  grid::GridOptions opt;
  opt.budget = effective_budget(cfg);
  opt.separator_bound = cfg.separator_bound;
  opt.fin_included = cfg.fin;
  grid::GridSession g(opt);
  for (const auto& [name, b] : cfg.sets) g.add_base(b);
  for (const auto& d : cfg.demands) {
    std::vector<std::pair<grid::Point, grid::Point>> h;
    for (const auto& [a, b] : d.h) h.emplace_back(grid::Point::parse(a), grid::Point::parse(b));
    std::vector<std::pair<SetId, SetId>> f;
    auto parse = [&](const std::string& s) { return g.parse_set(s); };
    for (const auto& [a, b] : d.f) f.emplace_back(resolve_set(cfg, a, parse), resolve_set(cfg, b, parse));
    g.add_demand(d.step, std::move(h), std::move(f), d.id);
  }
  return g;
}

inline tower::TowerSession build_tower(const SessionConfig& cfg) {
  if (cfg.mode != "tower") throw Error(ErrorKind::Usage, "config is not in tower mode");
  tower::TowerOptions opt;
  opt.atoms = cfg.atoms;
  opt.support_bound = cfg.support_bound;
  opt.budget = effective_budget(cfg);
  opt.enum_cap = cfg.enum_cap;
  opt.separator_bound = cfg.separator_bound;
  tower::TowerSession s(opt);
  for (const auto& [name, b] : cfg.sets) s.add_base(b);
  s.materialize(cfg.depth);
  for (const auto& d : cfg.demands) {
    std::vector<std::pair<tower::Point, tower::Point>> h;
    for (const auto& [a, b] : d.h) h.emplace_back(tower::Point::parse(a), tower::Point::parse(b));
    std::vector<std::pair<SetId, SetId>> f;
    auto parse = [&](const std::string& x) { return s.parse_set(x); };
    for (const auto& [a, b] : d.f) f.emplace_back(resolve_set(cfg, a, parse), resolve_set(cfg, b, parse));
    s.add_demand(d.step, std::move(h), std::move(f), d.id);
  }
  return s;
}

// η picks of a pruned config, as a selector over the session's set ids.
inline grid::EtaSelector build_eta(const SessionConfig& cfg, grid::GridSession& g) {
  std::vector<SetId> gens;
  std::map<SetId, bool> picks;
  for (const auto& [name, v] : cfg.eta) {
    SetId id = *cfg.set_id(name);
    gens.push_back(id);
    picks[id] = v;
  }
  return g.eta_make(gens, picks);
}

}  // namespace homlim::io
