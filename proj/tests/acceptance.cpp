// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria (capped at 1). argv[1], when given, is the homlim binary
// used for the determinism criterion.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "homlim/io/session_io.hpp"
#include "homlim/verify/checks.hpp"

using namespace homlim;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

Outcome from_report(const verify::CheckReport& r, const std::string& summary) {
  Outcome o{r.pass, summary};
  if (!r.pass && !r.witnesses.empty()) o.detail += " first witness: " + r.witnesses.front();
  return o;
}

std::string count(const verify::CheckReport& r, const std::string& key) {
  auto it = r.counts.find(key);
  return it == r.counts.end() ? "?" : std::to_string(it->second);
}

// ---- an independent model of grid membership, step-0 demands only ----
//
// Words are vectors of signed demand numbers, leftmost letter applied last.
// Points are an atom plus (step, word) entries. Set descriptions are trees.

using OWord = std::vector<int>;

OWord reduce(const OWord& in) {
  OWord out;
  for (int c : in) {
    if (!out.empty() && out.back() == -c)
      out.pop_back();
    else
      out.push_back(c);
  }
  return out;
}

OWord inverse(const OWord& w) {
  OWord out(w.rbegin(), w.rend());
  for (int& c : out) c = -c;
  return out;
}

struct OPoint {
  unsigned atom = 0;
  std::vector<std::pair<unsigned, OWord>> entries;
  unsigned level() const { return entries.empty() ? 0 : entries.back().first + 1; }
};

std::string word_text(const OWord& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += '.';
    out += "d" + std::to_string(std::abs(w[i]));
    if (w[i] < 0) out += '\'';
  }
  return out;
}

std::string point_text(const OPoint& p) {
  std::string out = "a" + std::to_string(p.atom);
  for (const auto& [s, w] : p.entries) out += "\xC2\xB7[" + std::to_string(s) + ":" + word_text(w) + "]";
  return out;
}

struct ODemand {
  std::vector<std::pair<unsigned, unsigned>> h;  // atoms
  std::vector<std::pair<int, int>> f;            // base indices
};

struct Oracle {
  std::vector<BaseSet> bases;
  std::vector<ODemand> demands;  // demand k is d(k+1)

  std::optional<unsigned> h(int c, unsigned a) const {
    for (auto [x, y] : demands[std::abs(c) - 1].h) {
      if (c > 0 && x == a) return y;
      if (c < 0 && y == a) return x;
    }
    return std::nullopt;
  }

  // The base set sent to b by letter c, if any.
  std::optional<int> f_pre(int c, int b) const {
    for (auto [x, y] : demands[std::abs(c) - 1].f) {
      if (c > 0 && y == b) return x;
      if (c < 0 && x == b) return y;
    }
    return std::nullopt;
  }

  OPoint act(unsigned n, const OWord& w, OPoint p) const {
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
      int c = *it;
      if (p.entries.empty()) {
        if (auto y = h(c, p.atom)) {
          p.atom = *y;
          continue;
        }
      }
      if (p.level() == n + 1) {
        OWord top{c};
        top.insert(top.end(), p.entries.back().second.begin(), p.entries.back().second.end());
        top = reduce(top);
        if (top.empty())
          p.entries.pop_back();
        else
          p.entries.back().second = top;
      } else {
        p.entries.emplace_back(n, OWord{c});
      }
    }
    return p;
  }
};

struct Desc {
  enum Kind { Base, Phi, Img } kind = Base;
  unsigned n = 0;
  int base = 0;
  OWord word;
  std::shared_ptr<Desc> inner;

  unsigned step() const { return kind == Base ? 0 : n + 1; }
  std::string text() const {
    switch (kind) {
      case Base: return "S" + std::to_string(base + 1);
      case Phi: return "Phi" + std::to_string(n) + "(" + inner->text() + ")";
      case Img: return "xi" + std::to_string(n) + "(" + word_text(word) + ")[" + inner->text() + "]";
    }
    return {};
  }
};

using DescP = std::shared_ptr<Desc>;

DescP base_desc(int b) { return std::make_shared<Desc>(Desc{Desc::Base, 0, b, {}, nullptr}); }
DescP phi_desc(unsigned n, DescP d) { return std::make_shared<Desc>(Desc{Desc::Phi, n, 0, {}, std::move(d)}); }
DescP img_desc(unsigned n, OWord w, DescP d) {
  return std::make_shared<Desc>(Desc{Desc::Img, n, 0, std::move(w), std::move(d)});
}

bool oracle_member(const Oracle& o, const OPoint& p, const DescP& d) {
  switch (d->kind) {
    case Desc::Base: return o.bases[d->base].contains(p.atom);
    case Desc::Img: return oracle_member(o, o.act(d->n, inverse(d->word), p), d->inner);
    case Desc::Phi: {
      const unsigned n = d->n;
      if (p.level() <= n) return oracle_member(o, p, d->inner);
      OPoint rest = p;
      OWord& top = rest.entries.back().second;
      int c = top.front();
      top.erase(top.begin());
      if (top.empty()) rest.entries.pop_back();
      if (n == 0) {
        auto pre = o.f_pre(c, d->inner->base);
        if (!pre) return false;
        return oracle_member(o, rest, phi_desc(0, base_desc(*pre)));
      }
      return oracle_member(o, rest, phi_desc(n, img_desc(n - 1, OWord{-c}, d->inner)));
    }
  }
  return false;
}

OWord random_word(verify::Rng& rng, std::size_t letters, std::size_t max_len) {
  OWord w;
  std::size_t len = 1 + verify::draw(rng, max_len);
  while (w.size() < len) {
    int c = static_cast<int>(1 + verify::draw(rng, letters));
    if (verify::draw(rng, 2)) c = -c;
    w = reduce([&] { auto v = w; v.push_back(c); return v; }());
  }
  return w;
}

DescP random_desc(verify::Rng& rng, unsigned step, std::size_t bases, std::size_t letters) {
  if (step == 0) return base_desc(static_cast<int>(verify::draw(rng, bases)));
  auto lower = phi_desc(step - 1, random_desc(rng, step - 1, bases, letters));
  if (verify::draw(rng, 2)) return lower;
  return img_desc(step - 1, random_word(rng, letters, 2), lower);
}

Outcome grid_membership_oracle(std::uint64_t seed, unsigned queries) {
  Oracle o;
  o.bases = {BaseSet::evens(), BaseSet::odds(), BaseSet::powers(2), BaseSet::powers(2, true)};
  o.demands = {{{{0, 1}}, {{0, 1}, {1, 0}}},
               {{{1, 2}}, {{2, 2}}},
               {{{3, 5}}, {{0, 0}}},
               {{}, {{2, 3}}},
               {{{2, 6}}, {{1, 1}}}};
  grid::GridSession g;
  for (const auto& b : o.bases) g.add_base(b);
  for (const auto& d : o.demands) {
    std::vector<std::pair<grid::Point, grid::Point>> h;
    for (auto [x, y] : d.h) h.emplace_back(grid::Point(x), grid::Point(y));
    std::vector<std::pair<SetId, SetId>> f;
    for (auto [x, y] : d.f) f.emplace_back(static_cast<SetId>(x + 1), static_cast<SetId>(y + 1));
    g.add_demand(0, h, f);
  }

  verify::Rng rng(seed);
  unsigned agree = 0, positive = 0;
  for (unsigned q = 0; q < queries; ++q) {
    OPoint p{static_cast<unsigned>(verify::draw(rng, 12)), {}};
    unsigned level = static_cast<unsigned>(verify::draw(rng, 4));
    for (unsigned t = 0; t < level; ++t)
      if (t + 1 == level || verify::draw(rng, 2)) p = o.act(t, random_word(rng, o.demands.size(), 2), p);
    unsigned step = static_cast<unsigned>(verify::draw(rng, 4));
    auto d = random_desc(rng, step, o.bases.size(), o.demands.size());
    for (unsigned s = step; s < p.level(); ++s) d = phi_desc(s, d);
    bool want = oracle_member(o, p, d);
    bool got;
    try {
      auto ep = grid::Point::parse(point_text(p));
      if (!g.valid(ep)) return {false, "engine rejects point " + point_text(p)};
      got = g.member(ep, g.parse_set(d->text()));
    } catch (const Error& e) {
      return {false, "query " + std::to_string(q) + " " + point_text(p) + " in " + d->text() + ": " + e.what()};
    }
    if (got != want)
      return {false, "query " + std::to_string(q) + ": " + point_text(p) + " in " + d->text() + " engine " +
                         (got ? "true" : "false") + ", oracle " + (want ? "true" : "false")};
    ++agree;
    positive += want;
  }
  return {true, std::to_string(agree) + " queries agree (" + std::to_string(positive) + " members)"};
}

// ---- determinism ----

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const std::string& cli, std::uint64_t seed) {
  std::string a, b;
  if (!cli.empty()) {
    auto dir = std::filesystem::temp_directory_path();
    auto p1 = dir / ("homlim-ac10-" + std::to_string(::getpid()) + "-1.jsonl");
    auto p2 = dir / ("homlim-ac10-" + std::to_string(::getpid()) + "-2.jsonl");
    for (const auto& p : {p1, p2}) {
      std::string cmd = "\"" + cli + "\" verify all --seed " + std::to_string(seed) + " --report \"" + p.string() +
                        "\" > /dev/null";
      if (std::system(cmd.c_str()) != 0) return {false, "verify all exited nonzero"};
    }
    a = slurp(p1);
    b = slurp(p2);
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
  } else {
    a = io::write_certificate("all", seed, verify::run_checks(verify::check_names(), seed));
    b = io::write_certificate("all", seed, verify::run_checks(verify::check_names(), seed));
  }
  if (a.empty()) return {false, "empty certificate"};
  if (a != b) return {false, "certificates differ"};
  return {true, std::to_string(a.size()) + " bytes, identical" + (cli.empty() ? " (in process)" : " (via CLI)")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::uint64_t seed = 20261016;
  int failed = 0;

  auto run = [&](const std::string& id, const std::string& title, double limit_s, const std::function<Outcome()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = limit_s <= 0 || s < limit_s;
    bool pass = o.ok && in_time;
    failed += !pass;
    char timing[96];
    if (limit_s > 0)
      std::snprintf(timing, sizeof timing, "%.3f s / limit %.0f s", s, limit_s);
    else
      std::snprintf(timing, sizeof timing, "%.3f s", s);
    std::cout << id << ' ' << (pass ? "PASS" : "FAIL") << ' ' << title << " [" << timing << "] " << o.detail
              << (in_time ? "" : " (over time limit)") << std::endl;
  };

  run("AC1", "micro enumeration", 5, [] {
    auto r = verify::check_micro_enumeration(3, 3);
    bool exact = count(r, "bpoints") == "318" && count(r, "points") == "321";
    auto o = from_report(r, count(r, "bpoints") + " B-points / " + count(r, "points") + " points, " +
                                count(r, "membership_checks") + " membership checks");
    o.ok = o.ok && exact;
    return o;
  });
  run("AC2", "independence", 10, [] {
    auto r = verify::check_independence(3, 3, 3, 3, 5);
    return from_report(r, count(r, "cells") + " cells with >= 3 witnesses, " + count(r, "dual_signings") +
                              " atom signings");
  });
  run("AC3", "demand satisfaction", 30, [&] {
    auto r = verify::check_homogeneity_sample(seed, 100);
    return from_report(r, count(r, "satisfied") + "/100 demands satisfied on the micro fragment");
  });
  run("AC4", "grid membership oracle", 30, [&] { return grid_membership_oracle(seed, 1000); });
  run("AC5", "defined and orphan images", 60, [&] {
    auto g = verify::images_session();
    auto r = verify::check_images(g, seed, 50, 200);
    return from_report(r, count(r, "defined") + " defined, " + count(r, "undefined") + " orphan samples");
  });
  run("AC6", "projection", 60, [] {
    auto g = verify::projection_session();
    auto r = verify::check_projection(g, 3, 3, 63);
    return from_report(r, count(r, "names") + " names, " + count(r, "in_family") + " in family, " +
                              count(r, "finite") + " finite");
  });
  run("AC7", "free action", 60, [&] {
    auto g = verify::free_action_session();
    auto r = verify::check_free_action(g, seed, 4, 1000);
    return from_report(r, count(r, "words") + " reduced words, " + count(r, "short_words") + " short words distinct");
  });
  run("AC8", "pairwise incompatibility", 60, [] {
    auto g = verify::pruned_session();
    auto r = verify::check_disjoint(g, 1, 2, 3, 3, 10);
    std::string wit;
    for (const auto& w : r.witnesses)
      if (w.rfind("witness", 0) == 0) wit = "; " + w;
    return from_report(r, count(r, "e_points") + " E-points, " + count(r, "membership_pairs") + " pair checks" + wit);
  });
  run("AC9", "trivial-family guard", 1, [] {
    auto r = verify::check_trivial_guard();
    std::string notes;
    for (const auto& w : r.witnesses) notes += (notes.empty() ? "" : "; ") + w;
    return from_report(r, notes);
  });
  run("AC10", "determinism", 0, [&] { return determinism(cli, 7); });

  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria pass")) << std::endl;
  return failed ? 1 : 0;
}
