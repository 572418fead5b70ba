#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "homlim/io/config.hpp"
#include "homlim/io/session_io.hpp"
#include "homlim/verify/checks.hpp"

using namespace homlim;

namespace {

struct CheckFailed {};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Usage, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Usage, "cannot write " + path);
  out << text;
}

io::SessionConfig load(const std::string& path) { return io::parse_config(slurp(path)); }

// Grid session used when a grid query gets no --config.
constexpr const char* kDefaultGrid = R"(mode grid
atoms 8
depth 3
set evens ep(;10)
set odds ep(;01)
set pow2 pow(2)
set copow2 copow(2)
demand d1 step 0 h a0>a1 f evens>odds odds>evens
demand d2 step 1 h a1>a3 f Phi0(pow2)>Phi0(copow2)
)";

io::SessionConfig load_grid(const std::string& path) {
  return path.empty() ? io::parse_config(kDefaultGrid) : load(path);
}

std::string yes(bool b) { return b ? "true" : "false"; }

// Probe queries answered by two sessions; returns the number of agreements.
template <class Session, class Points>
std::size_t probe(Session& a, Session& b, const Points& pts, std::uint64_t seed, std::size_t count) {
  verify::Rng rng(seed);
  std::size_t same = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& p = pts[verify::draw(rng, pts.size())];
    SetId s = static_cast<SetId>(1 + verify::draw(rng, a.set_count()));
    bool ok;
    if constexpr (std::is_same_v<Session, grid::GridSession>)
      ok = a.limit_member(p, s) == b.limit_member(p, s);
    else
      ok = a.limit_member(p, s) == b.limit_member(p, s) && a.set_name(s) == b.set_name(s);
    same += ok;
  }
  return same;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lazy homogeneous-family constructions: tower, grid and verifier"};
  app.require_subcommand(1);
  std::string config_path;

  // ---- tower ----
  auto* tower = app.add_subcommand("tower", "level-by-level B-point tower");
  tower->require_subcommand(1);
  auto* t_build = tower->add_subcommand("build", "materialize the configured fragment");
  t_build->add_option("--config", config_path, "session config")->required();
  std::string point_text, set_text;
  auto* t_member = tower->add_subcommand("member", "membership of a point in a named set");
  t_member->add_option("point", point_text)->required();
  t_member->add_option("set", set_text)->required();
  t_member->add_option("--config", config_path)->required();
  DemandId demand_id = 0;
  auto* t_satisfy = tower->add_subcommand("satisfy", "build and check the satisfier of a demand");
  t_satisfy->add_option("demand", demand_id)->required();
  t_satisfy->add_option("--config", config_path)->required();

  // ---- grid ----
  auto* gridc = app.add_subcommand("grid", "two-dimensional homogenizer");
  gridc->require_subcommand(1);
  unsigned depth = 0;
  std::size_t letters = 3;
  std::string eta_path;
  auto* g_hom = gridc->add_subcommand("homogenize", "list canonical names with their A0-traces");
  g_hom->add_option("--config", config_path)->required();
  g_hom->add_option("--depth", depth, "steps to unfold (default: config depth)");
  g_hom->add_option("--letters", letters, "total word length bound");
  g_hom->add_option("--prune", eta_path, "file of eta picks");
  auto* g_member = gridc->add_subcommand("member", "grid membership");
  g_member->add_option("point", point_text)->required();
  g_member->add_option("set", set_text)->required();
  g_member->add_option("--config", config_path, "session config (default: built-in parity session)");
  auto* g_trace = gridc->add_subcommand("trace", "A0-trace of a set");
  g_trace->add_option("set", set_text)->required();
  g_trace->add_option("--config", config_path, "session config (default: built-in parity session)");
  unsigned top = 0;
  auto* g_satisfy = gridc->add_subcommand("satisfy", "check the satisfier of a demand");
  g_satisfy->add_option("demand", demand_id)->required();
  g_satisfy->add_option("--config", config_path, "session config (default: built-in parity session)");
  g_satisfy->add_option("--top", top, "top level of the satisfier (default: step + 1)");
  std::string check_name;
  std::uint64_t seed = 0;
  auto* g_check = gridc->add_subcommand("check", "run a grid check on the configured session");
  g_check->add_option("name", check_name)->required()->check(
      CLI::IsMember({"disjoint", "projection", "free-action", "images"}));
  g_check->add_option("--config", config_path, "session config (default: built-in parity session)");
  g_check->add_option("--seed", seed);

  // ---- verify ----
  auto* ver = app.add_subcommand("verify", "run the verifier suite and write a certificate");
  std::string which = "all", report_path;
  std::vector<std::string> choices{"all"};
  for (const auto& n : verify::check_names()) choices.push_back(n);
  ver->add_option("check", which, "all or one check name")->check(CLI::IsMember(choices));
  ver->add_option("--seed", seed);
  ver->add_option("--report", report_path, "certificate file (stdout if absent)");

  // ---- persistence ----
  std::string out_path, dump_path;
  auto* exp = app.add_subcommand("export", "dump a session with checksum");
  exp->add_option("--config", config_path)->required();
  exp->add_option("--out", out_path)->required();
  std::size_t probes = 100;
  auto* imp = app.add_subcommand("import", "reload a dump and probe it against a fresh build");
  imp->add_option("dump", dump_path)->required();
  imp->add_option("--probe", probes);
  auto* norm = app.add_subcommand("config", "print a config in normal form");
  norm->add_option("file", config_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*t_build) {
      auto s = io::build_tower(load(config_path));
      for (unsigned n = 0; n <= s.depth(); ++n)
        std::cout << "level " << n << " points " << s.fragment(n).size() << '\n';
      std::cout << "sets " << s.set_count() << " demands " << s.demand_ids().size() << '\n';
    } else if (*t_member) {
      auto cfg = load(config_path);
      auto s = io::build_tower(cfg);
      auto p = tower::Point::parse(point_text);
      SetId id = io::resolve_set(cfg, set_text, [&](const std::string& x) { return s.parse_set(x); });
      std::cout << yes(s.member(p, id)) << '\n';
    } else if (*t_satisfy) {
      auto s = io::build_tower(load(config_path));
      auto g = s.satisfier(demand_id);
      unsigned lvl = s.demand(demand_id).level + 1;
      if (lvl > s.depth()) throw Error(ErrorKind::Usage, "config depth must reach level " + std::to_string(lvl));
      std::cout << "satisfier " << s.perm_name(g) << '\n';
      if (auto bad = s.satisfies(g, demand_id, s.fragment(lvl))) {
        std::cout << "FAIL " << *bad << '\n';
        throw CheckFailed{};
      }
      std::cout << "satisfied on " << s.fragment(lvl).size() << " points\n";
    } else if (*g_hom) {
      auto text = slurp(config_path);
      if (!eta_path.empty()) text += "\nmode grid-pruned\n" + slurp(eta_path);
      auto cfg = io::parse_config(text);
      auto g = io::build_grid(cfg);
      if (!depth) depth = cfg.depth;
      if (!cfg.fin) std::cerr << "warning: Fin(A0) is not part of the base family; finite traces fall outside it\n";
      std::set<DemandId> allowed;
      for (auto id : g.demand_ids()) allowed.insert(id);
      if (cfg.mode == "grid-pruned") {
        auto eta = io::build_eta(cfg, g);
        std::cout << "eta";
        for (auto [id, v] : eta.choice) std::cout << ' ' << g.set_name(id) << '=' << v;
        allowed = g.prune_alphabet();
        std::cout << "\nallowed";
        for (auto id : allowed) std::cout << " d" << id;
        std::cout << '\n';
      }
      for (auto [s, dep] : g.enumerate_names(depth, letters, [&](DemandId id) { return allowed.count(id) > 0; }))
        std::cout << g.set_name(s) << " step " << g.step(s) << ' ' << g.trace_str(g.trace(s)) << '\n';
    } else if (*g_member) {
      auto cfg = load_grid(config_path);
      auto g = io::build_grid(cfg);
      // Point text is read as an action: each entry applies ξ to what precedes it,
      // so a string whose prefix is moved by h names the moved point.
      auto written = grid::Point::parse(point_text);
      grid::Point p(written.base());
      for (const auto& [st, w] : written.history()) p = g.xi_apply(st, w, p);
      SetId id = io::resolve_set(cfg, set_text, [&](const std::string& x) { return g.parse_set(x); });
      std::cout << yes(g.member(p, id)) << '\n';
    } else if (*g_trace) {
      auto cfg = load_grid(config_path);
      auto g = io::build_grid(cfg);
      SetId id = io::resolve_set(cfg, set_text, [&](const std::string& x) { return g.parse_set(x); });
      std::cout << g.trace_str(g.trace(id)) << '\n';
    } else if (*g_satisfy) {
      auto cfg = load_grid(config_path);
      auto g = io::build_grid(cfg);
      const auto& d = g.demand(demand_id);
      if (!top) top = d.level + 1;
      auto pts = g.enumerate_points(cfg.atoms + 6, top, 2);
      std::size_t checked = 0;
      for (const auto& [x, y] : d.h)
        if (!(g.satisfier_apply(demand_id, top, x) == y)) {
          std::cout << "FAIL h at " << x.str() << '\n';
          throw CheckFailed{};
        }
      for (auto [X, Y] : d.f) {
        SetId LX = g.lift_to(X, top), LY = g.lift_to(Y, top);
        for (const auto& p : pts) {
          ++checked;
          if (g.member(p, LX) != g.member(g.satisfier_apply(demand_id, top, p), LY)) {
            std::cout << "FAIL " << p.str() << ' ' << g.set_name(LX) << '\n';
            throw CheckFailed{};
          }
        }
      }
      std::cout << "satisfier xi" << top - 1 << "(d" << demand_id << ") satisfied on " << pts.size()
                << " points, " << checked << " membership pairs\n";
    } else if (*g_check) {
      auto cfg = load_grid(config_path);
      auto g = io::build_grid(cfg);
      verify::CheckReport r;
      if (check_name == "projection") {
        r = verify::check_projection(g, cfg.depth);
      } else if (check_name == "free-action") {
        r = verify::check_free_action(g, seed);
      } else if (check_name == "images") {
        r = verify::check_images(g, seed);
      } else {
        std::optional<std::pair<SetId, SetId>> pair;
        for (auto id : g.base_ids())
          if (auto c = g.partner(id); c && !pair) pair = std::pair{id, *c};
        if (!pair) throw Error(ErrorKind::Usage, "config has no complementary pair of base sets");
        r = verify::check_disjoint(g, pair->first, pair->second, cfg.depth);
      }
      std::cout << r.to_json().dump() << '\n';
      if (!r.pass) throw CheckFailed{};
    } else if (*ver) {
      std::vector<std::string> names = which == "all" ? verify::check_names() : std::vector<std::string>{which};
      auto reports = verify::run_checks(names, seed);
      std::vector<io::CertificateObject> objects;
      auto fixture = verify::projection_session();
      for (SetId id = 1; id <= fixture.set_count(); ++id)
        objects.push_back({"projection-fixture-name", set_ref(id), fixture.set_name(id)});
      std::string suite;
      for (const auto& n : names) suite += "check " + n + '\n';
      auto cert = io::write_certificate(suite, seed, reports, objects);
      if (report_path.empty()) {
        std::cout << cert;
      } else {
        spit(report_path, cert);
        for (const auto& r : reports)
          std::cout << r.name << ' ' << (r.pass ? "pass" : "FAIL") << '\n';
      }
      for (const auto& r : reports)
        if (!r.pass) throw CheckFailed{};
    } else if (*exp) {
      auto cfg = load(config_path);
      if (cfg.mode == "tower")
        spit(out_path, io::export_session(cfg, io::build_tower(cfg)));
      else
        spit(out_path, io::export_session(cfg, io::build_grid(cfg)));
      std::cout << "wrote " << out_path << '\n';
    } else if (*imp) {
      auto dump = slurp(dump_path);
      auto contents = io::read_dump(dump);
      std::size_t same = 0;
      if (contents.config.mode == "tower") {
        auto a = io::import_session<tower::TowerSession>(dump, io::build_tower);
        auto b = io::build_tower(contents.config);
        same = probe(a, b, a.fragment(a.depth()), contents.config.seed, probes);
      } else {
        auto a = io::import_session<grid::GridSession>(dump, io::build_grid);
        auto b = io::build_grid(contents.config);
        auto pts = a.enumerate_points(contents.config.atoms + 4, contents.config.depth, 2);
        for (SetId id = b.set_count() + 1; id <= a.set_count(); ++id) b.parse_set(a.set_name(id));
        same = probe(a, b, pts, contents.config.seed, probes);
      }
      std::cout << "names " << contents.names.size() << " probe " << same << '/' << probes << " identical\n";
      if (same != probes) throw CheckFailed{};
    } else if (*norm) {
      std::cout << io::print_config(load(config_path));
    }
  } catch (const CheckFailed&) {
    return 1;
  } catch (const Error& e) {
    std::cerr << "homlim: " << e.what() << '\n';
    return e.kind() == ErrorKind::BudgetExceeded ? 1 : 2;
  }
  return 0;
}
