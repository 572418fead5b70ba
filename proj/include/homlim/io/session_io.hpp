#pragma once

#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "homlim/error.hpp"
#include "homlim/io/config.hpp"
#include "homlim/verify/report.hpp"

namespace homlim::io {

inline constexpr int kDumpVersion = 1;
inline constexpr const char* kEngineVersion = "homlim 1.0.0";

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Dump of a session: header, the config, every registered name in the
// canonical grammar, and a checksum over everything before it.
template <class Session>
std::string export_session(const SessionConfig& cfg, const Session& s) {
  std::ostringstream out;
  out << "homlim-session " << kDumpVersion << '\n';
  std::istringstream lines(print_config(cfg));
  for (std::string l; std::getline(lines, l);) out << "config " << l << '\n';
  for (SetId id = 1; id <= s.set_count(); ++id) out << "name " << id << ' ' << s.set_name(id) << '\n';
  std::string body = out.str();
  return body + "checksum " + hex64(fnv1a(body)) + '\n';
}

struct DumpContents {
  SessionConfig config;
  std::vector<std::pair<SetId, std::string>> names;
};

inline DumpContents read_dump(const std::string& dump) {
  auto corrupt = [](const std::string& why) { return Error(ErrorKind::CorruptDump, why); };
  auto cut = dump.rfind("checksum ");
  if (cut == std::string::npos || (cut > 0 && dump[cut - 1] != '\n')) throw corrupt("missing checksum");
  std::string body = dump.substr(0, cut);
  std::string sum = dump.substr(cut + 9);
  while (!sum.empty() && (sum.back() == '\n' || sum.back() == '\r')) sum.pop_back();
  std::istringstream in(body);
  std::string line;
  if (!std::getline(in, line) || line.rfind("homlim-session ", 0) != 0) throw corrupt("missing header");
  if (line != "homlim-session " + std::to_string(kDumpVersion))
    throw Error(ErrorKind::VersionMismatch, "dump version " + line.substr(15) + ", engine reads " +
                                                std::to_string(kDumpVersion));
  if (sum != hex64(fnv1a(body))) throw corrupt("checksum mismatch");
  DumpContents out;
  std::string cfg;
  while (std::getline(in, line)) {
    if (line.rfind("config ", 0) == 0) {
      cfg += line.substr(7) + '\n';
    } else if (line.rfind("name ", 0) == 0) {
      std::istringstream ls(line.substr(5));
      std::uint64_t id = 0;
      std::string text;
      if (!(ls >> id >> text)) throw corrupt("bad name line: " + line);
      out.names.emplace_back(static_cast<SetId>(id), text);
    } else {
      throw corrupt("unexpected line: " + line);
    }
  }
  try {
    out.config = parse_config(cfg);
  } catch (const Error& e) {
    throw corrupt(std::string("embedded config: ") + e.what());
  }
  return out;
}

// Rebuilds a session and re-interns every dumped name, which must land on its
// recorded id.
template <class Session, class Build>
Session import_session(const std::string& dump, Build&& build, SessionConfig* cfg_out = nullptr) {
  auto contents = read_dump(dump);
  Session s = build(contents.config);
  for (const auto& [id, text] : contents.names) {
    SetId got = s.parse_set(text);
    if (got != id)
      throw Error(ErrorKind::CorruptDump, "name " + text + " rebuilt as " + set_ref(got) + ", dump says " + set_ref(id));
  }
  if (cfg_out) *cfg_out = contents.config;
  return s;
}

// Certificate: a header record then one record per check and per dumped object.
struct CertificateObject {
  std::string kind;
  std::string id;
  std::string text;
};

inline std::string write_certificate(const std::string& config_text, std::uint64_t seed,
                                     const std::vector<verify::CheckReport>& reports,
                                     const std::vector<CertificateObject>& objects = {}) {
  std::string out;
  nlohmann::ordered_json head;
  head["record"] = "header";
  head["engine"] = kEngineVersion;
  head["config_hash"] = hex64(fnv1a(config_text));
  head["config"] = config_text;
  head["seed"] = seed;
  out += head.dump() + '\n';
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["record"] = "check";
    auto body = r.to_json();
    for (auto& [k, v] : body.items()) j[k] = v;
    out += j.dump() + '\n';
  }
  for (const auto& o : objects) {
    nlohmann::ordered_json j;
    j["record"] = "object";
    j["kind"] = o.kind;
    j["id"] = o.id;
    j["name"] = o.text;
    out += j.dump() + '\n';
  }
  return out;
}

inline std::vector<verify::CheckReport> read_certificate_checks(const std::string& cert) {
  std::vector<verify::CheckReport> out;
  std::istringstream in(cert);
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::CorruptDump, e.what());
    }
    if (j.value("record", "") == "check") out.push_back(verify::CheckReport::from_json(j));
  }
  return out;
}

}  // namespace homlim::io
