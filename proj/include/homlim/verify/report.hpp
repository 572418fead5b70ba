#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace homlim::verify {

// Outcome of one check. Everything except `elapsed_ms` is a function of the
// parameters and the seed; `elapsed_ms` stays out of certificates.
struct CheckReport {
  std::string name;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 0;
  bool pass = true;
  std::vector<std::string> witnesses;
  std::map<std::string, std::uint64_t> counts;
  double elapsed_ms = 0;

  void fail(std::string witness) {
    pass = false;
    if (witnesses.size() < 16) witnesses.push_back(std::move(witness));
  }
  void note(std::string witness) {
    if (witnesses.size() < 16) witnesses.push_back(std::move(witness));
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["check"] = name;
    j["params"] = params;
    j["seed"] = seed;
    j["outcome"] = pass ? "pass" : "fail";
    j["counts"] = counts;
    j["witnesses"] = witnesses;
    return j;
  }

  static CheckReport from_json(const nlohmann::json& j) {
    CheckReport r;
    r.name = j.at("check").get<std::string>();
    r.params = j.at("params").get<std::map<std::string, std::string>>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.pass = j.at("outcome").get<std::string>() == "pass";
    r.counts = j.at("counts").get<std::map<std::string, std::uint64_t>>();
    r.witnesses = j.at("witnesses").get<std::vector<std::string>>();
    return r;
  }
};

// Runs `body` on a fresh report and stamps the wall time.
template <class Body>
CheckReport timed(std::string name, std::uint64_t seed, Body&& body) {
  CheckReport r;
  r.name = std::move(name);
  r.seed = seed;
  auto t0 = std::chrono::steady_clock::now();
  body(r);
  r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace homlim::verify
