#pragma once

// RunReport: what every CLI command prints, serialized as JSON.

#include <boost/uuid/detail/sha1.hpp>

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwre/config.hpp"
#include "rwre/extended_real.hpp"
#include "rwre/stats.hpp"

namespace rwre {

// Git blob hash of the config text: sha1("blob <len>\0" + text).
inline std::string config_hash(const std::string& text) {
  boost::uuids::detail::sha1 h;
  const std::string header = "blob " + std::to_string(text.size());
  h.process_bytes(header.data(), header.size() + 1);  // include the NUL
  h.process_bytes(text.data(), text.size());
  boost::uuids::detail::sha1::digest_type d;
  h.get_digest(d);
  char buf[41];
  for (int i = 0; i < 5; ++i) std::snprintf(buf + 8 * i, 9, "%08x", d[i]);
  return buf;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  friend bool operator==(const Table&, const Table&) = default;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;

  friend bool operator==(const CheckResult&, const CheckResult&) = default;
};

struct RunReport {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::map<std::string, EstimateWithCI> estimates;
  std::map<std::string, ExtendedReal> analytic;
  std::map<std::string, std::string> verdicts;
  std::map<std::string, Table> tables;
  std::map<std::string, double> censoring_rates;
  std::vector<CheckResult> checks;
  double wall_clock_seconds = 0.0;

  bool all_checks_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

inline void to_json(nlohmann::json& j, const EstimateWithCI& e) {
  j = {{"point", e.point},
       {"stderr", e.std_error},
       {"ci95", {e.ci95.first, e.ci95.second}},
       {"replicates", e.replicates},
       {"seed", e.seed}};
}

inline void from_json(const nlohmann::json& j, EstimateWithCI& e) {
  e.point = j.at("point").get<double>();
  e.std_error = j.at("stderr").get<double>();
  e.ci95 = {j.at("ci95").at(0).get<double>(), j.at("ci95").at(1).get<double>()};
  e.replicates = j.at("replicates").get<std::size_t>();
  e.seed = j.at("seed").get<std::uint64_t>();
}

inline void to_json(nlohmann::json& j, const ExtendedReal& x) {
  if (x.is_finite()) j = x.value();
  else j = x.to_string();
}

inline void from_json(const nlohmann::json& j, ExtendedReal& x) {
  x = j.is_string() ? ExtendedReal::parse(j.get<std::string>()) : ExtendedReal(j.get<double>());
}

inline void to_json(nlohmann::json& j, const Table& t) {
  j = {{"columns", t.columns}, {"rows", t.rows}};
}

inline void from_json(const nlohmann::json& j, Table& t) {
  j.at("columns").get_to(t.columns);
  j.at("rows").get_to(t.rows);
}

inline void to_json(nlohmann::json& j, const CheckResult& c) {
  j = {{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}, {"seconds", c.seconds}};
}

inline void from_json(const nlohmann::json& j, CheckResult& c) {
  j.at("name").get_to(c.name);
  j.at("passed").get_to(c.passed);
  j.at("detail").get_to(c.detail);
  j.at("seconds").get_to(c.seconds);
}

inline void to_json(nlohmann::json& j, const RunReport& r) {
  nlohmann::json config = nlohmann::json::array();
  for (const auto& [k, v] : r.config) config.push_back({k, v});
  j = {{"command", r.command},
       {"config", config},
       {"config_hash", r.config_hash},
       {"seed", r.seed},
       {"estimates", r.estimates},
       {"analytic", r.analytic},
       {"verdicts", r.verdicts},
       {"tables", r.tables},
       {"censoring_rates", r.censoring_rates},
       {"checks", r.checks},
       {"wall_clock_seconds", r.wall_clock_seconds}};
}

inline void from_json(const nlohmann::json& j, RunReport& r) {
  j.at("command").get_to(r.command);
  r.config.clear();
  for (const auto& kv : j.at("config"))
    r.config.emplace_back(kv.at(0).get<std::string>(), kv.at(1).get<std::string>());
  j.at("config_hash").get_to(r.config_hash);
  j.at("seed").get_to(r.seed);
  j.at("estimates").get_to(r.estimates);
  j.at("analytic").get_to(r.analytic);
  j.at("verdicts").get_to(r.verdicts);
  j.at("tables").get_to(r.tables);
  j.at("censoring_rates").get_to(r.censoring_rates);
  j.at("checks").get_to(r.checks);
  j.at("wall_clock_seconds").get_to(r.wall_clock_seconds);
}

inline std::string report_to_string(const RunReport& r) { return nlohmann::json(r).dump(2); }

inline RunReport report_from_string(const std::string& s) {
  return nlohmann::json::parse(s).get<RunReport>();
}

}  // namespace rwre
