#pragma once

// Flat `key = value` experiment configuration with dotted sections.
//
//   # comment
//   seed = 42
//   law.a.values = 0.5, 2
//   law.a.probs = 0.5, 0.5
//   law.offspring.probs = 0, 1
//
// Unknown keys, malformed values and invalid laws raise ConfigError with the
// offending field and line.

#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rwre/error.hpp"
#include "rwre/law.hpp"

namespace rwre {

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::size_t workers = 1;

  std::string a_kind = "finite";  // finite | uniform
  std::vector<double> a_values{0.5, 2.0};
  std::vector<double> a_probs{0.5, 0.5};
  double a_lo = 0.5;
  double a_hi = 2.0;
  std::optional<double> a_alpha;
  std::vector<double> offspring_probs{0.0, 1.0};

  std::size_t steps = 100'000;
  std::size_t replicates = 20;
  std::size_t horizon = 1'000;
  std::vector<std::size_t> schedule;  // empty: just `steps`

  std::vector<double> lambda_grid{0.25, 0.5, 0.75, 1.0};
  std::size_t beta_replicates = 200;

  std::vector<std::size_t> line_n{10, 20, 40, 60};
  std::vector<double> line_lambda{0.0, 0.5, 1.0};
  std::vector<std::size_t> line_p_n{2, 5, 10, 20};
  std::vector<double> line_a{1'000.0, 10'000.0};
  std::size_t line_replicates = 1'000;
  std::size_t line_oracle_envs = 100;

  std::vector<int> lerrw_b{2, 3, 5};
  std::vector<double> lerrw_delta{1.0};
  std::size_t lerrw_steps = 100'000;
  std::size_t lerrw_replicates = 50;
  int lerrw_prefix = 6;
  std::size_t lerrw_equivalence_replicates = 20'000;
  std::size_t lerrw_ks_samples = 100'000;
  bool lerrw_negative_control = false;
  double lerrw_burn_in = 0.0;

  std::string output_path;
  std::string output_format = "csv";  // csv | jsonl

  // Entries in file order, for the report echo.
  std::vector<std::pair<std::string, std::string>> entries;
  std::string text;

  ALaw a_law() const {
    if (a_kind == "uniform") return ALaw::uniform(a_lo, a_hi, a_alpha);
    return ALaw::finite(a_values, a_probs, a_alpha);
  }
  OffspringLaw offspring_law() const { return OffspringLaw::from_probs(offspring_probs); }
  std::vector<std::size_t> exponent_schedule() const {
    return schedule.empty() ? std::vector<std::size_t>{steps} : schedule;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

struct FieldParser {
  std::string key;
  std::size_t line;

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(key, line, what); }

  double real(const std::string& v) const {
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0' || errno == ERANGE) fail("expected a number, got '" + v + "'");
    return x;
  }

  std::uint64_t u64(const std::string& v) const {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
      fail("expected a non-negative integer, got '" + v + "'");
    errno = 0;
    const auto x = std::strtoull(v.c_str(), nullptr, 10);
    if (errno == ERANGE) fail("integer out of range");
    return x;
  }

  std::size_t positive(const std::string& v) const {
    const auto x = u64(v);
    if (x == 0) fail("must be at least 1");
    return static_cast<std::size_t>(x);
  }

  bool boolean(const std::string& v) const {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail("expected true or false, got '" + v + "'");
  }

  std::vector<std::string> items(const std::string& v) const {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    if (out.empty() || (out.size() == 1 && out[0].empty())) fail("expected a non-empty list");
    return out;
  }

  std::vector<double> reals(const std::string& v) const {
    std::vector<double> out;
    for (const auto& s : items(v)) out.push_back(real(s));
    return out;
  }

  std::vector<std::size_t> positives(const std::string& v) const {
    std::vector<std::size_t> out;
    for (const auto& s : items(v)) out.push_back(positive(s));
    return out;
  }
};

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  cfg.text = text;
  std::map<std::string, std::size_t> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("", line_no, "expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    const detail::FieldParser p{key, line_no};
    if (key.empty()) p.fail("empty key");
    if (seen.count(key)) p.fail("duplicate key (first set at line " + std::to_string(seen[key]) + ")");
    seen[key] = line_no;
    cfg.entries.emplace_back(key, val);

    if (key == "seed") cfg.seed = p.u64(val);
    else if (key == "workers") cfg.workers = p.positive(val);
    else if (key == "law.a.kind") {
      if (val != "finite" && val != "uniform") p.fail("kind must be finite or uniform");
      cfg.a_kind = val;
    } else if (key == "law.a.values") cfg.a_values = p.reals(val);
    else if (key == "law.a.probs") cfg.a_probs = p.reals(val);
    else if (key == "law.a.lo") cfg.a_lo = p.real(val);
    else if (key == "law.a.hi") cfg.a_hi = p.real(val);
    else if (key == "law.a.alpha") cfg.a_alpha = p.real(val);
    else if (key == "law.offspring.probs") cfg.offspring_probs = p.reals(val);
    else if (key == "walk.steps") cfg.steps = p.positive(val);
    else if (key == "walk.replicates") cfg.replicates = p.positive(val);
    else if (key == "walk.horizon") cfg.horizon = p.positive(val);
    else if (key == "walk.schedule") {
      cfg.schedule = p.positives(val);
      for (auto n : cfg.schedule)
        if (n < 2) p.fail("schedule entries must be >= 2");
    } else if (key == "analysis.lambda_grid") {
      cfg.lambda_grid = p.reals(val);
      for (double l : cfg.lambda_grid)
        if (!(l > 0.0 && l <= 1.0)) p.fail("lambda values must lie in (0, 1]");
    } else if (key == "analysis.beta_replicates") cfg.beta_replicates = p.positive(val);
    else if (key == "line.n") cfg.line_n = p.positives(val);
    else if (key == "line.lambda") {
      cfg.line_lambda = p.reals(val);
      for (double l : cfg.line_lambda)
        if (!(l >= 0.0 && l <= 1.0)) p.fail("lambda values must lie in [0, 1]");
    } else if (key == "line.p_n") cfg.line_p_n = p.positives(val);
    else if (key == "line.a") cfg.line_a = p.reals(val);
    else if (key == "line.replicates") cfg.line_replicates = p.positive(val);
    else if (key == "line.oracle_envs") cfg.line_oracle_envs = p.positive(val);
    else if (key == "lerrw.b") {
      cfg.lerrw_b.clear();
      for (auto b : p.positives(val)) {
        if (b < 2) p.fail("b must be >= 2");
        cfg.lerrw_b.push_back(static_cast<int>(b));
      }
    } else if (key == "lerrw.delta") {
      cfg.lerrw_delta = p.reals(val);
      for (double d : cfg.lerrw_delta)
        if (!(d > 0.0)) p.fail("delta must be positive");
    } else if (key == "lerrw.steps") cfg.lerrw_steps = p.positive(val);
    else if (key == "lerrw.replicates") cfg.lerrw_replicates = p.positive(val);
    else if (key == "lerrw.prefix") {
      const auto s = p.positive(val);
      if (s > 10) p.fail("prefix length must be <= 10");
      cfg.lerrw_prefix = static_cast<int>(s);
    } else if (key == "lerrw.equivalence_replicates") cfg.lerrw_equivalence_replicates = p.positive(val);
    else if (key == "lerrw.ks_samples") cfg.lerrw_ks_samples = p.positive(val);
    else if (key == "lerrw.negative_control") cfg.lerrw_negative_control = p.boolean(val);
    else if (key == "lerrw.burn_in") {
      cfg.lerrw_burn_in = p.real(val);
      if (!(cfg.lerrw_burn_in >= 0.0 && cfg.lerrw_burn_in < 1.0)) p.fail("burn_in must lie in [0, 1)");
    } else if (key == "output.path") cfg.output_path = val;
    else if (key == "output.format") {
      if (val != "csv" && val != "jsonl") p.fail("format must be csv or jsonl");
      cfg.output_format = val;
    } else {
      p.fail("unknown key");
    }
  }

  // Law validity is checked here so that errors point at the config.
  auto line_of = [&](const std::string& k) { return seen.count(k) ? seen[k] : 0; };
  try {
    (void)cfg.a_law();
  } catch (const InvalidLaw& e) {
    const std::string field = cfg.a_kind == "uniform" ? "law.a.lo" : "law.a.probs";
    throw ConfigError(field, line_of(field), e.what());
  }
  try {
    (void)cfg.offspring_law();
  } catch (const InvalidLaw& e) {
    throw ConfigError("law.offspring.probs", line_of("law.offspring.probs"), e.what());
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", 0, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace rwre
