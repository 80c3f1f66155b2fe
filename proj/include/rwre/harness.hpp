#pragma once

// The CLI commands. Each returns a RunReport and optionally streams its data
// table to `data` (CSV or JSON lines). Data output depends only on the config
// and the seed; timing goes to the report alone.

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwre/checks.hpp"
#include "rwre/config.hpp"
#include "rwre/law.hpp"
#include "rwre/lerrw.hpp"
#include "rwre/line_walk.hpp"
#include "rwre/report.hpp"
#include "rwre/tree_walk.hpp"

namespace rwre {

namespace detail {

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline RunReport start_report(const std::string& command, const ExperimentConfig& cfg) {
  RunReport r;
  r.command = command;
  r.config = cfg.entries;
  r.config_hash = config_hash(cfg.text);
  r.seed = cfg.seed;
  return r;
}

// Writes one row either as CSV (header on first use) or as a JSON object.
class DataWriter {
 public:
  DataWriter(std::ostream* out, std::string format, std::vector<std::string> columns)
      : out_(out), jsonl_(format == "jsonl"), columns_(std::move(columns)) {}

  void row(const std::vector<std::string>& cells) {
    if (!out_) return;
    if (jsonl_) {
      std::string line = "{";
      for (std::size_t i = 0; i < cells.size(); ++i)
        line += (i ? "," : "") + nlohmann::json(columns_[i]).dump() + ":" + cells[i];
      *out_ << line << "}\n";
      return;
    }
    if (!header_done_) {
      for (std::size_t i = 0; i < columns_.size(); ++i) *out_ << (i ? "," : "") << columns_[i];
      *out_ << '\n';
      header_done_ = true;
    }
    for (std::size_t i = 0; i < cells.size(); ++i) *out_ << (i ? "," : "") << cells[i];
    *out_ << '\n';
  }

 private:
  std::ostream* out_;
  bool jsonl_;
  std::vector<std::string> columns_;
  bool header_done_ = false;
};

inline std::string quoted(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace detail

inline RunReport cmd_lambda(const ExperimentConfig& cfg, std::ostream* data = nullptr) {
  auto report = detail::start_report("lambda", cfg);
  const auto a = cfg.a_law();
  const auto off = cfg.offspring_law();
  const TransformTable tab(a);

  try {
    report.verdicts["transience"] = is_transient(a, off) ? "transient" : "recurrent";
  } catch (const BorderlineCriterion&) {
    report.verdicts["transience"] = "borderline";
  }
  report.analytic["transience_infimum"] = ExtendedReal(transience_infimum(a));
  report.analytic["inverse_mean_offspring"] = ExtendedReal(1.0 / off.mean());
  report.analytic["Lambda"] = lambda_exponent(a, off.q1());
  report.analytic["L_prime"] = big_L_prime(tab, off.q1());
  report.analytic["L_prime_direct"] = big_L_prime_direct(tab, off.q1());
  report.analytic["mean_log_A"] = ExtendedReal(a.mean_log());
  if (const auto kappa = solomon_kappa(a)) {
    report.analytic["kappa"] = ExtendedReal(*kappa);
  } else {
    report.verdicts["kappa"] = "none";
  }

  detail::DataWriter out(data, cfg.output_format, {"lambda", "L", "t_bar"});
  Table t{{"lambda", "L", "t_bar"}, {}};
  for (double l : cfg.lambda_grid) {
    const auto c = tab.big_L(l);
    t.rows.push_back({l, c.value, c.t_bar});
    out.row({detail::num(l), detail::num(c.value), detail::num(c.t_bar)});
  }
  report.tables["L"] = t;
  return report;
}

inline RunReport cmd_simulate(const ExperimentConfig& cfg, std::ostream* data = nullptr) {
  auto report = detail::start_report("simulate", cfg);
  const auto a = cfg.a_law();
  const auto off = cfg.offspring_law();
  if (!is_transient(a, off)) throw NotTransient("the configured walk is recurrent");
  auto schedule = cfg.exponent_schedule();
  std::sort(schedule.begin(), schedule.end());
  for (auto& n : schedule) n = std::min(n, cfg.steps);
  schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());

  const auto summaries = map_replicates(cfg.replicates, cfg.workers, [&](std::size_t r) {
    return simulate_replicate(a, off, cfg.steps, schedule, cfg.horizon, cfg.seed, r);
  });

  std::vector<std::vector<int>> gens;
  std::vector<double> speeds;
  RunningStats level, time;
  std::size_t records = 0, censored = 0;
  detail::DataWriter stream(cfg.output_format == "jsonl" ? data : nullptr, "jsonl",
                            {"replicate", "n", "gen", "tau", "regen_count", "censored_rate"});
  for (const auto& s : summaries) {
    gens.push_back(s.generations_at);
    speeds.push_back(static_cast<double>(s.generation) / static_cast<double>(cfg.steps));
    for (double g : s.level_gaps) level.add(g);
    for (double g : s.time_gaps) time.add(g);
    records += s.regenerations;
    censored += s.censored;
    stream.row({std::to_string(s.replicate), std::to_string(s.steps), std::to_string(s.generation),
                std::to_string(s.tau), std::to_string(s.regenerations), detail::num(s.censored_rate())});
  }
  report.estimates["speed"] = EstimateWithCI::from_samples(speeds, cfg.seed);

  Table exponents{{"n", "median", "q25", "q75", "iqr"}, {}};
  detail::DataWriter table_out(cfg.output_format == "csv" ? data : nullptr, "csv", exponents.columns);
  if (schedule.front() >= 2) {
    for (const auto& row : summarize_exponents(schedule, gens)) {
      exponents.rows.push_back({static_cast<double>(row.n), row.median, row.q25, row.q75, row.iqr});
      table_out.row({std::to_string(row.n), detail::num(row.median), detail::num(row.q25),
                     detail::num(row.q75), detail::num(row.iqr)});
    }
  }
  report.tables["exponent"] = exponents;

  report.censoring_rates["regeneration"] =
      records ? static_cast<double>(censored) / static_cast<double>(records) : 0.0;
  if (level.count() > 0) {
    report.estimates["mean_level_gap"] =
        EstimateWithCI::make(level.mean(), level.std_error(), level.count(), cfg.seed);
    report.estimates["mean_time_gap"] =
        EstimateWithCI::make(time.mean(), time.std_error(), time.count(), cfg.seed);
    // Delta method for the ratio of the two means.
    const double ratio = level.mean() / time.mean();
    const double rel = std::hypot(level.std_error() / level.mean(), time.std_error() / time.mean());
    report.estimates["renewal_speed"] =
        EstimateWithCI::make(ratio, ratio * rel, level.count(), cfg.seed);
    const auto beta = estimate_beta_fresh_roots(a, off, cfg.horizon, cfg.beta_replicates,
                                                derive_seed(cfg.seed, 0x62657461ULL), cfg.workers);
    report.estimates["beta_fresh_roots"] = beta;
    report.estimates["renewal_identity"] = EstimateWithCI::make(
        level.mean() * beta.point,
        std::hypot(level.std_error() * beta.point, beta.std_error * level.mean()), level.count(),
        cfg.seed);
  } else {
    report.verdicts["regenerations"] = "fewer than two uncensored records per run";
  }
  report.analytic["Lambda"] = lambda_exponent(a, off.q1());
  return report;
}

inline RunReport cmd_line(const ExperimentConfig& cfg, std::ostream* data = nullptr) {
  auto report = detail::start_report("line", cfg);
  const auto a = cfg.a_law();
  const TransformTable tab(a);

  double hit_diff = 0.0, exit_rel = 0.0;
  for (std::size_t k = 0; k < cfg.line_oracle_envs; ++k) {
    Rng g(derive_seed(cfg.seed, 0x6f7261ULL, k));
    const std::size_t n = 1 + k % 50;
    const auto env = LineEnvironment::sample(a, n, g);
    const auto oracle = oracle_solve(env, n);
    for (std::size_t i = 0; i <= n; ++i)
      hit_diff = std::max(hit_diff, std::abs(oracle.hit(i) - hit_prob_before_minus1(env, i)));
    exit_rel = std::max(exit_rel,
                        std::abs(expected_exit_time(env, n) - oracle.exit_time()) / oracle.exit_time());
  }
  report.analytic["oracle_max_hit_diff"] = ExtendedReal(hit_diff);
  report.analytic["oracle_max_exit_rel_diff"] = ExtendedReal(exit_rel);

  detail::DataWriter out(data, cfg.output_format, {"kind", "n", "param", "estimate", "stderr"});
  const bool jsonl = cfg.output_format == "jsonl";
  const std::string kind_m = jsonl ? detail::quoted("m") : "m";
  const std::string kind_p = jsonl ? detail::quoted("p") : "p";

  Table m_table{{"n", "lambda", "m", "stderr", "log_rate"}, {}};
  for (std::size_t li = 0; li < cfg.line_lambda.size(); ++li) {
    const double l = cfg.line_lambda[li];
    if (l > 0.0) report.analytic["L(" + detail::num(l) + ")"] = ExtendedReal(tab.big_L(l).value);
    for (std::size_t n : cfg.line_n) {
      const auto m = m_estimate(a, n, l, cfg.line_replicates, derive_seed(cfg.seed, 0x6dULL, n * 1000 + li),
                                cfg.workers);
      m_table.rows.push_back({static_cast<double>(n), l, m.point, m.std_error,
                              std::log(m.point) / static_cast<double>(n)});
      out.row({kind_m, std::to_string(n), detail::num(l), detail::num(m.point), detail::num(m.std_error)});
    }
  }
  report.tables["m"] = m_table;

  Table p_table{{"n", "a", "p", "stderr"}, {}};
  for (std::size_t ai = 0; ai < cfg.line_a.size(); ++ai) {
    const double av = cfg.line_a[ai];
    for (std::size_t n : cfg.line_p_n) {
      const auto p = p_estimate(a, n, av, cfg.line_replicates, derive_seed(cfg.seed, 0x70ULL, n * 1000 + ai),
                                cfg.workers);
      p_table.rows.push_back({static_cast<double>(n), av, p.point, p.std_error});
      out.row({kind_p, std::to_string(n), detail::num(av), detail::num(p.point), detail::num(p.std_error)});
    }
  }
  report.tables["p"] = p_table;
  return report;
}

inline RunReport cmd_lerrw(const ExperimentConfig& cfg, std::ostream* data = nullptr) {
  auto report = detail::start_report("lerrw", cfg);
  const bool jsonl = cfg.output_format == "jsonl";
  detail::DataWriter speeds_out(jsonl ? nullptr : data, "csv", {"b", "delta", "steps", "v_hat", "stderr"});
  detail::DataWriter cells_out(jsonl ? data : nullptr, "jsonl",
                               {"b", "delta", "negative_control", "prefix", "urn", "env"});

  Table speed{{"b", "delta", "steps", "v_hat", "stderr", "upper_bound"}, {}};
  Table equivalence{{"b", "delta", "negative_control", "p_value", "statistic", "df"}, {}};
  Table marginals{{"b", "ks_f0_p", "ks_f1_p"}, {}};
  Table hypothesis{{"b", "holds", "tail_index", "tail_index_lo99", "mc_mean"}, {}};

  for (int b : cfg.lerrw_b) {
    for (std::size_t di = 0; di < cfg.lerrw_delta.size(); ++di) {
      const double d = cfg.lerrw_delta[di];
      const auto v = lerrw_speed(b, d, cfg.lerrw_steps, cfg.lerrw_replicates,
                                 derive_seed(cfg.seed, 0x7370ULL, b * 1000 + di), cfg.lerrw_burn_in,
                                 cfg.workers);
      speed.rows.push_back({static_cast<double>(b), d, static_cast<double>(cfg.lerrw_steps), v.point,
                            v.std_error, static_cast<double>(b) / (b + 2)});
      speeds_out.row({std::to_string(b), detail::num(d), std::to_string(cfg.lerrw_steps),
                      detail::num(v.point), detail::num(v.std_error)});
      report.estimates["speed_b" + std::to_string(b) + "_delta" + detail::num(d)] = v;

      for (bool negative : {false, true}) {
        if (negative && !cfg.lerrw_negative_control) continue;
        const auto eq = equivalence_test(b, d, cfg.lerrw_prefix, cfg.lerrw_equivalence_replicates,
                                         derive_seed(cfg.seed, 0x6571ULL, b * 1000 + di * 2 + negative),
                                         negative ? std::optional<double>(1.0) : std::nullopt);
        equivalence.rows.push_back({static_cast<double>(b), d, negative ? 1.0 : 0.0, eq.p_value,
                                    eq.statistic, static_cast<double>(eq.df)});
        for (const auto& [prefix, counts] : eq.cells)
          cells_out.row({std::to_string(b), detail::num(d), negative ? "true" : "false",
                         detail::quoted(prefix), std::to_string(counts.first), std::to_string(counts.second)});
      }
    }
    Rng g(derive_seed(cfg.seed, 0x6b73ULL, b));
    std::vector<double> parent, child;
    for (std::size_t k = 0; k < cfg.lerrw_ks_samples; ++k) {
      const auto env = sample_beta_env(b, g);
      parent.push_back(env.parent);
      child.push_back(env.children[0]);
    }
    const auto ks0 = ks_test(parent, [b](double x) { return f0_cdf(b, x); });
    const auto ks1 = ks_test(child, [b](double x) { return f1_cdf(b, x); });
    marginals.rows.push_back({static_cast<double>(b), ks0.p_value, ks1.p_value});

    const auto h = check_theorem_errw_hypothesis(b, cfg.lerrw_ks_samples, derive_seed(cfg.seed, 0x6879ULL, b));
    hypothesis.rows.push_back({static_cast<double>(b), h.holds ? 1.0 : 0.0, h.tail_index, h.tail_index_lo,
                               h.mc_mean});
    report.verdicts["errw_hypothesis_b" + std::to_string(b)] = h.holds ? "holds" : "fails or borderline";
  }
  report.tables["speed"] = speed;
  report.tables["equivalence"] = equivalence;
  report.tables["marginals"] = marginals;
  report.tables["errw_hypothesis"] = hypothesis;
  return report;
}

// quick: identities and oracles; full: adds the acceptance experiments.
inline RunReport cmd_verify(const ExperimentConfig& cfg, const std::string& level,
                            const std::string& fault = "") {
  if (level != "quick" && level != "full") throw ConfigError("level", 0, "verify level must be quick or full");
  if (!fault.empty() && fault != "circuit") throw ConfigError("inject-fault", 0, "unknown fault '" + fault + "'");
  auto report = detail::start_report("verify " + level, cfg);
  inject_circuit_fault(fault == "circuit");
  struct Reset {
    ~Reset() { inject_circuit_fault(false); }
  } reset;
  report.checks = run_checks(quick_checks());
  if (level == "full") {
    AcceptanceOptions o{cfg.seed, cfg.workers};
    std::vector<NamedCheck> extra;
    for (auto& c : acceptance_checks(o)) {
      const bool ran = std::any_of(report.checks.begin(), report.checks.end(),
                                   [&](const CheckResult& r) { return r.name == c.name; });
      if (!ran) extra.push_back(std::move(c));
    }
    for (auto& c : run_checks(extra)) report.checks.push_back(std::move(c));
  }
  return report;
}

}  // namespace rwre
