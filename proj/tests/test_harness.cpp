#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rwre/harness.hpp"

using namespace rwre;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RWRE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string temp_path(const std::string& name) { return ::testing::TempDir() + name; }

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  const auto cfg = parse_config("seed = 9\n# comment\nwalk.steps = 500  # trailing\nlaw.a.values = 0.5, 4\n");
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.steps, 500u);
  EXPECT_EQ(cfg.a_values, (std::vector<double>{0.5, 4.0}));
  EXPECT_EQ(cfg.replicates, 20u);
  EXPECT_EQ(cfg.entries.size(), 3u);
}

TEST(Config, InvalidLawNamesTheField) {
  try {
    parse_config("seed = 1\nlaw.a.probs = 0.5, 0.4\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "law.a.probs");
    EXPECT_EQ(e.line(), 2u);
  }
  try {
    parse_config("law.offspring.probs = 0.3, 0.3\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "law.offspring.probs");
  }
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(parse_config("walk.steps = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("walk.stepz = 10\n"), ConfigError);
  EXPECT_THROW(parse_config("seed = 1\nseed = 2\n"), ConfigError);
  EXPECT_THROW(parse_config("seed\n"), ConfigError);
  EXPECT_THROW(parse_config("seed = -3\n"), ConfigError);
  EXPECT_THROW(parse_config("law.a.lo = abc\n"), ConfigError);
  EXPECT_THROW(parse_config("walk.schedule = 1, 100\n"), ConfigError);
  EXPECT_THROW(parse_config("lerrw.prefix = 11\n"), ConfigError);
  EXPECT_THROW(parse_config("output.format = xml\n"), ConfigError);
}

TEST(Config, ShippedConfigsParse) {
  for (const char* name : {"symmetric_regular", "zero_speed", "line_kesten", "line", "lerrw", "smoke"}) {
    EXPECT_NO_THROW(load_config(std::string(RWRE_CONFIG_DIR) + "/" + name + ".cfg")) << name;
  }
}

TEST(Report, ConfigHashIsGitBlobHash) {
  EXPECT_EQ(config_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(config_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Report, EstimatesCarryIntervalAndProvenance) {
  const std::vector<double> xs{1.0, 2.0, 4.0, 8.0};
  const auto e = EstimateWithCI::from_samples(xs, 17);
  EXPECT_GE(e.std_error, 0.0);
  EXPECT_DOUBLE_EQ(e.ci95.first, e.point - 1.96 * e.std_error);
  EXPECT_DOUBLE_EQ(e.ci95.second, e.point + 1.96 * e.std_error);
  EXPECT_EQ(e.replicates, 4u);
  EXPECT_EQ(e.seed, 17u);
}

TEST(Lambda, SymmetricHalfSingleChildren) {
  const auto r = cmd_lambda(parse_config("law.offspring.probs = 0.5, 0.5\n"));
  EXPECT_EQ(r.verdicts.at("transience"), "transient");
  EXPECT_NEAR(r.analytic.at("Lambda").value(), 3.7999372539, 1e-9);
  EXPECT_NEAR(r.analytic.at("L_prime").value(), -3.7999372539, 1e-9);
  EXPECT_EQ(r.verdicts.at("kappa"), "none");
  EXPECT_EQ(r.tables.at("L").rows.size(), 4u);
}

TEST(Lambda, NoSingleChildrenSerializesInfinity) {
  const auto r = cmd_lambda(parse_config(""));
  EXPECT_TRUE(r.analytic.at("Lambda").is_pos_inf());
  const auto json = report_to_string(r);
  EXPECT_NE(json.find("\"Lambda\": \"inf\""), std::string::npos);
  EXPECT_EQ(report_from_string(json), r);
}

TEST(Simulate, SmokeConfig) {
  const auto cfg = load_config(std::string(RWRE_CONFIG_DIR) + "/smoke.cfg");
  std::ostringstream data;
  const auto r = cmd_simulate(cfg, &data);
  EXPECT_EQ(r.tables.at("exponent").rows.size(), 3u);
  EXPECT_GT(r.estimates.at("speed").point, 0.0);
  EXPECT_EQ(data.str().substr(0, 22), "n,median,q25,q75,iqr\n1");
  EXPECT_EQ(report_from_string(report_to_string(r)), r);
}

TEST(Simulate, RecurrentConfigRaises) {
  EXPECT_THROW(cmd_simulate(parse_config("law.a.values = 0.2, 0.4\n")), NotTransient);
}

TEST(Simulate, OutputIsByteIdenticalAcrossRunsAndWorkers) {
  const std::string text = slurp(std::string(RWRE_CONFIG_DIR) + "/smoke.cfg");
  for (const char* format : {"csv", "jsonl"}) {
    std::ostringstream d1, d2, d3;
    const auto r1 = cmd_simulate(parse_config(text + "output.format = " + format + "\n"), &d1);
    const auto r2 = cmd_simulate(parse_config(text + "output.format = " + format + "\n"), &d2);
    const auto r3 = cmd_simulate(parse_config(text + "output.format = " + format + "\nworkers = 3\n"), &d3);
    EXPECT_EQ(d1.str(), d2.str());
    EXPECT_EQ(d1.str(), d3.str());
    EXPECT_EQ(r1.estimates, r3.estimates);
    EXPECT_FALSE(d1.str().empty());
  }
}

TEST(Line, OracleAndDegenerateMoments) {
  const auto cfg = parse_config(
      "line.n = 5, 10\nline.lambda = 0, 1\nline.p_n = 1, 5\nline.a = 0.5, 50\nline.replicates = 200\n"
      "line.oracle_envs = 50\n");
  std::ostringstream data;
  const auto r = cmd_line(cfg, &data);
  EXPECT_LT(r.analytic.at("oracle_max_hit_diff").value(), 1e-10);
  EXPECT_LT(r.analytic.at("oracle_max_exit_rel_diff").value(), 1e-10);
  for (const auto& row : r.tables.at("m").rows) {
    if (row[1] == 0.0) {
      EXPECT_EQ(row[2], 1.0);
    }
  }
  for (const auto& row : r.tables.at("p").rows) {
    if (row[1] < 1.0) {
      EXPECT_EQ(row[2], 1.0);
    } else if (row[0] == 1.0) {
      EXPECT_EQ(row[2], 0.0);
    }
  }
  EXPECT_EQ(data.str().substr(0, 26), "kind,n,param,estimate,stde");
}

TEST(Lerrw, SmallRun) {
  const auto cfg = parse_config(
      "lerrw.b = 2\nlerrw.steps = 5000\nlerrw.replicates = 10\nlerrw.prefix = 4\n"
      "lerrw.equivalence_replicates = 20000\nlerrw.negative_control = true\nlerrw.ks_samples = 2000\n");
  std::ostringstream data;
  const auto r = cmd_lerrw(cfg, &data);
  const auto& v = r.estimates.at("speed_b2_delta1");
  EXPECT_GT(v.point, 0.0);
  EXPECT_LE(v.point, 0.5);
  const auto& eq = r.tables.at("equivalence").rows;
  ASSERT_EQ(eq.size(), 2u);
  EXPECT_GT(eq[0][3], 1e-3);
  EXPECT_LT(eq[1][3], 1e-6);
  EXPECT_EQ(report_from_string(report_to_string(r)), r);
}

TEST(Verify, QuickPassesAndFaultIsCaught) {
  const auto cfg = parse_config("");
  const auto ok = cmd_verify(cfg, "quick");
  EXPECT_TRUE(ok.all_checks_passed());
  EXPECT_EQ(ok.checks.size(), 9u);

  const auto bad = cmd_verify(cfg, "quick", "circuit");
  EXPECT_FALSE(bad.all_checks_passed());
  for (const auto& c : bad.checks) EXPECT_EQ(c.passed, c.name != "circuit_vs_tridiagonal") << c.name;

  // The fault does not leak into later runs.
  EXPECT_TRUE(cmd_verify(cfg, "quick").all_checks_passed());
  EXPECT_THROW(cmd_verify(cfg, "deep"), ConfigError);
}

TEST(Cli, ExitCodes) {
  const std::string bad = temp_path("bad.cfg");
  write_file(bad, "law.a.probs = 0.5, 0.4\n");
  const std::string recurrent = temp_path("recurrent.cfg");
  write_file(recurrent, "law.a.values = 0.2, 0.4\nwalk.steps = 10\n");
  EXPECT_EQ(run_cli("lambda"), 0);
  EXPECT_EQ(run_cli("lambda --config " + bad), 2);
  EXPECT_EQ(run_cli("lambda --config /nonexistent.cfg"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("simulate --config " + recurrent), 3);
  EXPECT_EQ(run_cli("verify quick"), 0);
  EXPECT_EQ(run_cli("verify quick --inject-fault circuit"), 4);
}

TEST(Cli, WritesDataFileAndReport) {
  const std::string out = temp_path("lambda.csv");
  const std::string report = temp_path("lambda.json");
  ASSERT_EQ(std::system((std::string(RWRE_CLI_PATH) + " lambda --seed 3 --out " + out + " > " + report).c_str()), 0);
  EXPECT_EQ(slurp(out).substr(0, 13), "lambda,L,t_ba");
  const auto r = report_from_string(slurp(report));
  EXPECT_EQ(r.command, "lambda");
  EXPECT_EQ(r.seed, 3u);
}
