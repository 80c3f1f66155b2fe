// rwre: command-line front end. Prints a JSON RunReport on stdout and writes
// the data table to --out when given.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rwre/rwre.hpp"

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kConfig = 2, kPrecondition = 3, kVerifyFailed = 4 };

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string out;
  std::string format;
  std::string level = "quick";
  std::string fault;
};

rwre::ExperimentConfig resolve(const Options& o) {
  auto cfg = o.config_path.empty() ? rwre::parse_config("") : rwre::load_config(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (!o.out.empty()) cfg.output_path = o.out;
  if (!o.format.empty()) cfg.output_format = o.format;
  return cfg;
}

int run(const std::string& command, const Options& o) {
  const auto cfg = resolve(o);
  std::ostringstream data;
  const auto t0 = std::chrono::steady_clock::now();
  rwre::RunReport report;
  if (command == "lambda") report = rwre::cmd_lambda(cfg, &data);
  else if (command == "simulate") report = rwre::cmd_simulate(cfg, &data);
  else if (command == "line") report = rwre::cmd_line(cfg, &data);
  else if (command == "lerrw") report = rwre::cmd_lerrw(cfg, &data);
  else report = rwre::cmd_verify(cfg, o.level, o.fault);
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!cfg.output_path.empty()) {
    std::ofstream f(cfg.output_path, std::ios::binary);
    if (!f) throw rwre::ConfigError("output.path", 0, "cannot write " + cfg.output_path);
    f << data.str();
  }
  std::cout << rwre::report_to_string(report) << '\n';

  if (!report.checks.empty()) {
    for (const auto& c : report.checks)
      std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    if (!report.all_checks_passed()) return kVerifyFailed;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random walks in random environment on Galton-Watson trees"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "Config file (key = value)")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "Data output path");
    sub->add_option("--format", o.format, "Data format")->check(CLI::IsMember({"csv", "jsonl"}));
  };
  std::string command;
  for (const char* name : {"lambda", "simulate", "line", "lerrw"}) {
    auto* sub = app.add_subcommand(name);
    common(sub);
    sub->callback([&command, name] { command = name; });
  }
  auto* verify = app.add_subcommand("verify", "Run the invariant suites");
  common(verify);
  verify->add_option("level", o.level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
  verify->add_option("--inject-fault", o.fault, "Deliberately break a formula")
      ->check(CLI::IsMember({"circuit"}));
  verify->callback([&command] { command = "verify"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    return run(command, o);
  } catch (const rwre::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kConfig;
  } catch (const rwre::Error& e) {
    std::cerr << "precondition failed: " << e.what() << '\n';
    return kPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternal;
  }
}
