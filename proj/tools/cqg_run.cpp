// Scenario runner.
//
//   cqg run <config.yaml | bundled-name> [--suite NAME]... [--out DIR] [--seed N]
//   cqg list
//
// Reports go to DIR (default $CQG_OUT_DIR, else ./cqg-out): report.json,
// one CSV per table and meta.json holding the wall-clock timestamp, which
// is kept out of report.json so reruns compare byte for byte.
// Exit codes: 0 all suites pass, 1 verification failure, 2 usage or config error.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cqg/errors.hpp"
#include "cqg/scenario.hpp"

namespace fs = std::filesystem;
using namespace cqg;

namespace {

scenario::Scenario resolve(const std::string& arg) {
  if (fs::exists(arg)) return scenario::load(arg);
  if (auto text = scenario::bundled_text(arg)) return scenario::parse(*text);
  throw ConfigError(arg + ": no such file or bundled scenario (see `cqg list`)");
}

void write_file(const fs::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError(p.string() + ": cannot write");
  out << body;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

int run(const std::string& config, const std::vector<std::string>& suites, std::string out_dir,
        std::optional<std::uint64_t> seed) {
  scenario::Scenario sc = resolve(config);
  if (seed) sc.seed = *seed;
  const scenario::Report report = scenario::run(sc, suites);

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  write_file(dir / "report.json", scenario::to_json(report).dump(2) + "\n");
  for (const auto& s : report.suites) {
    for (const auto& t : s.tables) write_file(dir / (t.name + ".csv"), t.csv);
  }
  const nlohmann::ordered_json meta{{"scenario", sc.name},
                                    {"config", config},
                                    {"generated_utc", utc_now()}};
  write_file(dir / "meta.json", meta.dump(2) + "\n");

  std::cout << "scenario " << sc.name << " (seed " << sc.seed << ")\n";
  for (const auto& s : report.suites) {
    std::cout << "  [" << (s.passed ? "PASS" : "FAIL") << "] " << s.name << "\n";
    if (s.error) std::cout << "         error: " << *s.error << "\n";
    for (const auto& c : s.checks) {
      if (!c.passed) {
        std::cout << "         " << c.name << " = " << c.value << " (tolerance " << c.tolerance << ")\n";
      }
    }
  }
  std::cout << "report written to " << (dir / "report.json").string() << "\n";
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario runner for the conformal geometrodynamics checks"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run a scenario file or a bundled scenario");
  std::string config;
  std::vector<std::string> suites;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  run_cmd->add_option("config", config, "YAML scenario file or bundled scenario name")->required();
  run_cmd->add_option("--suite", suites, "Run only this suite (repeatable)")
      ->check(CLI::IsMember(scenario::suite_names()));
  run_cmd->add_option("--out", out_dir, "Output directory (default $CQG_OUT_DIR or ./cqg-out)");
  run_cmd->add_option("--seed", seed, "Override the scenario seed");

  auto* list_cmd = app.add_subcommand("list", "List bundled scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (list_cmd->parsed()) {
      for (const auto& e : scenario::catalog()) std::cout << e.name << "\t" << e.description << "\n";
      return 0;
    }
    if (out_dir.empty()) {
      const char* env = std::getenv("CQG_OUT_DIR");
      out_dir = env && *env ? env : "cqg-out";
    }
    return run(config, suites, out_dir, seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
