#pragma once

// Named verification runs. A scenario is a YAML document declaring fields
// (expression text), constants, sample points, tolerances and the suites to
// execute; running it yields a Report that serializes to JSON plus CSV
// tables. See README.md for the schema.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cqg/harmonics.hpp"
#include "json.hpp"

namespace cqg::scenario {

using harmonics::Mode;

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"gauge",  "curvature", "madelung",
                                                 "figure", "harmonics", "exchange"};
  return names;
}

struct Sampling {
  int count = 20;
  std::vector<double> lower, upper;  // domain box on the spacetime chart
};

struct Tolerances {
  double connection = 1e-9;       // gauge: Weyl connection max-norm
  double weyl_scaling = 1e-8;     // gauge: R_W -> lambda^-2 R_W, relative
  double curvature = 1e-8;        // two-path R_W, relative
  double madelung_gap = 1e-6;     // wave/Psi against (hj, continuity)
  double residual = 1e-10;        // field equations, when declared a solution
  double quantum_potential = 1e-8;
  double action = 1e-8;           // action increment against S(end) - S(start)
  double hj = 1e-6;               // gradient flow off the mass shell
  double helicity = 1e-6;         // p_gamma drift
  double representation = 1e-10;  // homomorphism and left translation
  double group_metric = 1e-9;     // gamma independence
  double round_trip = 1e-8;
  double exchange = 1e-10;
};

struct GroupSpec {
  Mode mode = Mode::Rotation;
  double group_scale = -0.5;
  std::vector<std::string> internal_field;  // F on the spacetime chart, ordered (H, E)
};

struct FigureSpec {
  enum class Kind { Gradient, Characteristics };
  Kind kind = Kind::Gradient;
  std::vector<std::vector<double>> starts;  // full configuration points
  double tau1 = 1.0;
  int steps = 1000;
  int shell_component = 0;  // characteristics: p0 completed on shell here
};

struct HarmonicsSpec {
  std::optional<Mode> mode;  // defaults to the group mode, else rotation
  int draws = 100;
  std::vector<harmonics::RepLabel> labels = {{1, 0}, {0, 1}, {2, 0}};
  std::vector<int> flip_two_s = {1, 2, 3};
  std::vector<int> round_trip_two_s = {0, 1, 2};
  int legendre_nodes = 32;
};

struct ExchangeSpec {
  int two_s = 1;
  int particles = 2;
  int nx = 1;
  Mode mode = Mode::Rotation;
  std::vector<std::string> coordinates;  // default q0.. over particles * nx
  std::vector<std::string> undotted;
  std::vector<std::string> dotted;
  std::vector<int> permutation;  // default: swap of particles 0 and 1
  int samples = 1000;
};

struct Scenario {
  std::string name;
  std::string description;
  int dimension = 0;
  std::vector<std::string> coordinates;
  std::map<std::string, double> constants;  // bound in every expression
  double hbar = 1.0;
  double s = 0.0;
  double charge_over_c = 1.0;
  std::uint64_t seed = 1;
  Sampling sampling;
  Tolerances tolerances;
  std::map<std::string, std::vector<std::string>> fields;
  bool solution = false;  // (rho, S, A) claimed to solve the field equations
  std::optional<GroupSpec> group;
  std::vector<std::string> suites;
  std::optional<FigureSpec> figure;
  std::optional<HarmonicsSpec> harmonics;
  std::optional<ExchangeSpec> exchange;
};

/// ConfigError naming the key path on malformed input.
Scenario parse(const std::string& yaml_text);
Scenario load(const std::string& path);

struct CatalogEntry {
  std::string name;
  std::string description;
};

/// Bundled scenarios, sorted by name.
std::vector<CatalogEntry> catalog();
std::optional<std::string> bundled_text(const std::string& name);

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  nlohmann::ordered_json detail;  // optional extra fields
};

struct Table {
  std::string name;  // file stem
  std::string csv;
};

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::vector<Check> checks;
  std::optional<std::string> error;  // runtime failure inside the suite
  nlohmann::ordered_json verdicts;   // exchange verdict records
  std::vector<Table> tables;
};

struct Report {
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<SuiteResult> suites;
  bool passed() const;
};

/// Runs the selected suites (all declared ones when `filter` is empty).
/// ConfigError when the filter names a suite the scenario does not set up.
Report run(const Scenario& scenario, const std::vector<std::string>& filter = {});

nlohmann::ordered_json to_json(const Report& report);

}  // namespace cqg::scenario
