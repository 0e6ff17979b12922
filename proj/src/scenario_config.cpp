#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cqg/errors.hpp"
#include "cqg/scenario.hpp"

namespace cqg::scenario {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void allow_keys(const YAML::Node& node, const std::string& path, std::set<std::string> keys) {
  if (!node.IsMap()) fail(path, "expected a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!keys.count(key)) fail(path.empty() ? key : path + "." + key, "unknown key");
  }
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

template <class T>
T scalar(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) fail(path, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(path, "cannot read '" + node.Scalar() + "'");
  }
}

double number(const YAML::Node& node, const std::string& path) {
  const double v = scalar<double>(node, path);
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

int integer(const YAML::Node& node, const std::string& path, int lo, int hi) {
  const int v = scalar<int>(node, path);
  if (v < lo || v > hi) {
    fail(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return v;
}

std::vector<std::string> texts(const YAML::Node& node, const std::string& path) {
  if (node.IsScalar()) return {node.Scalar()};
  if (!node.IsSequence()) fail(path, "expected expression text or a list of them");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(scalar<std::string>(node[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<double> numbers(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence()) fail(path, "expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(number(node[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

int two_spin(const YAML::Node& node, const std::string& path) {
  const double s = number(node, path);
  const double twice = 2 * s;
  if (std::abs(twice - std::round(twice)) > 1e-12 || twice < 0 || twice > 4) {
    fail(path, "spin must be one of 0, 1/2, ..., 2");
  }
  return static_cast<int>(std::lround(twice));
}

Mode mode_of(const YAML::Node& node, const std::string& path) {
  const std::string m = scalar<std::string>(node, path);
  if (m == "rotation") return Mode::Rotation;
  if (m == "lorentz") return Mode::Lorentz;
  fail(path, "expected 'rotation' or 'lorentz'");
}

std::vector<std::string> default_names(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back("q" + std::to_string(i));
  return out;
}

void read_tolerances(const YAML::Node& node, Tolerances& t) {
  const std::string path = "tolerances";
  const std::map<std::string, double*> keys = {
      {"connection", &t.connection},
      {"weyl_scaling", &t.weyl_scaling},
      {"curvature", &t.curvature},
      {"madelung_gap", &t.madelung_gap},
      {"residual", &t.residual},
      {"quantum_potential", &t.quantum_potential},
      {"action", &t.action},
      {"hj", &t.hj},
      {"helicity", &t.helicity},
      {"representation", &t.representation},
      {"group_metric", &t.group_metric},
      {"round_trip", &t.round_trip},
      {"exchange", &t.exchange},
  };
  if (!node.IsMap()) fail(path, "expected a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    const auto it = keys.find(key);
    if (it == keys.end()) fail(join(path, key), "unknown tolerance");
    const double v = number(kv.second, join(path, key));
    if (!(v > 0)) fail(join(path, key), "must be positive");
    *it->second = v;
  }
}

void read_sampling(const YAML::Node& node, Scenario& sc) {
  const std::string path = "sampling";
  allow_keys(node, path, {"count", "box", "half_width"});
  if (node["count"]) sc.sampling.count = integer(node["count"], join(path, "count"), 1, 100000);
  if (node["box"] && node["half_width"]) fail(path, "give either box or half_width");
  if (node["half_width"]) {
    const double h = number(node["half_width"], join(path, "half_width"));
    if (!(h > 0)) fail(join(path, "half_width"), "must be positive");
    sc.sampling.lower.assign(sc.dimension, -h);
    sc.sampling.upper.assign(sc.dimension, h);
  }
  if (node["box"]) {
    const YAML::Node box = node["box"];
    const std::string bp = join(path, "box");
    if (!box.IsSequence() || static_cast<int>(box.size()) != sc.dimension) {
      fail(bp, "expected one [lower, upper] pair per spacetime coordinate");
    }
    sc.sampling.lower.clear();
    sc.sampling.upper.clear();
    for (std::size_t i = 0; i < box.size(); ++i) {
      const std::string ip = bp + "[" + std::to_string(i) + "]";
      const std::vector<double> pair = numbers(box[i], ip);
      if (pair.size() != 2 || !(pair[0] < pair[1])) fail(ip, "expected [lower, upper] with lower < upper");
      sc.sampling.lower.push_back(pair[0]);
      sc.sampling.upper.push_back(pair[1]);
    }
  }
}

void read_figure(const YAML::Node& node, Scenario& sc) {
  const std::string path = "figure";
  allow_keys(node, path, {"kind", "starts", "tau1", "steps", "shell_component"});
  FigureSpec f;
  if (node["kind"]) {
    const std::string k = scalar<std::string>(node["kind"], join(path, "kind"));
    if (k == "gradient") {
      f.kind = FigureSpec::Kind::Gradient;
    } else if (k == "characteristics") {
      f.kind = FigureSpec::Kind::Characteristics;
    } else {
      fail(join(path, "kind"), "expected 'gradient' or 'characteristics'");
    }
  }
  if (node["starts"]) {
    const YAML::Node s = node["starts"];
    if (!s.IsSequence()) fail(join(path, "starts"), "expected a list of points");
    for (std::size_t i = 0; i < s.size(); ++i) {
      f.starts.push_back(numbers(s[i], join(path, "starts") + "[" + std::to_string(i) + "]"));
    }
  }
  if (node["tau1"]) f.tau1 = number(node["tau1"], join(path, "tau1"));
  if (node["steps"]) f.steps = integer(node["steps"], join(path, "steps"), 0, 10000000);
  if (node["shell_component"]) {
    f.shell_component = integer(node["shell_component"], join(path, "shell_component"), 0, 64);
  }
  sc.figure = f;
}

void read_harmonics(const YAML::Node& node, Scenario& sc) {
  const std::string path = "harmonics";
  allow_keys(node, path,
             {"mode", "draws", "labels", "flip_spins", "round_trip_spins", "legendre_nodes"});
  HarmonicsSpec h;
  if (node["mode"]) h.mode = mode_of(node["mode"], join(path, "mode"));
  if (node["draws"]) h.draws = integer(node["draws"], join(path, "draws"), 1, 1000000);
  if (node["labels"]) {
    const YAML::Node l = node["labels"];
    const std::string lp = join(path, "labels");
    if (!l.IsSequence()) fail(lp, "expected a list of [u, v] pairs");
    h.labels.clear();
    for (std::size_t i = 0; i < l.size(); ++i) {
      const std::string ip = lp + "[" + std::to_string(i) + "]";
      if (!l[i].IsSequence() || l[i].size() != 2) fail(ip, "expected [u, v]");
      h.labels.push_back({two_spin(l[i][0], ip + "[0]"), two_spin(l[i][1], ip + "[1]")});
    }
  }
  for (auto [key, target] : {std::pair{"flip_spins", &h.flip_two_s},
                             std::pair{"round_trip_spins", &h.round_trip_two_s}}) {
    if (!node[key]) continue;
    const YAML::Node l = node[key];
    const std::string lp = join(path, key);
    if (!l.IsSequence()) fail(lp, "expected a list of spins");
    target->clear();
    for (std::size_t i = 0; i < l.size(); ++i) {
      target->push_back(two_spin(l[i], lp + "[" + std::to_string(i) + "]"));
    }
  }
  if (node["legendre_nodes"]) {
    h.legendre_nodes = integer(node["legendre_nodes"], join(path, "legendre_nodes"), 2, 512);
  }
  sc.harmonics = h;
}

void read_exchange(const YAML::Node& node, Scenario& sc) {
  const std::string path = "exchange";
  allow_keys(node, path, {"spin", "particles", "nx", "mode", "coordinates", "undotted", "dotted",
                          "permutation", "samples"});
  ExchangeSpec e;
  if (!node["spin"]) fail(join(path, "spin"), "required");
  e.two_s = two_spin(node["spin"], join(path, "spin"));
  if (node["particles"]) e.particles = integer(node["particles"], join(path, "particles"), 2, 5);
  if (node["nx"]) e.nx = integer(node["nx"], join(path, "nx"), 1, 8);
  if (node["mode"]) e.mode = mode_of(node["mode"], join(path, "mode"));
  if (node["coordinates"]) e.coordinates = texts(node["coordinates"], join(path, "coordinates"));
  if (e.coordinates.empty()) e.coordinates = default_names(e.particles * e.nx);
  if (static_cast<int>(e.coordinates.size()) != e.particles * e.nx) {
    fail(join(path, "coordinates"), "expected particles * nx names");
  }
  int count = 2;
  for (int h = 0; h < e.particles; ++h) count *= e.two_s + 1;
  if (!node["undotted"]) fail(join(path, "undotted"), "required");
  e.undotted = texts(node["undotted"], join(path, "undotted"));
  if (static_cast<int>(e.undotted.size()) != count) {
    fail(join(path, "undotted"), "expected " + std::to_string(count) + " components (re, im per index)");
  }
  if (node["dotted"]) {
    if (e.mode != Mode::Lorentz) fail(join(path, "dotted"), "only meaningful in lorentz mode");
    e.dotted = texts(node["dotted"], join(path, "dotted"));
    if (static_cast<int>(e.dotted.size()) != count) {
      fail(join(path, "dotted"), "expected " + std::to_string(count) + " components");
    }
  }
  if (node["permutation"]) {
    const YAML::Node p = node["permutation"];
    if (!p.IsSequence()) fail(join(path, "permutation"), "expected a list");
    for (std::size_t i = 0; i < p.size(); ++i) {
      e.permutation.push_back(
          integer(p[i], join(path, "permutation") + "[" + std::to_string(i) + "]", 0, e.particles - 1));
    }
    std::vector<int> sorted = e.permutation;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < static_cast<int>(sorted.size()); ++i) {
      if (sorted[i] != i || static_cast<int>(sorted.size()) != e.particles) {
        fail(join(path, "permutation"), "not a permutation of the particles");
      }
    }
  } else {
    for (int i = 0; i < e.particles; ++i) e.permutation.push_back(i);
    std::swap(e.permutation[0], e.permutation[1]);
  }
  if (node["samples"]) e.samples = integer(node["samples"], join(path, "samples"), 1, 10000000);
  sc.exchange = e;
}

}  // namespace

Scenario parse(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("YAML: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("top level: expected a mapping");
  allow_keys(root, "", {"name", "description", "dimension", "coordinates", "seed", "constants",
                        "solution", "sampling", "tolerances", "fields", "group", "suites", "figure",
                        "harmonics", "exchange"});
  Scenario sc;
  if (!root["name"]) fail("name", "required");
  sc.name = scalar<std::string>(root["name"], "name");
  if (root["description"]) sc.description = scalar<std::string>(root["description"], "description");
  if (!root["dimension"]) fail("dimension", "required");
  sc.dimension = integer(root["dimension"], "dimension", 3, 16);
  sc.coordinates = root["coordinates"] ? texts(root["coordinates"], "coordinates")
                                       : default_names(sc.dimension);
  if (static_cast<int>(sc.coordinates.size()) != sc.dimension) {
    fail("coordinates", "expected " + std::to_string(sc.dimension) + " names");
  }
  if (root["seed"]) sc.seed = scalar<std::uint64_t>(root["seed"], "seed");
  if (root["solution"]) sc.solution = scalar<bool>(root["solution"], "solution");
  if (root["constants"]) {
    const YAML::Node c = root["constants"];
    if (!c.IsMap()) fail("constants", "expected a mapping");
    for (const auto& kv : c) {
      const std::string key = kv.first.as<std::string>();
      sc.constants[key] = number(kv.second, join("constants", key));
    }
    if (sc.constants.count("hbar")) sc.hbar = sc.constants["hbar"];
    if (sc.constants.count("s")) sc.s = sc.constants["s"];
    if (sc.constants.count("charge_over_c")) sc.charge_over_c = sc.constants["charge_over_c"];
    if (!(sc.hbar > 0)) fail("constants.hbar", "must be positive");
  }
  sc.sampling.lower.assign(sc.dimension, -1.0);
  sc.sampling.upper.assign(sc.dimension, 1.0);
  if (root["sampling"]) read_sampling(root["sampling"], sc);
  if (root["tolerances"]) read_tolerances(root["tolerances"], sc.tolerances);
  if (root["fields"]) {
    const YAML::Node f = root["fields"];
    allow_keys(f, "fields", {"metric", "phi", "lambda", "rho", "S", "A", "scalar_curvature"});
    for (const auto& kv : f) {
      const std::string key = kv.first.as<std::string>();
      sc.fields[key] = texts(kv.second, join("fields", key));
    }
  }
  if (root["group"]) {
    const YAML::Node g = root["group"];
    allow_keys(g, "group", {"mode", "group_scale", "internal_field"});
    GroupSpec spec;
    if (g["mode"]) spec.mode = mode_of(g["mode"], "group.mode");
    if (g["group_scale"]) spec.group_scale = number(g["group_scale"], "group.group_scale");
    if (g["internal_field"]) {
      spec.internal_field = texts(g["internal_field"], "group.internal_field");
      if (static_cast<int>(spec.internal_field.size()) != harmonics::algebra_dim(spec.mode)) {
        fail("group.internal_field",
             "expected " + std::to_string(harmonics::algebra_dim(spec.mode)) + " components");
      }
    }
    sc.group = spec;
  }
  if (!root["suites"]) fail("suites", "required");
  sc.suites = texts(root["suites"], "suites");
  for (std::size_t i = 0; i < sc.suites.size(); ++i) {
    const auto& known = suite_names();
    if (std::find(known.begin(), known.end(), sc.suites[i]) == known.end()) {
      fail("suites[" + std::to_string(i) + "]", "unknown suite '" + sc.suites[i] + "'");
    }
  }
  if (root["figure"]) read_figure(root["figure"], sc);
  if (root["harmonics"]) read_harmonics(root["harmonics"], sc);
  if (root["exchange"]) read_exchange(root["exchange"], sc);
  return sc;
}

Scenario load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace cqg::scenario
