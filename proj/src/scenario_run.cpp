#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <sstream>
#include <thread>

#include "cqg/errors.hpp"
#include "cqg/figure.hpp"
#include "cqg/madelung.hpp"
#include "cqg/rng.hpp"
#include "cqg/scenario.hpp"
#include "cqg/spinstat.hpp"
#include "cqg/weyl.hpp"

namespace cqg::scenario {

namespace {

constexpr double kPi = std::numbers::pi;
using json = nlohmann::ordered_json;

std::vector<std::string> group_names(Mode mode) {
  if (mode == Mode::Rotation) return {"alpha", "beta", "gamma"};
  return {"alpha", "beta", "gamma", "phi", "theta", "chi"};
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Evaluates fn(0..count-1) on a few worker threads; results stay in index
// order so the outcome does not depend on scheduling.
template <class T, class Fn>
std::vector<T> parallel_map(int count, Fn fn) {
  const int workers = std::max(1, std::min<int>(count, std::thread::hardware_concurrency()));
  std::vector<T> out(count);
  std::vector<std::future<void>> jobs;
  for (int w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (int i = w; i < count; i += workers) out[i] = fn(i);
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

double relative(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

Check make_check(std::string name, double value, double tolerance) {
  Check c;
  c.name = std::move(name);
  c.value = value;
  c.tolerance = tolerance;
  c.passed = std::isfinite(value) && value <= tolerance;
  return c;
}

class Context {
 public:
  explicit Context(const Scenario& sc) : sc_(sc) {
    names_ = sc.coordinates;
    if (sc.group) {
      for (const auto& g : group_names(sc.group->mode)) names_.push_back(g);
    }
    constants_ = sc.constants;
    for (const auto& n : names_) {
      if (constants_.count(n)) throw ConfigError("constants." + n + ": shadows a coordinate");
    }
    draw_points();
  }

  int dim() const { return static_cast<int>(names_.size()); }
  const std::vector<Point>& points() const { return points_; }

  bool has(const std::string& key) const { return sc_.fields.count(key) > 0; }

  Field field(const std::string& key, int components, bool spacetime_only = false) const {
    const auto it = sc_.fields.find(key);
    if (it == sc_.fields.end()) throw ConfigError("fields." + key + ": required by this suite");
    if (static_cast<int>(it->second.size()) != components) {
      throw ConfigError("fields." + key + ": expected " + std::to_string(components) +
                        " components, got " + std::to_string(it->second.size()));
    }
    const std::vector<std::string> chart =
        spacetime_only ? sc_.coordinates : names_;
    try {
      return Field::from_text(it->second, chart, constants_);
    } catch (const ParseError& e) {
      throw ConfigError("fields." + key + ": " + e.what());
    }
  }

  Field metric() const {
    const int n = sc_.dimension;
    const bool diagonal = has("metric") && static_cast<int>(sc_.fields.at("metric").size()) == n;
    Field g;
    if (diagonal) {
      const Field d = field("metric", n, sc_.group.has_value());
      g = Field(d.dim(), n * n, [d, n](const Point& q, int order) {
        const std::vector<Jet> v = d.jets(q, order);
        std::vector<Jet> out(n * n, v[0] * 0.0);
        for (int i = 0; i < n; ++i) out[i * n + i] = v[i];
        return out;
      });
    } else {
      g = field("metric", n * n, sc_.group.has_value());
    }
    if (!sc_.group) return g;
    return harmonics::configuration_metric(g, sc_.group->mode, sc_.group->group_scale);
  }

  // (e/c) A on the configuration chart; zero when not declared.
  Field covector() const {
    const int n = sc_.dimension;
    const double ec = sc_.charge_over_c;
    Field a = has("A") ? field("A", n, sc_.group.has_value()) : Field::zero(n, n);
    if (!sc_.group) {
      return a.map(n, [ec](const std::vector<Jet>& v) {
        std::vector<Jet> out;
        for (const auto& j : v) out.push_back(j * ec);
        return out;
      });
    }
    const Mode mode = sc_.group->mode;
    const int m = harmonics::algebra_dim(mode);
    Field f = Field::zero(n, m);
    if (!sc_.group->internal_field.empty()) {
      try {
        f = Field::from_text(sc_.group->internal_field, sc_.coordinates, constants_);
      } catch (const ParseError& e) {
        throw ConfigError(std::string("group.internal_field: ") + e.what());
      }
    }
    return harmonics::assemble_internal_field(a, f, mode, ec);
  }

  weyl::Geometry geometry() const {
    const int n = dim();
    Field phi;
    if (has("phi")) {
      phi = field("phi", n);
    } else if (has("rho")) {
      phi = weyl::weyl_vector_from_density(field("rho", 1));
    } else {
      phi = Field::zero(n, n);
    }
    return {metric(), phi};
  }

  madelung::State state() const {
    return {field("rho", 1), field("S", 1), covector()};
  }

 private:
  void draw_points() {
    CounterRng rng(sc_.seed, 0);
    const int n = sc_.dimension;
    for (int k = 0; k < sc_.sampling.count; ++k) {
      Point q(dim());
      for (int i = 0; i < n; ++i) q[i] = rng.uniform(sc_.sampling.lower[i], sc_.sampling.upper[i]);
      if (sc_.group) {
        // Chart coordinates away from the singular set of the Killing data.
        q[n] = rng.uniform(-kPi, kPi);
        q[n + 1] = rng.uniform(0.2, kPi - 0.2);
        q[n + 2] = rng.uniform(-2 * kPi, 2 * kPi);
        if (sc_.group->mode == Mode::Lorentz) {
          q[n + 3] = rng.uniform(-kPi, kPi);
          q[n + 4] = rng.uniform(0.2, kPi - 0.2);
          q[n + 5] = rng.uniform(0.1, 1.2);
        }
      }
      points_.push_back(q);
    }
  }

  const Scenario& sc_;
  std::vector<std::string> names_;
  Constants constants_;
  std::vector<Point> points_;
};

std::string point_columns(int n) {
  std::string out;
  for (int i = 0; i < n; ++i) out += ",q" + std::to_string(i);
  return out;
}

std::string point_cells(const Point& q) {
  std::string out;
  for (Eigen::Index i = 0; i < q.size(); ++i) out += "," + fmt(q[i]);
  return out;
}

void gauge_suite(const Scenario& sc, const Context& ctx, SuiteResult& r) {
  const weyl::Geometry geo = ctx.geometry();
  const Field lambda = ctx.field("lambda", 1);
  const weyl::Geometry moved = weyl::gauge_transform(geo, lambda);
  const bool with_state = ctx.has("rho") && ctx.has("S");
  const madelung::State st = with_state ? ctx.state() : madelung::State{};
  const madelung::State st_moved = with_state ? madelung::gauge_transform(st, lambda) : st;
  const madelung::Couplings c{sc.hbar, sc.charge_over_c};
  struct Row {
    double connection, rw, rw_gap, hj_gap;
  };
  const auto& pts = ctx.points();
  const std::vector<Row> rows = parallel_map<Row>(static_cast<int>(pts.size()), [&](int k) {
    const Point& q = pts[k];
    const double l = lambda.value(q);
    const Tensor<double> a = weyl::weyl_connection(geo, q), b = weyl::weyl_connection(moved, q);
    double gap = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) gap = std::max(gap, std::abs(a.data()[i] - b.data()[i]));
    const double rw = weyl::weyl_scalar_curvature(geo, q);
    const double rw2 = weyl::weyl_scalar_curvature(moved, q);
    double hj_gap = 0.0;
    if (with_state) {
      // Relative to the size of the terms that cancel in a solution.
      const double a = madelung::hj_residual(st, geo, q, c);
      const double b = l * l * madelung::hj_residual(st_moved, moved, q, c);
      const double xi = madelung::xi_coefficient(geo.dim());
      const double terms = sc.hbar * sc.hbar * xi * xi * std::abs(weyl::weyl_curvature_from_density(st.rho, geo, q));
      const double scale = std::max({std::abs(a), std::abs(b), terms});
      hj_gap = scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
    }
    return Row{gap, rw, relative(rw, l * l * rw2), hj_gap};
  });
  double connection = 0.0, scaling = 0.0, hj = 0.0;
  std::string csv = "point" + point_columns(ctx.dim()) + ",connection_gap,weyl_curvature,scaling_gap\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    connection = std::max(connection, rows[k].connection);
    scaling = std::max(scaling, rows[k].rw_gap);
    hj = std::max(hj, rows[k].hj_gap);
    csv += std::to_string(k) + point_cells(pts[k]) + "," + fmt(rows[k].connection) + "," +
           fmt(rows[k].rw) + "," + fmt(rows[k].rw_gap) + "\n";
  }
  r.checks.push_back(make_check("weyl_connection_invariance", connection, sc.tolerances.connection));
  r.checks.push_back(make_check("weyl_curvature_weight", scaling, sc.tolerances.weyl_scaling));
  if (with_state) r.checks.push_back(make_check("hj_residual_weight", hj, sc.tolerances.weyl_scaling));
  r.tables.push_back({"gauge", csv});
}

void curvature_suite(const Scenario& sc, const Context& ctx, SuiteResult& r) {
  const int n = ctx.dim();
  const Field metric = ctx.metric();
  const Field rho = ctx.field("rho", 1);
  const weyl::Geometry from_phi(metric, weyl::weyl_vector_from_density(rho));
  const weyl::Geometry plain(metric, Field::zero(n, n));
  const double derived = weyl::density_coefficient(n);
  const double printed = weyl::printed_density_coefficient(n);
  struct Row {
    double direct, density, gap, printed_gap, bracket, fitted;
  };
  const auto& pts = ctx.points();
  const std::vector<Row> rows = parallel_map<Row>(static_cast<int>(pts.size()), [&](int k) {
    const Point& q = pts[k];
    Row row;
    row.direct = weyl::weyl_scalar_curvature(from_phi, q);
    row.density = weyl::weyl_curvature_from_density(rho, plain, q);
    row.gap = relative(row.direct, row.density);
    row.printed_gap = relative(row.direct, weyl::weyl_curvature_from_density(rho, plain, q, printed));
    row.bracket = weyl::density_bracket(rho, plain, q);
    row.fitted = std::abs(row.bracket) > 1e-6 ? weyl::fitted_density_coefficient(rho, plain, q)
                                               : std::nan("");
    return row;
  });
  double gap = 0.0, printed_gap = 0.0, fit = 0.0;
  int fitted = 0;
  std::string csv = "point" + point_columns(n) + ",direct,density_form,relative_gap,printed_gap,fitted_coefficient\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Row& row = rows[k];
    gap = std::max(gap, row.gap);
    printed_gap = std::max(printed_gap, row.printed_gap);
    if (!std::isnan(row.fitted)) {
      fit = std::max(fit, std::abs(row.fitted - derived) / derived);
      ++fitted;
    }
    csv += std::to_string(k) + point_cells(pts[k]) + "," + fmt(row.direct) + "," + fmt(row.density) +
           "," + fmt(row.gap) + "," + fmt(row.printed_gap) + "," +
           (std::isnan(row.fitted) ? std::string("") : fmt(row.fitted)) + "\n";
  }
  Check two_path = make_check("two_path_weyl_curvature", gap, sc.tolerances.curvature);
  two_path.detail = json{{"coefficient_derived", derived},
                         {"coefficient_printed", printed},
                         {"printed_matches_derived", std::abs(printed - derived) <= 1e-12},
                         {"printed_path_max_gap", printed_gap},
                         {"fitted_points", fitted}};
  r.checks.push_back(two_path);
  if (fitted > 0) {
    r.checks.push_back(make_check("fitted_coefficient", fit, 1e-6));
  }
  if (ctx.has("scalar_curvature")) {
    const Field expected = ctx.field("scalar_curvature", 1);
    const weyl::Geometry lc(metric, Field::zero(n, n));
    const std::vector<double> gaps = parallel_map<double>(static_cast<int>(pts.size()), [&](int k) {
      return relative(weyl::scalar_curvature_jet(lc, pts[k], 0).value(), expected.value(pts[k]));
    });
    r.checks.push_back(make_check("reference_scalar_curvature", *std::max_element(gaps.begin(), gaps.end()),
                                  sc.tolerances.curvature));
  }
  r.tables.push_back({"curvature", csv});
}

void madelung_suite(const Scenario& sc, const Context& ctx, SuiteResult& r) {
  const int n = ctx.dim();
  const weyl::Geometry geo(ctx.metric(), Field::zero(n, n));
  const madelung::State st = ctx.state();
  const madelung::Couplings c{sc.hbar, sc.charge_over_c};
  const madelung::Wavefunction psi = madelung::ansatz_compose(st, c);
  struct Row {
    double real_gap, imag_gap, hj, continuity, wave, qp;
  };
  const auto& pts = ctx.points();
  const std::vector<Row> rows = parallel_map<Row>(static_cast<int>(pts.size()), [&](int k) {
    const Point& q = pts[k];
    const madelung::Equivalence e = madelung::madelung_equivalence(st, geo, q, c);
    const double wave = std::abs(madelung::wave_residual(psi, st.A, geo, q, c));
    return Row{e.real_gap, e.imag_gap, e.hj, e.continuity, wave,
               std::abs(madelung::quantum_potential_gap(st.rho, geo, q, c))};
  });
  Row worst{0, 0, 0, 0, 0, 0};
  std::string csv = "point" + point_columns(n) + ",real_gap,imag_gap,hj,continuity,wave,quantum_potential_gap\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Row& row = rows[k];
    worst.real_gap = std::max(worst.real_gap, row.real_gap);
    worst.imag_gap = std::max(worst.imag_gap, row.imag_gap);
    worst.hj = std::max(worst.hj, std::abs(row.hj));
    worst.continuity = std::max(worst.continuity, std::abs(row.continuity));
    worst.wave = std::max(worst.wave, row.wave);
    worst.qp = std::max(worst.qp, row.qp);
    csv += std::to_string(k) + point_cells(pts[k]) + "," + fmt(row.real_gap) + "," + fmt(row.imag_gap) +
           "," + fmt(row.hj) + "," + fmt(row.continuity) + "," + fmt(row.wave) + "," + fmt(row.qp) + "\n";
  }
  const double gap_tol = sc.solution ? sc.tolerances.residual : sc.tolerances.madelung_gap;
  r.checks.push_back(make_check("real_gap", worst.real_gap, gap_tol));
  r.checks.push_back(make_check("imag_gap", worst.imag_gap, gap_tol));
  r.checks.push_back(make_check("quantum_potential_gap", worst.qp, sc.tolerances.quantum_potential));
  if (sc.solution) {
    r.checks.push_back(make_check("hj_residual", worst.hj, sc.tolerances.residual));
    r.checks.push_back(make_check("continuity_residual", worst.continuity, sc.tolerances.residual));
    r.checks.push_back(make_check("wave_residual", worst.wave, sc.tolerances.residual));
  }
  r.tables.push_back({"madelung", csv});
}

void figure_suite(const Scenario& sc, const Context& ctx, SuiteResult& r) {
  if (!sc.figure) throw ConfigError("figure: section required by the figure suite");
  const FigureSpec& spec = *sc.figure;
  const int n = ctx.dim();
  const figure::Background bg =
      figure::from_density(ctx.metric(), ctx.field("rho", 1), ctx.covector(), sc.hbar);
  const Field S = ctx.field("S", 1);
  std::vector<Point> starts;
  for (std::size_t i = 0; i < spec.starts.size(); ++i) {
    if (static_cast<int>(spec.starts[i].size()) != n) {
      throw ConfigError("figure.starts[" + std::to_string(i) + "]: expected " + std::to_string(n) +
                        " coordinates");
    }
    starts.push_back(Eigen::Map<const Eigen::VectorXd>(spec.starts[i].data(), n));
  }
  if (starts.empty()) {
    const auto& pts = ctx.points();
    starts.assign(pts.begin(), pts.begin() + std::min<std::size_t>(4, pts.size()));
  }
  figure::IntegrationOptions o;
  o.tau1 = spec.tau1;
  o.steps = spec.steps;
  o.hj_tolerance = sc.tolerances.hj;
  const int gamma = sc.group ? sc.dimension + harmonics::kGammaIndex : -1;

  std::vector<figure::Trajectory> ts;
  if (spec.kind == FigureSpec::Kind::Gradient) {
    ts = figure::integrate_bundle(S, bg, starts, o);
  } else {
    if (spec.shell_component >= n) throw ConfigError("figure.shell_component: outside the chart");
    ts = parallel_map<figure::Trajectory>(static_cast<int>(starts.size()), [&](int k) {
      const Eigen::VectorXd p0 =
          figure::complete_on_shell(bg, starts[k], gradient(S).values(starts[k]), spec.shell_component);
      return figure::integrate_characteristics(bg, starts[k], p0, o);
    });
  }
  double action = 0.0, shell = 0.0, helicity = 0.0;
  json per = json::array();
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const figure::Trajectory& t = ts[k];
    json rec{{"start", std::vector<double>(starts[k].data(), starts[k].data() + n)}};
    if (spec.kind == FigureSpec::Kind::Gradient) {
      const double inc = figure::action_increment(t);
      const double ds = S.value(t.samples.back().q) - S.value(t.samples.front().q);
      action = std::max(action, std::abs(inc - ds));
      shell = std::max(shell, t.max_hj_residual);
      rec["action_increment"] = inc;
      rec["S_difference"] = ds;
      rec["hj_warning"] = t.hj_warning;
    } else {
      for (const auto& s : t.samples) {
        const double m = figure::mass(bg, s.q);
        shell = std::max(shell, std::abs(s.radicand - m * m) / std::max(1.0, m * m));
      }
    }
    if (gamma >= 0) {
      const figure::HelicityRecord h = figure::intrinsic_helicity(t, gamma, sc.hbar, sc.s);
      helicity = std::max(helicity, h.max_deviation);
      rec["p_gamma_drift"] = h.max_deviation;
    }
    per.push_back(rec);
    std::ostringstream os;
    os.precision(17);
    figure::write_csv(t, os, gamma);
    r.tables.push_back({"figure_" + std::to_string(k), os.str()});
  }
  if (spec.kind == FigureSpec::Kind::Gradient) {
    r.checks.push_back(make_check("action_increment", action, sc.tolerances.action));
  }
  r.checks.push_back(make_check("mass_shell", shell, sc.tolerances.hj));
  if (gamma >= 0) r.checks.push_back(make_check("p_gamma_drift", helicity, sc.tolerances.helicity));
  r.checks.back().detail = json{{"trajectories", per}};
}

std::string label_text(const harmonics::RepLabel& l) {
  auto half = [](int two) { return two % 2 ? std::to_string(two) + "/2" : std::to_string(two / 2); };
  return "(" + half(l.two_u) + "," + half(l.two_v) + ")";
}

void harmonics_suite(const Scenario& sc, const Context&, SuiteResult& r) {
  const HarmonicsSpec spec = sc.harmonics.value_or(HarmonicsSpec{});
  const Mode mode = spec.mode ? *spec.mode : sc.group ? sc.group->mode : Mode::Rotation;
  CounterRng rng(sc.seed, 4);
  auto chart = [&](CounterRng& g) {
    std::vector<double> y = {g.uniform(-kPi, kPi), g.uniform(0.1, kPi - 0.1), g.uniform(-6, 6)};
    if (mode == Mode::Lorentz) {
      y.push_back(g.uniform(-kPi, kPi));
      y.push_back(g.uniform(0.1, kPi - 0.1));
      y.push_back(g.uniform(0.05, 2.0));
    }
    return y;
  };
  auto max_abs = [](const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); };

  for (const auto& label : spec.labels) {
    double worst = 0.0;
    for (int i = 0; i < spec.draws; ++i) {
      const auto a = harmonics::from_euler(chart(rng), mode);
      const auto b = harmonics::from_euler(chart(rng), mode);
      const Eigen::MatrixXcd da = harmonics::wigner_D(label, a), db = harmonics::wigner_D(label, b);
      worst = std::max(worst, max_abs(harmonics::wigner_D(label, a * b) - da * db) /
                                  (1 + max_abs(da) * max_abs(db)));
    }
    r.checks.push_back(make_check("homomorphism " + label_text(label), worst, sc.tolerances.representation));
  }

  double translation = 0.0;
  for (int i = 0; i < spec.draws; ++i) {
    const auto l = harmonics::from_euler(chart(rng), mode);
    std::vector<double> yt = chart(rng);
    yt.erase(yt.begin() + harmonics::kGammaIndex);
    const auto f = harmonics::left_translation(l, yt, mode);
    translation = std::max(translation, harmonics::left_translation_residual(l, yt, f, mode));
  }
  r.checks.push_back(make_check("left_translation", translation, sc.tolerances.representation));

  double metric_gap = 0.0;
  for (int i = 0; i < spec.draws; ++i) {
    std::vector<double> y = chart(rng);
    const Eigen::MatrixXd g0 = harmonics::killing_data(y, mode).group_metric;
    y[harmonics::kGammaIndex] += rng.uniform(-2 * kPi, 2 * kPi);
    const Eigen::MatrixXd g1 = harmonics::killing_data(y, mode).group_metric;
    metric_gap = std::max(metric_gap, (g1 - g0).cwiseAbs().maxCoeff());
  }
  r.checks.push_back(make_check("group_metric_gamma_independence", metric_gap, sc.tolerances.group_metric));

  for (int two_s : spec.flip_two_s) {
    double worst = 0.0;
    for (int i = 0; i < spec.draws; ++i) {
      std::vector<double> y = chart(rng);
      const Eigen::MatrixXcd before = harmonics::wigner_D({0, two_s}, harmonics::from_euler(y, mode));
      y[harmonics::kGammaIndex] += 2 * kPi;
      const Eigen::MatrixXcd after = harmonics::wigner_D({0, two_s}, harmonics::from_euler(y, mode));
      const double sign = two_s % 2 ? -1.0 : 1.0;
      worst = std::max(worst, max_abs(after - sign * before) / max_abs(before));
    }
    r.checks.push_back(make_check("fiber_turn " + label_text({0, two_s}), worst, 1e-12));
  }

  harmonics::QuadratureOptions qo;
  qo.legendre_nodes = spec.legendre_nodes;
  qo.azimuth_nodes = spec.legendre_nodes;
  qo.seed = sc.seed;
  for (int two_s : spec.round_trip_two_s) {
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::VectorXcd c(two_s + 1), d(two_s + 1);
      for (auto& v : c) v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      for (auto& v : d) v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const bool both = mode == Mode::Lorentz && two_s > 0;
      auto field = [&](std::span<const double> y) {
        harmonics::Complex v = harmonics::undotted_basis(y, two_s, mode).cwiseProduct(c).sum();
        if (both) v += harmonics::dotted_basis(y, two_s, mode).cwiseProduct(d).sum();
        return v;
      };
      const harmonics::QuotientExpansion ex = harmonics::quotient_expand(field, two_s, mode, qo);
      double l2 = 0.0, norm = 0.0;
      for (int k = 0; k < 50; ++k) {
        std::vector<double> y = chart(rng);
        y.erase(y.begin() + harmonics::kGammaIndex);
        l2 += std::norm(harmonics::quotient_reconstruct(ex, y) - field(y));
        norm += std::norm(field(y));
      }
      worst = std::max(worst, std::sqrt(l2 / std::max(norm, 1e-300)));
    }
    r.checks.push_back(make_check("round_trip " + label_text({0, two_s}), worst, sc.tolerances.round_trip));
  }
}

void exchange_suite(const Scenario& sc, const Context&, SuiteResult& r) {
  if (!sc.exchange) throw ConfigError("exchange: section required by the exchange suite");
  const ExchangeSpec& e = *sc.exchange;
  spinstat::SpinBlock block;
  block.two_s = e.two_s;
  block.particles = e.particles;
  block.nx = e.nx;
  block.mode = e.mode;
  try {
    block.undotted = Field::from_text(e.undotted, e.coordinates, sc.constants);
    if (!e.dotted.empty()) block.dotted = Field::from_text(e.dotted, e.coordinates, sc.constants);
  } catch (const ParseError& err) {
    throw ConfigError(std::string("exchange: ") + err.what());
  }
  spinstat::VerifyOptions o;
  o.samples = e.samples;
  o.seed = sc.seed;
  o.tolerance = sc.tolerances.exchange;
  const bool swap = e.particles == 2 && e.permutation == std::vector<int>{1, 0};
  const spinstat::ExchangeReport rep =
      swap ? spinstat::verify_exchange(block, o) : spinstat::n_particle_verify(block, e.permutation, o);
  r.verdicts = json::array({json{{"scenario", sc.name},
                                 {"s", e.two_s / 2.0},
                                 {"N", e.particles},
                                 {"permutation", e.permutation},
                                 {"phase_expected", rep.phase_expected},
                                 {"phase_observed", rep.phase_observed},
                                 {"max_residual", rep.max_residual},
                                 {"verdict", rep.passed ? "pass" : "fail"}}});
  Check c = make_check("exchange_symmetry", rep.max_residual, sc.tolerances.exchange);
  c.passed = rep.passed;
  c.detail = json{{"phi_residual", rep.phi_residual},
                  {"transpositions", rep.transpositions},
                  {"samples", rep.samples}};
  if (rep.counterexample) {
    json pts = json::array();
    for (const auto& p : *rep.counterexample) {
      pts.push_back(json{{"x", std::vector<double>(p.x.data(), p.x.data() + p.x.size())},
                         {"ytilde", std::vector<double>(p.ytilde.data(), p.ytilde.data() + p.ytilde.size())},
                         {"gamma", p.gamma}});
    }
    c.detail["counterexample"] = pts;
  }
  r.checks.push_back(c);
  r.checks.push_back(make_check("decomposition_independence", rep.decomposition_independent ? 0.0 : 1.0, 0.5));
}

}  // namespace

bool Report::passed() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed; });
}

Report run(const Scenario& sc, const std::vector<std::string>& filter) {
  for (const auto& f : filter) {
    if (std::find(sc.suites.begin(), sc.suites.end(), f) == sc.suites.end()) {
      throw ConfigError("suite '" + f + "' is not set up by scenario '" + sc.name + "'");
    }
  }
  const Context ctx(sc);
  Report report;
  report.scenario = sc.name;
  report.seed = sc.seed;
  // Fixed execution order, independent of how the config lists them.
  for (const auto& name : suite_names()) {
    if (std::find(sc.suites.begin(), sc.suites.end(), name) == sc.suites.end()) continue;
    if (!filter.empty() && std::find(filter.begin(), filter.end(), name) == filter.end()) continue;
    SuiteResult r;
    r.name = name;
    try {
      if (name == "gauge") gauge_suite(sc, ctx, r);
      if (name == "curvature") curvature_suite(sc, ctx, r);
      if (name == "madelung") madelung_suite(sc, ctx, r);
      if (name == "figure") figure_suite(sc, ctx, r);
      if (name == "harmonics") harmonics_suite(sc, ctx, r);
      if (name == "exchange") exchange_suite(sc, ctx, r);
      r.passed = !r.checks.empty() &&
                 std::all_of(r.checks.begin(), r.checks.end(), [](const Check& c) { return c.passed; });
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      r.error = e.what();
      r.passed = false;
    }
    report.suites.push_back(std::move(r));
  }
  return report;
}

json to_json(const Report& report) {
  json suites = json::array();
  for (const auto& s : report.suites) {
    json checks = json::array();
    for (const auto& c : s.checks) {
      json j{{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"passed", c.passed}};
      if (c.detail.is_object()) {
        for (auto it = c.detail.begin(); it != c.detail.end(); ++it) j[it.key()] = it.value();
      }
      checks.push_back(j);
    }
    json sj{{"name", s.name}, {"passed", s.passed}, {"checks", checks}};
    if (s.error) sj["error"] = *s.error;
    if (!s.verdicts.is_null()) sj["verdicts"] = s.verdicts;
    suites.push_back(sj);
  }
  return json{{"scenario", report.scenario},
              {"seed", report.seed},
              {"passed", report.passed()},
              {"suites", suites}};
}

}  // namespace cqg::scenario
