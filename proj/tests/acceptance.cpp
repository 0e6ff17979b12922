// Acceptance run: one line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "cqg/errors.hpp"
#include "cqg/figure.hpp"
#include "cqg/harmonics.hpp"
#include "cqg/madelung.hpp"
#include "cqg/scenario.hpp"
#include "cqg/spinstat.hpp"
#include "cqg/weyl.hpp"
#include "support.hpp"

using namespace cqg;
using harmonics::Mode;

namespace {

constexpr double kPi = std::numbers::pi;

struct Line {
  bool passed;
  std::string text;
};

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

double relative(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::vector<int> signature_for(int n, int draw) {
  if (draw % 2 == 0) return std::vector<int>(n, 1);
  return weyl::spacetime_signature(n);
}

Line gauge_covariance() {
  CounterRng rng(1001);
  double connection = 0.0, scaling = 0.0;
  int draws = 0;
  for (int n : {3, 4, 6}) {
    for (int d = 0; d < 50; ++d, ++draws) {
      const weyl::Geometry geo(testing::random_metric(rng, signature_for(n, d)),
                               testing::random_covector(rng, n, 0.4));
      const Field lambda = testing::random_positive(rng, n, 0.3);
      const weyl::Geometry moved = weyl::gauge_transform(geo, lambda);
      for (int k = 0; k < 20; ++k) {
        const Point q = testing::random_point(rng, n, 0.5);
        const Tensor<double> a = weyl::weyl_connection(geo, q), b = weyl::weyl_connection(moved, q);
        for (int i = 0; i < a.size(); ++i) connection = std::max(connection, std::abs(a.flat(i) - b.flat(i)));
        const double l = lambda.value(q);
        scaling = std::max(scaling, relative(weyl::weyl_scalar_curvature(geo, q),
                                             l * l * weyl::weyl_scalar_curvature(moved, q)));
      }
    }
  }
  const bool ok = connection <= 1e-9 && scaling <= 1e-8;
  return {ok, "gauge covariance: " + std::to_string(draws) + " draws x 20 points, n in {3,4,6}; connection " +
                  sci(connection) + " (<= 1e-9), R_W weight " + sci(scaling) + " (<= 1e-8 rel)"};
}

Line coefficient_cross_check() {
  CounterRng rng(1002);
  double worst = 0.0;
  std::string record;
  for (int n : {4, 6}) {
    const double oracle = (n - 1.0) / (n - 2.0);  // substituting phi = d rho / ((n-2) rho) by hand
    const double printed = weyl::printed_density_coefficient(n);
    double printed_gap = 0.0;
    for (int d = 0; d < 100; ++d) {
      const Field metric = testing::random_metric(rng, signature_for(n, d));
      const Field rho = testing::random_positive(rng, n, 0.4);
      const Point q = testing::random_point(rng, n, 0.5);
      const weyl::Geometry via_phi(metric, weyl::weyl_vector_from_density(rho));
      const weyl::Geometry plain(metric, Field::zero(n, n));
      const double direct = weyl::weyl_scalar_curvature(via_phi, q);
      worst = std::max(worst, relative(direct, weyl::weyl_curvature_from_density(rho, plain, q, oracle)));
      printed_gap = std::max(printed_gap,
                             relative(direct, weyl::weyl_curvature_from_density(rho, plain, q, printed)));
    }
    record += "; n=" + std::to_string(n) + " printed " + sci(printed) + " vs derived " + sci(oracle) +
              " (printed-form gap " + sci(printed_gap) + ")";
  }
  return {worst <= 1e-8, "density-form coefficient: 200 draws, two-path gap " + sci(worst) + " (<= 1e-8 rel)" + record};
}

Line madelung_equivalence() {
  CounterRng rng(1003);
  const int n = 4;
  const weyl::Geometry flat(weyl::diagonal_metric(weyl::spacetime_signature(n)), Field::zero(n, n));
  double gaps = 0.0;
  for (int d = 0; d < 100; ++d) {
    const madelung::State st{testing::random_positive(rng, n, 0.4), testing::random_scalar(rng, n, 0.6),
                             testing::random_covector(rng, n, 0.3)};
    const madelung::Couplings c{rng.uniform(0.5, 1.5), 1.0};
    const Point q = testing::random_point(rng, n);
    const madelung::Equivalence e = madelung::madelung_equivalence(st, flat, q, c);
    gaps = std::max({gaps, e.real_gap, e.imag_gap});
  }
  // rho = exp(2 alpha x1), S = hbar alpha x3: Psi = e^{alpha (x1 + i x3)} with box Psi = 0.
  const double alpha = 0.8, hbar = 1.0;
  const auto names = testing::coordinate_names(n);
  const madelung::State wave{Field::from_text({"exp(" + testing::num(2 * alpha) + "*q1)"}, names),
                             Field::from_text({testing::num(hbar * alpha) + "*q3"}, names), Field::zero(n, n)};
  const madelung::Wavefunction psi = madelung::ansatz_compose(wave, {hbar, 1.0});
  double exact = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Point q = testing::random_point(rng, n);
    const madelung::Equivalence e = madelung::madelung_equivalence(wave, flat, q, {hbar, 1.0});
    exact = std::max({exact, e.real_gap, e.imag_gap, std::abs(e.hj), std::abs(e.continuity),
                      std::abs(madelung::wave_residual(psi, wave.A, flat, q, {hbar, 1.0}))});
  }
  return {gaps <= 1e-6 && exact <= 1e-10, "Madelung equivalence: 100 random states, max gap " + sci(gaps) +
                                              " (<= 1e-6); plane wave gaps and residuals " + sci(exact) +
                                              " (<= 1e-10)"};
}

Line xi_consistency() {
  CounterRng rng(1004);
  const int n = 4;
  double worst = 0.0;
  for (int d = 0; d < 100; ++d) {
    const Field metric = d % 2 ? weyl::diagonal_metric(weyl::spacetime_signature(n))
                               : testing::random_metric(rng, weyl::spacetime_signature(n));
    const weyl::Geometry geo(metric, Field::zero(n, n));
    const Field rho = testing::random_positive(rng, n, 0.4);
    worst = std::max(worst, std::abs(madelung::quantum_potential_gap(rho, geo, testing::random_point(rng, n),
                                                                      {rng.uniform(0.5, 1.5), 1.0})));
  }
  return {worst <= 1e-8, "xi consistency: 100 random rho (flat and curved), n=4, max " + sci(worst) + " (<= 1e-8)"};
}

struct Internal {
  figure::Background bg;
  Point q0;
  Eigen::VectorXd p0;
  int gamma;
};

Internal internal_setup(Mode mode, double s, std::uint64_t seed) {
  CounterRng rng(seed);
  const int nx = 4;
  const int n = nx + harmonics::chart_dim(mode);
  const Field metric = harmonics::configuration_metric(weyl::diagonal_metric(weyl::spacetime_signature(nx)),
                                                       mode, -0.5);
  const auto names = testing::coordinate_names(n);
  const Field rho = Field::from_text({"exp(0.1*sin(q1 - q0) + 0.05*q2)"}, names);
  const Field a_mu = testing::random_covector(rng, nx, 0.3);
  std::vector<Field> f;
  for (int m = 0; m < harmonics::algebra_dim(mode); ++m) f.push_back(testing::random_scalar(rng, nx, 0.4));
  const Field A = harmonics::assemble_internal_field(a_mu, concat(f), mode, 0.7);
  const int gamma = nx + harmonics::kGammaIndex;
  const Field S = Field::from_text({"-1.5*q0 + 0.2*q1 - 0.1*q3 + " + testing::num(s) + "*" + names[gamma]}, names);
  Point q0(n);
  q0.head(nx) = testing::random_point(rng, nx, 0.5);
  if (mode == Mode::Rotation) {
    q0.tail(3) << 0.3, 1.0, 0.4;
  } else {
    q0.tail(6) << 0.3, 1.0, 0.4, 0.5, 1.1, 0.6;
  }
  const figure::Background bg = figure::from_density(metric, rho, A, 1.0);
  return {bg, q0, figure::complete_on_shell(bg, q0, gradient(S).values(q0), 0), gamma};
}

Line complete_figure() {
  const scenario::Report r =
      scenario::run(scenario::parse(*scenario::bundled_text("flat-planewave")), {"figure"});
  double action = 1.0;
  for (const auto& c : r.suites.at(0).checks) {
    if (c.name == "action_increment") action = c.value;
  }
  double drift = 0.0, field = 1.0;
  for (Mode mode : {Mode::Rotation, Mode::Lorentz}) {
    for (double s : {0.5, 1.0}) {
      const Internal in = internal_setup(mode, s, 1005);
      field = std::min(field, std::abs(in.bg.A.value(in.q0, in.gamma)));
      figure::IntegrationOptions o;
      o.steps = 1000;
      const figure::Trajectory t = figure::integrate_characteristics(in.bg, in.q0, in.p0, o);
      drift = std::max(drift, figure::intrinsic_helicity(t, in.gamma, 1.0, s).max_deviation);
    }
  }
  const bool ok = action <= 1e-8 && drift <= 1e-6 && field > 1e-3;
  return {ok, "complete figure: plane-wave action vs S(P2)-S(P1) " + sci(action) +
                  " (<= 1e-8); p_gamma drift " + sci(drift) +
                  " (<= 1e-6; RK4 1000 steps, s in {1/2,1}, rotation and Lorentz, |A_gamma| >= " + sci(field) + ")"};
}

std::vector<double> random_chart(CounterRng& rng, Mode mode) {
  std::vector<double> y = {rng.uniform(-kPi, kPi), rng.uniform(0.1, kPi - 0.1), rng.uniform(-6, 6)};
  if (mode == Mode::Lorentz) {
    y.push_back(rng.uniform(-kPi, kPi));
    y.push_back(rng.uniform(0.1, kPi - 0.1));
    y.push_back(rng.uniform(0.05, 2.0));
  }
  return y;
}

Line representations() {
  CounterRng rng(1006);
  const Mode mode = Mode::Lorentz;
  double hom = 0.0;
  for (harmonics::RepLabel label : {harmonics::RepLabel{1, 0}, {0, 1}, {2, 0}}) {
    for (int i = 0; i < 100; ++i) {
      const auto a = harmonics::from_euler(random_chart(rng, mode), mode);
      const auto b = harmonics::from_euler(random_chart(rng, mode), mode);
      hom = std::max(hom, max_abs(harmonics::wigner_D(label, a * b) - harmonics::wigner_D(label, a) *
                                                                         harmonics::wigner_D(label, b)));
    }
  }
  double translation = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto l = harmonics::from_euler(random_chart(rng, mode), mode);
    std::vector<double> yt = random_chart(rng, mode);
    yt.erase(yt.begin() + harmonics::kGammaIndex);
    translation = std::max(translation, harmonics::left_translation_residual(
                                            l, yt, harmonics::left_translation(l, yt, mode), mode));
  }
  double metric = 0.0;
  for (Mode m : {Mode::Rotation, Mode::Lorentz}) {
    for (int i = 0; i < 100; ++i) {
      std::vector<double> y = random_chart(rng, m);
      const Eigen::MatrixXd g0 = harmonics::killing_data(y, m).group_metric;
      y[harmonics::kGammaIndex] = rng.uniform(-2 * kPi, 2 * kPi);
      metric = std::max(metric, (harmonics::killing_data(y, m).group_metric - g0).cwiseAbs().maxCoeff());
    }
  }
  // A full fiber turn is Rz(2 pi) = -1 in SL(2, C): the representation of
  // -A must be (-1)^{2s} times that of A, bit for bit. The chart route
  // (gamma -> gamma + 2 pi through cos/sin) agrees to rounding.
  bool exact = true;
  double chart = 0.0;
  for (int two_s : {1, 2, 3}) {
    for (int i = 0; i < 100; ++i) {
      std::vector<double> y = random_chart(rng, mode);
      const auto g = harmonics::from_euler(y, mode);
      const Eigen::MatrixXcd d = harmonics::wigner_D({0, two_s}, g);
      const Eigen::MatrixXcd turned = harmonics::wigner_D({0, two_s}, harmonics::GroupElement(-g.sl2));
      const double sign = two_s % 2 ? -1.0 : 1.0;
      exact = exact && (turned.array() == (sign * d).array()).all();
      y[harmonics::kGammaIndex] += 2 * kPi;
      chart = std::max(chart, max_abs(harmonics::wigner_D({0, two_s}, harmonics::from_euler(y, mode)) - sign * d) /
                                  max_abs(d));
    }
  }
  const bool ok = hom <= 1e-10 && translation <= 1e-10 && metric <= 1e-9 && exact && chart <= 1e-12;
  return {ok, "representations: homomorphism " + sci(hom) + " (<= 1e-10, labels (1/2,0),(0,1/2),(1,0)); left translation " +
                  sci(translation) + " (<= 1e-10); group metric gamma-independence " + sci(metric) +
                  " (<= 1e-9); fiber turn sign " + (exact ? "exact" : "NOT exact") + " for s in {1/2,1,3/2}, chart route " +
                  sci(chart)};
}

Line harmonic_round_trip() {
  CounterRng rng(1007);
  double worst = 0.0;
  const int grid = 64;
  for (int two_s : {0, 1, 2}) {
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXcd c(two_s + 1);
      for (auto& v : c) v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      auto field = [&](std::span<const double> y) {
        return harmonics::undotted_basis(y, two_s, Mode::Rotation).cwiseProduct(c).sum();
      };
      harmonics::QuadratureOptions qo;
      qo.legendre_nodes = 32;
      const harmonics::QuotientExpansion ex = harmonics::quotient_expand(field, two_s, Mode::Rotation, qo);
      // L2 on the sphere by a midpoint rule in (cos beta, alpha), independent of the expansion nodes.
      double l2 = 0.0;
      for (int i = 0; i < grid; ++i) {
        const double beta = std::acos(-1 + (2 * i + 1.0) / grid);
        for (int j = 0; j < grid; ++j) {
          const double y[] = {-kPi + (2 * j + 1.0) * kPi / grid, beta};
          l2 += std::norm(harmonics::quotient_reconstruct(ex, y) - field(y));
        }
      }
      worst = std::max(worst, std::sqrt(l2 / (grid * grid)));
    }
  }
  return {worst <= 1e-8, "harmonic round trip (rotation mode, s <= 1, 32 Gauss-Legendre nodes): L2 error " + sci(worst) +
                             " (<= 1e-8)"};
}

Field random_coefficients(CounterRng& rng, int two_s, int particles, int nx) {
  int count = 1;
  for (int h = 0; h < particles; ++h) count *= two_s + 1;
  std::vector<std::string> texts;
  for (int c = 0; c < 2 * count; ++c) {
    texts.push_back(testing::num(rng.uniform(-1, 1)) + " + " + testing::trig_sum(rng, particles * nx, 1, 1.0));
  }
  return Field::from_text(texts, testing::coordinate_names(particles * nx));
}

Line spin_statistics() {
  CounterRng rng(1008);
  bool phases = true;
  for (int two_s = 0; two_s <= 4; ++two_s) {
    // Oracle: ratio of fiber characters e^{is(gamma1 + gamma2 + 2 pi)} / e^{is(gamma1 + gamma2)}.
    const std::complex<double> ratio = std::polar(1.0, kPi * two_s);
    phases = phases && std::abs(ratio - double(spinstat::exchange_phase(two_s))) <= 1e-12;
  }
  bool classes = true;
  int runs = 0;
  for (Mode mode : {Mode::Rotation, Mode::Lorentz}) {
    for (int two_s = 0; two_s <= 4; ++two_s) {
      for (int sign : {1, -1}) {
        spinstat::SpinBlock b;
        b.two_s = two_s;
        b.nx = 1;
        b.mode = mode;
        b.undotted = spinstat::symmetrize(random_coefficients(rng, two_s, 2, 1), two_s, 2, 1, sign);
        if (mode == Mode::Lorentz) {
          b.dotted = spinstat::symmetrize(random_coefficients(rng, two_s, 2, 1), two_s, 2, 1, sign);
        }
        spinstat::VerifyOptions o;
        o.samples = 1000;
        o.seed = 50 + runs++;
        const spinstat::ExchangeReport r = spinstat::verify_exchange(b, o);
        const bool right = sign == (two_s % 2 ? -1 : 1);
        classes = classes && r.passed == right && r.counterexample.has_value() == !right;
      }
    }
  }
  int perms = 0;
  bool independent = true;
  for (int n = 2; n <= 5; ++n) {
    for (int two_s : {1, 2}) {
      const int sign = two_s % 2 ? -1 : 1;
      spinstat::SpinBlock b;
      b.two_s = two_s;
      b.particles = n;
      b.nx = 1;
      b.undotted = spinstat::symmetrize(random_coefficients(rng, two_s, n, 1), two_s, n, 1, sign);
      const int count = n == 5 ? 10 : 14;
      for (int k = 0; k < count; ++k, ++perms) {
        std::vector<int> p(n);
        for (int i = 0; i < n; ++i) p[i] = i;
        for (int i = n - 1; i > 0; --i) std::swap(p[i], p[rng.below(i + 1)]);
        spinstat::VerifyOptions o;
        o.samples = 4;
        o.seed = 900 + perms;
        const spinstat::ExchangeReport r = spinstat::n_particle_verify(b, p, o);
        independent = independent && r.decomposition_independent && r.passed;
      }
    }
  }
  const bool ok = phases && classes && independent && perms >= 100;
  return {ok, std::string("spin-statistics: exchange_phase = (-1)^{2s} for s in {0,...,2} ") + (phases ? "yes" : "NO") +
                  "; verify_exchange class verdicts over 1000 samples (" + std::to_string(runs) + " blocks) " +
                  (classes ? "correct" : "WRONG") + "; " + std::to_string(perms) +
                  " random permutations N<=5 decomposition-independent " + (independent ? "yes" : "NO")};
}

Line determinism() {
  int identical = 0, total = 0;
  for (const auto& e : scenario::catalog()) {
    const scenario::Scenario sc = scenario::parse(*scenario::bundled_text(e.name));
    const scenario::Report a = scenario::run(sc), b = scenario::run(sc);
    bool same = scenario::to_json(a).dump() == scenario::to_json(b).dump();
    for (std::size_t i = 0; i < a.suites.size(); ++i) {
      for (std::size_t t = 0; t < a.suites[i].tables.size(); ++t) {
        same = same && a.suites[i].tables[t].csv == b.suites[i].tables[t].csv;
      }
    }
    identical += same;
    ++total;
  }
  return {identical == total && total >= 6, "determinism: " + std::to_string(identical) + "/" +
                                                std::to_string(total) + " bundled scenarios byte-identical on rerun"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Line()>>> criteria = {
      {"AC1", gauge_covariance},   {"AC2", coefficient_cross_check}, {"AC3", madelung_equivalence},
      {"AC4", xi_consistency},     {"AC5", complete_figure},         {"AC6", representations},
      {"AC7", harmonic_round_trip}, {"AC8", spin_statistics},        {"AC9", determinism},
  };
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Line line;
    try {
      line = fn();
    } catch (const std::exception& e) {
      line = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s %s [%.1fs]\n", id, line.passed ? "PASS" : "FAIL", line.text.c_str(), secs);
    std::fflush(stdout);
    failed += !line.passed;
  }
  return failed ? 1 : 0;
}
