#include <cmath>
#include <numbers>

#include "cqg/errors.hpp"
#include "cqg/madelung.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cqg;
using namespace cqg::madelung;
using testing::coordinate_names;
using weyl::Geometry;

namespace {

Geometry flat(int n) {
  return Geometry(weyl::diagonal_metric(weyl::spacetime_signature(n)), Field::zero(n, n));
}

Field text(const std::string& t, int n = 4) { return Field::from_text({t}, coordinate_names(n)); }

State plane_wave(const std::string& s) {
  return {Field::constant(4, {1.0}), text(s), Field::zero(4, 4)};
}

State random_state(CounterRng& rng, int n) {
  return {testing::random_positive(rng, n), testing::random_scalar(rng, n),
          testing::random_covector(rng, n, 0.3)};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("xi coefficient") {
  CHECK(xi_coefficient(4) == doctest::Approx(std::sqrt(1.0 / 6)).epsilon(1e-15));
  CHECK(xi_coefficient(3) == doctest::Approx(std::sqrt(1.0 / 8)).epsilon(1e-15));
  const double xi = xi_coefficient(10);
  CHECK(xi * xi * 4 * 9 / 8 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS(xi_coefficient(2));
}

TEST_CASE("Hamilton-Jacobi residual") {
  const Point q = Point::Constant(4, 0.3);
  CHECK(hj_residual(plane_wave("2*q0 + 2*q1"), flat(4), q) == 0.0);
  // p = (3, 1, 1, 1): eta^{mu nu} p p = 9 - 3 = 6
  CHECK(hj_residual(plane_wave("3*q0 + q1 + q2 + q3"), flat(4), q) == doctest::Approx(6.0));

  const State gauss{text("exp(-(q0^2 + q1^2 + q2^2 + q3^2))"), Field::zero(4, 1), Field::zero(4, 4)};
  const Couplings c{0.7, 1.0};
  CounterRng rng(41);
  for (int i = 0; i < 5; ++i) {
    const Point p = testing::random_point(rng, 4);
    const double rw =
        weyl::weyl_scalar_curvature(Geometry(flat(4).metric, weyl::weyl_vector_from_density(gauss.rho)), p);
    const double expected = c.hbar * c.hbar * rw / 6.0;
    CHECK(std::abs(hj_residual(gauss, flat(4), p, c) - expected) <= 1e-9);
  }
}

TEST_CASE("continuity residual") {
  CounterRng rng(42);
  const Point q = testing::random_point(rng, 4);
  CHECK(continuity_residual(plane_wave("2*q0 + q1"), flat(4), q) == 0.0);

  const Field s = testing::random_scalar(rng, 4);
  const State pure_gauge{testing::random_positive(rng, 4), s, gradient(s)};
  CHECK(std::abs(continuity_residual(pure_gauge, flat(4), q)) <= 1e-14);

  for (int draw = 0; draw < 5; ++draw) {
    const State st = random_state(rng, 4);
    const Point p = testing::random_point(rng, 4);
    const std::vector<int> eta = weyl::spacetime_signature(4);
    auto flux = [&](const Point& x, int k) {
      const double pk = gradient(st.S).value(x, k) - st.A.value(x, k);
      return st.rho.value(x) * eta[k] * pk;
    };
    const double h = 1e-5;
    double fd = 0.0;
    for (int k = 0; k < 4; ++k) {
      Point up = p, down = p;
      up[k] += h;
      down[k] -= h;
      fd += (flux(up, k) - flux(down, k)) / (2 * h);
    }
    CHECK(std::abs(continuity_residual(st, flat(4), p) - fd) <= 1e-6);
  }
}

TEST_CASE("current density") {
  CounterRng rng(43);
  const Point q = testing::random_point(rng, 4);
  const Eigen::VectorXd j = current_density(plane_wave("2*q0 + 0.5*q1 - q3"), flat(4), q);
  CHECK(j[0] == 2.0);
  CHECK(j[1] == -0.5);
  CHECK(j[2] == 0.0);
  CHECK(j[3] == 1.0);

  for (int draw = 0; draw < 5; ++draw) {
    const Geometry geo(testing::random_metric(rng, weyl::spacetime_signature(4)),
                       Field::zero(4, 4));
    const State st = random_state(rng, 4);
    const Field lambda = testing::random_positive(rng, 4);
    const Point p = testing::random_point(rng, 4);
    const Eigen::VectorXd before = current_density(st, geo, p);
    const Eigen::VectorXd after =
        current_density(gauge_transform(st, lambda), weyl::gauge_transform(geo, lambda), p);
    CHECK((before - after).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, before.norm()));
  }

  // On a flat chart the covariant divergence is the plain divergence of J.
  for (int draw = 0; draw < 5; ++draw) {
    const State st = random_state(rng, 4);
    const Point p = testing::random_point(rng, 4);
    const double h = 1e-4;
    double div = 0.0;
    for (int k = 0; k < 4; ++k) {
      Point up = p, down = p;
      up[k] += h;
      down[k] -= h;
      div += (current_density(st, flat(4), up)[k] - current_density(st, flat(4), down)[k]) / (2 * h);
    }
    CHECK(std::abs(continuity_residual(st, flat(4), p) - div) <= 1e-8);
  }
}

TEST_CASE("ansatz compose and decompose") {
  const Point q = Point::Constant(4, 0.2);
  const State unit{Field::constant(4, {1.0}), Field::zero(4, 1), Field::zero(4, 4)};
  CHECK(ansatz_compose(unit).value(q) == Complex(1.0, 0.0));

  CounterRng rng(44);
  const Couplings c{1.3, 1.0};
  const State st{testing::random_positive(rng, 4), text("0.5 + 0.3*sin(q1)"), Field::zero(4, 4)};
  const State back = ansatz_decompose(ansatz_compose(st, c), st.A, {}, c);
  for (int i = 0; i < 10; ++i) {
    const Point p = testing::random_point(rng, 4);
    CHECK(rel(back.rho.value(p), st.rho.value(p)) <= 1e-13);
    CHECK(std::abs(back.S.value(p) - st.S.value(p)) <= 1e-13);
    CHECK(std::abs(gradient(back.S).value(p, 1) - gradient(st.S).value(p, 1)) <= 1e-12);
  }

  const Field zero_psi = Field::constant(4, {0.0, 0.0});
  try {
    ansatz_decompose({zero_psi}, st.A, {}).S.value(q);
    FAIL("expected a zero of the wavefunction");
  } catch (const DomainError& err) {
    CHECK(std::string(err.what()).find("0.20000000000000001") != std::string::npos);
  }
}

TEST_CASE("phase along a gamma loop shifts by whole turns") {
  // Chart (x, gamma); S = hbar s gamma + S0(x).
  const Couplings c{0.9, 1.0};
  for (double s : {0.5, 1.0, 1.5}) {
    const Field S = Field::from_text({"hbar*s*g + 0.4*cos(x)"}, {"x", "g"},
                                     {{"hbar", c.hbar}, {"s", s}});
    const State st{Field::from_text({"1 + 0.5*sin(x)^2"}, {"x", "g"}), S, Field::zero(2, 2)};
    const Wavefunction psi = ansatz_compose(st, c);
    const State principal = ansatz_decompose(psi, st.A, {}, c);
    std::vector<Point> loop;
    for (int k = 0; k <= 400; ++k) {
      Point p(2);
      p << 0.7, 4 * std::numbers::pi * k / 400.0;
      loop.push_back(p);
    }
    for (const Point& p : loop) {
      const double turns = (st.S.value(p) - principal.S.value(p)) / (2 * std::numbers::pi * c.hbar);
      CHECK(std::abs(turns - std::round(turns)) <= 1e-12);
    }
    const std::vector<double> unwrapped = continue_phase(psi, loop);
    const double offset = unwrapped.front() - st.S.value(loop.front()) / c.hbar;
    CHECK(std::abs(unwrapped.back() - offset - st.S.value(loop.back()) / c.hbar) <= 1e-12);

    BranchPolicy follow;
    follow.kind = BranchPolicy::Kind::Continuation;
    follow.anchor = loop.front();
    follow.anchor_phase = st.S.value(loop.front()) / c.hbar;
    const State continued = ansatz_decompose(psi, st.A, follow, c);
    Point far(2);
    far << 0.7, 3.7 * std::numbers::pi;
    CHECK(std::abs(continued.S.value(far) - st.S.value(far)) <= 1e-12);
  }
}

TEST_CASE("wave residual") {
  const Point q = Point::Constant(4, 0.1);
  const Wavefunction null_wave = ansatz_compose(plane_wave("2*q0 + 2*q1"));
  CHECK(std::abs(wave_residual(null_wave, Field::zero(4, 4), flat(4), q)) <= 1e-10);
  const Wavefunction flat_const{Field::constant(4, {0.3, -1.2})};
  CHECK(std::abs(wave_residual(flat_const, Field::zero(4, 4), flat(4), q)) == 0.0);

  // Finite-difference Laplace-Beltrami oracle on a curved chart.
  CounterRng rng(45);
  const int n = 3;
  const Geometry geo(testing::random_metric(rng, {1, 1, 1}), Field::zero(n, n));
  const Field re = testing::random_scalar(rng, n);
  const Field im = testing::random_scalar(rng, n);
  const Wavefunction psi{concat({re, im})};
  const Couplings c{0.8, 1.0};
  for (int draw = 0; draw < 5; ++draw) {
    const Point p = testing::random_point(rng, n);
    auto flux = [&](const Point& x, int k, const Field& f) {
      const Eigen::MatrixXd g = geo.metric.values(x).reshaped(n, n);
      const Eigen::VectorXd df = gradient(f).values(x);
      return std::sqrt(g.determinant()) * (g.inverse() * df)[k];
    };
    const double h = 1e-5;
    Complex lb = 0.0;
    for (int k = 0; k < n; ++k) {
      Point up = p, down = p;
      up[k] += h;
      down[k] -= h;
      lb += Complex(flux(up, k, re) - flux(down, k, re), flux(up, k, im) - flux(down, k, im)) /
            (2 * h);
    }
    const double sqrt_g = std::sqrt(geo.metric.values(p).reshaped(n, n).determinant());
    const double rg = weyl::scalar_curvature_jet(geo, p, 0).value();
    const Complex value = psi.value(p);
    const Complex expected = c.hbar * c.hbar * (lb / sqrt_g - rg * value / 8.0);
    CHECK(std::abs(wave_residual(psi, Field::zero(n, n), geo, p, c) - expected) <= 1e-6);
  }
}

TEST_CASE("Madelung equivalence") {
  const Point q = Point::Constant(4, -0.4);
  const Equivalence pw = madelung_equivalence(plane_wave("2*q0 + 2*q1"), flat(4), q);
  CHECK(pw.real_gap <= 1e-10);
  CHECK(pw.imag_gap <= 1e-10);
  CHECK(std::abs(pw.hj) <= 1e-10);
  CHECK(std::abs(pw.continuity) <= 1e-10);

  const State gauss{text("exp(-(q0^2 + q1^2 + q2^2 + q3^2))"), Field::zero(4, 1), Field::zero(4, 4)};
  CounterRng rng(46);
  for (int i = 0; i < 5; ++i) {
    const Equivalence e = madelung_equivalence(gauss, flat(4), testing::random_point(rng, 4));
    CHECK(e.real_gap <= 1e-8);
    CHECK(e.imag_gap <= 1e-8);
  }

  for (double hbar : {1.0, 0.35, 2.0}) {
    const Couplings c{hbar, 1.0};
    for (int i = 0; i < 6; ++i) {
      const State st = random_state(rng, 4);
      const Point p = testing::random_point(rng, 4);
      const Equivalence e = madelung_equivalence(st, flat(4), p, c);
      CHECK(e.real_gap <= 1e-6);
      CHECK(e.imag_gap <= 1e-6);
      const Geometry curved(testing::random_metric(rng, weyl::spacetime_signature(4)),
                            Field::zero(4, 4));
      const Equivalence ec = madelung_equivalence(st, curved, p, c);
      CHECK(ec.real_gap <= 1e-6 * std::max(1.0, std::abs(ec.hj)));
      CHECK(ec.imag_gap <= 1e-6 * std::max(1.0, std::abs(ec.continuity)));
    }
  }
}

TEST_CASE("residual gauge weights") {
  CounterRng rng(47);
  const int n = 4;
  for (int draw = 0; draw < 4; ++draw) {
    const Geometry geo(testing::random_metric(rng, weyl::spacetime_signature(n)),
                       Field::zero(n, n));
    const State st = random_state(rng, n);
    const Field lambda = testing::random_positive(rng, n);
    const Geometry g2 = weyl::gauge_transform(geo, lambda);
    const State s2 = gauge_transform(st, lambda);
    const Point p = testing::random_point(rng, n);
    const double l = lambda.value(p);
    CHECK(rel(hj_residual(s2, g2, p), std::pow(l, -2) * hj_residual(st, geo, p)) <= 1e-8);
    CHECK(rel(continuity_residual(s2, g2, p), std::pow(l, -n) * continuity_residual(st, geo, p)) <=
          1e-8);
    const Complex w1 = wave_residual(ansatz_compose(st), st.A, geo, p);
    const Complex w2 = wave_residual(ansatz_compose(s2), s2.A, g2, p);
    CHECK(std::abs(w2 - std::pow(l, -(n + 2) / 2.0) * w1) <= 1e-8 * std::max(1.0, std::abs(w1)));
  }

  // Zero sets survive: a null plane wave stays a solution after any gauge.
  const State pw = plane_wave("2*q0 + 2*q1");
  const Field lambda = testing::random_positive(rng, n);
  const Geometry g2 = weyl::gauge_transform(flat(n), lambda);
  const State s2 = gauge_transform(pw, lambda);
  for (int i = 0; i < 5; ++i) {
    const Point p = testing::random_point(rng, n);
    CHECK(std::abs(hj_residual(s2, g2, p)) <= 1e-8);
    CHECK(std::abs(continuity_residual(s2, g2, p)) <= 1e-8);
    CHECK(std::abs(wave_residual(ansatz_compose(s2), s2.A, g2, p)) <= 1e-8);
  }
}

TEST_CASE("quantum potential collapse") {
  CounterRng rng(48);
  for (int draw = 0; draw < 10; ++draw) {
    const Field rho = testing::random_positive(rng, 4);
    const Point p = testing::random_point(rng, 4);
    CHECK(std::abs(quantum_potential_gap(rho, flat(4), p)) <= 1e-8);
    const Geometry curved(testing::random_metric(rng, weyl::spacetime_signature(4)),
                          Field::zero(4, 4));
    CHECK(std::abs(quantum_potential_gap(rho, curved, p, {0.6, 1.0})) <= 1e-8);
  }
}
