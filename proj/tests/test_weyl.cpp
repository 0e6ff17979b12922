#include <cmath>
#include <vector>

#include "cqg/errors.hpp"
#include "cqg/weyl.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cqg;
using namespace cqg::weyl;
using testing::coordinate_names;

namespace {

Geometry random_geometry(CounterRng& rng, int n) {
  return Geometry(testing::random_metric(rng, spacetime_signature(n)),
                  testing::random_covector(rng, n));
}

Geometry flat(int n, const std::vector<double>& phi = {}) {
  std::vector<double> p = phi;
  p.resize(n, 0.0);
  return Geometry(diagonal_metric(spacetime_signature(n)), Field::constant(n, p));
}

Geometry sphere() {
  return Geometry(Field::from_text({"1", "0", "0", "sin(th)^2"}, {"th", "ph"}),
                  Field::zero(2, 2));
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("Levi-Civita connection of flat space vanishes") {
  const Geometry e(diagonal_metric({1, 1, 1}), Field::zero(3, 3));
  const Point q = Point::Constant(3, 0.4);
  CHECK(max_abs(christoffel(e, q)) == 0.0);
}

TEST_CASE("2-sphere Christoffel symbols and curvature") {
  const Geometry s = sphere();
  Point q(2);
  q << M_PI / 4, 0.3;
  const Tensor<double> gamma = christoffel(s, q);
  CHECK(gamma(0, 1, 1) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(gamma(1, 0, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gamma(1, 1, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gamma(0, 0, 0) == 0.0);
  const CurvatureBundle b = curvature(s, q, false);
  CHECK(b.scalar == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(b.ricci(0, 0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(scalar_curvature_jet(s, q, 0).value() == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("Christoffel symbols are symmetric and metric compatible") {
  CounterRng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const Geometry geo = random_geometry(rng, 4);
    const Point q = testing::random_point(rng, 4);
    const Tensor<double> gamma = christoffel(geo, q);
    const Tensor<Jet> g = metric_jets(geo, q, 1);
    double residual = 0.0;
    double asym = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) {
          double v = g(j, k).gradient(i);
          for (int m = 0; m < 4; ++m) {
            v -= gamma(m, i, j) * g(m, k).value() + gamma(m, i, k) * g(j, m).value();
          }
          residual = std::max(residual, std::abs(v));
          asym = std::max(asym, std::abs(gamma(i, j, k) - gamma(i, k, j)));
        }
    CHECK(residual <= 1e-9);
    CHECK(asym == 0.0);
  }
}

TEST_CASE("Christoffel symbols agree with a finite-difference oracle") {
  CounterRng rng(22);
  const int n = 3;
  const Geometry geo = random_geometry(rng, n);
  const Point q = testing::random_point(rng, n);
  const double h = 1e-5;
  std::vector<Eigen::MatrixXd> dg(n);
  for (int k = 0; k < n; ++k) {
    Point up = q, down = q;
    up[k] += h;
    down[k] -= h;
    dg[k] = (geo.metric.values(up) - geo.metric.values(down)).reshaped(n, n) / (2 * h);
  }
  const Eigen::MatrixXd ginv = geo.metric.values(q).reshaped(n, n).inverse();
  const Tensor<double> gamma = christoffel(geo, q);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double fd = 0.0;
        for (int l = 0; l < n; ++l) {
          fd += 0.5 * ginv(i, l) * (dg[j](l, k) + dg[k](l, j) - dg[l](j, k));
        }
        CHECK(std::abs(fd - gamma(i, j, k)) <= 1e-6);
      }
}

TEST_CASE("Weyl connection reduces and matches the flat closed form") {
  CounterRng rng(23);
  const Geometry geo = random_geometry(rng, 4);
  const Point q = testing::random_point(rng, 4);
  const Geometry no_phi(geo.metric, Field::zero(4, 4));
  CHECK(max_abs_difference(weyl_connection(no_phi, q), christoffel(geo, q)) == 0.0);

  const std::vector<double> c = {0.3, -0.7, 1.1, 0.2};
  const Geometry f = flat(4, c);
  const std::vector<int> eta = spacetime_signature(4);
  const Tensor<double> gamma = weyl_connection(f, q);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        double expected = (i == j ? c[k] : 0.0) + (i == k ? c[j] : 0.0);
        if (j == k) expected -= eta[j] * eta[i] * c[i];
        CHECK(gamma(i, j, k) == expected);
      }
}

TEST_CASE("gauge transformations act on metric and Weyl vector") {
  CounterRng rng(24);
  const int n = 4;
  const Geometry geo = random_geometry(rng, n);
  const Point q = testing::random_point(rng, n);

  const Geometry same = gauge_transform(geo, Field::constant(n, {1.0}));
  CHECK((same.metric.values(q) - geo.metric.values(q)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((same.phi.values(q) - geo.phi.values(q)).cwiseAbs().maxCoeff() == 0.0);

  const Field u = testing::random_scalar(rng, n);
  const Field lambda = u.map(1, [](const std::vector<Jet>& v) {
    return std::vector<Jet>{exp(v[0])};
  });
  const Eigen::VectorXd shifted = gauge_transform(geo, lambda).phi.values(q);
  const Eigen::VectorXd du = gradient(u).values(q);
  CHECK((shifted - (geo.phi.values(q) - du)).cwiseAbs().maxCoeff() <= 1e-14);

  const Field l1 = testing::random_positive(rng, n);
  const Field l2 = testing::random_positive(rng, n);
  const Field product = concat({l1, l2}).map(1, [](const std::vector<Jet>& v) {
    return std::vector<Jet>{v[0] * v[1]};
  });
  const Geometry two_steps = gauge_transform(gauge_transform(geo, l2), l1);
  const Geometry one_step = gauge_transform(geo, product);
  for (int k = 0; k < 5; ++k) {
    const Point p = testing::random_point(rng, n);
    CHECK((two_steps.metric.values(p) - one_step.metric.values(p)).cwiseAbs().maxCoeff() <=
          1e-10);
    CHECK((two_steps.phi.values(p) - one_step.phi.values(p)).cwiseAbs().maxCoeff() <= 1e-10);
  }

  const Field negative = Field::constant(n, {-1.0});
  CHECK_THROWS_AS(gauge_transform(geo, negative).metric.values(q), DomainError);
}

TEST_CASE("Weyl connection is gauge invariant") {
  CounterRng rng(25);
  for (int n : {3, 4, 6}) {
    for (int draw = 0; draw < 3; ++draw) {
      const Geometry geo = random_geometry(rng, n);
      const Geometry moved = gauge_transform(geo, testing::random_positive(rng, n));
      for (int k = 0; k < 4; ++k) {
        const Point q = testing::random_point(rng, n);
        CHECK(max_abs_difference(weyl_connection(geo, q), weyl_connection(moved, q)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("curvature bundle symmetries and traces") {
  CounterRng rng(26);
  const int n = 4;
  const Geometry geo = random_geometry(rng, n);
  const Point q = testing::random_point(rng, n);
  const CurvatureBundle b = curvature(geo, q, true);
  double anti = 0.0, segre_anti = 0.0, trace_gap = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      segre_anti = std::max(segre_anti, std::abs(b.segre(i, j) + b.segre(j, i)));
      double tr = 0.0;
      for (int k = 0; k < n; ++k) {
        tr += b.riemann(k, k, i, j);
        for (int l = 0; l < n; ++l) {
          anti = std::max(anti, std::abs(b.riemann(i, j, k, l) + b.riemann(i, j, l, k)));
        }
      }
      // The full trace of the Weyl-connection curvature is n times the
      // segre tensor d_i phi_j - d_j phi_i.
      trace_gap = std::max(trace_gap, std::abs(tr - n * b.segre(i, j)));
    }
  CHECK(anti <= 1e-12);
  CHECK(segre_anti == 0.0);
  CHECK(trace_gap <= 1e-9);
  CHECK(max_abs(b.segre) > 1e-3);

  const CurvatureBundle flat_b = curvature(flat(n), q, true);
  CHECK(max_abs(flat_b.riemann) == 0.0);
  CHECK(flat_b.scalar == 0.0);
}

TEST_CASE("Weyl scalar curvature formula matches the connection contraction") {
  CounterRng rng(27);
  for (int n : {3, 4, 5}) {
    const Geometry geo = random_geometry(rng, n);
    const Point q = testing::random_point(rng, n);
    const double contraction = curvature(geo, q, true).scalar;
    CHECK(rel(weyl_scalar_curvature(geo, q), contraction) <= 1e-10);
    CHECK(rel(scalar_curvature_jet(geo, q, 0, true).value(), contraction) <= 1e-10);
  }
}

TEST_CASE("Weyl scalar curvature special cases and gauge weight") {
  CounterRng rng(28);
  const int n = 4;
  const Geometry geo = random_geometry(rng, n);
  const Point q = testing::random_point(rng, n);
  const Geometry no_phi(geo.metric, Field::zero(n, n));
  CHECK(weyl_scalar_curvature(no_phi, q) == doctest::Approx(curvature(geo, q, false).scalar));

  for (int m : {3, 4, 6}) {
    std::vector<double> c(m);
    for (auto& v : c) v = rng.uniform(-1, 1);
    const std::vector<int> eta = spacetime_signature(m);
    double norm = 0.0;
    for (int i = 0; i < m; ++i) norm += eta[i] * c[i] * c[i];
    const Point p = testing::random_point(rng, m);
    CHECK(rel(weyl_scalar_curvature(flat(m, c), p), -(m - 1.0) * (m - 2.0) * norm) <= 1e-14);
  }

  for (int draw = 0; draw < 5; ++draw) {
    const Geometry g = random_geometry(rng, n);
    const Field lambda = testing::random_positive(rng, n);
    const Geometry moved = gauge_transform(g, lambda);
    const Point p = testing::random_point(rng, n);
    const double l = lambda.value(p);
    CHECK(rel(l * l * weyl_scalar_curvature(moved, p), weyl_scalar_curvature(g, p)) <= 1e-8);
  }
}

TEST_CASE("Weyl vector from a density") {
  CounterRng rng(29);
  const int n = 4;
  const Point q = testing::random_point(rng, n);
  CHECK(weyl_vector_from_density(Field::constant(n, {2.5})).values(q).cwiseAbs().maxCoeff() ==
        0.0);

  const Field u = testing::random_scalar(rng, n);
  const Field rho = u.map(1, [](const std::vector<Jet>& v) {
    return std::vector<Jet>{exp(2.0 * v[0])};
  });
  const Eigen::VectorXd phi = weyl_vector_from_density(rho).values(q);
  CHECK((phi - gradient(u).values(q)).cwiseAbs().maxCoeff() <= 1e-13);

  for (int draw = 0; draw < 5; ++draw) {
    const Field r = testing::random_positive(rng, n);
    const Geometry geo(testing::random_metric(rng, spacetime_signature(n)),
                       weyl_vector_from_density(r));
    CHECK(max_abs(curvature(geo, testing::random_point(rng, n), true).segre) <= 1e-9);
  }

  CHECK_THROWS_AS(weyl_vector_from_density(Field::constant(2, {1.0})), GeometryError);
  CHECK_THROWS_AS(weyl_vector_from_density(Field::constant(n, {-1.0})).values(q), DomainError);
}

TEST_CASE("Weyl curvature from a density agrees with the substitution route") {
  CounterRng rng(30);
  const int n = 4;
  const Geometry metric_only(testing::random_metric(rng, spacetime_signature(n)),
                             Field::zero(n, n));
  const Point q = testing::random_point(rng, n);
  CHECK(weyl_curvature_from_density(Field::constant(n, {3.0}), metric_only, q) ==
        doctest::Approx(scalar_curvature_jet(metric_only, q, 0).value()));

  std::vector<double> a = {0.4, -0.3, 0.8, 0.1};
  const Field plane = Field::from_text(
      {"exp(2*(0.4*q0 - 0.3*q1 + 0.8*q2 + 0.1*q3))"}, coordinate_names(4));
  const std::vector<int> eta = spacetime_signature(4);
  double norm = 0.0;
  for (int i = 0; i < 4; ++i) norm += eta[i] * a[i] * a[i];
  CHECK(rel(weyl_curvature_from_density(plane, flat(4), q), -6.0 * norm) <= 1e-13);

  for (int m : {4, 6}) {
    for (int draw = 0; draw < 5; ++draw) {
      const Geometry g(testing::random_metric(rng, spacetime_signature(m)), Field::zero(m, m));
      const Field rho = testing::random_positive(rng, m);
      const Point p = testing::random_point(rng, m);
      const double direct = weyl_curvature_from_density(rho, g, p);
      const double substituted =
          weyl_scalar_curvature(Geometry(g.metric, weyl_vector_from_density(rho)), p);
      CHECK(rel(direct, substituted) <= 1e-8);
      CHECK(fitted_density_coefficient(rho, g, p) ==
            doctest::Approx(density_coefficient(m)).epsilon(1e-8));
      const double printed = weyl_curvature_from_density(rho, g, p, printed_density_coefficient(m));
      CHECK(rel(printed, substituted) > 1e-4);
    }
  }
}

TEST_CASE("co-covariant derivative") {
  CounterRng rng(31);
  const int n = 4;
  for (int draw = 0; draw < 3; ++draw) {
    const Geometry geo = random_geometry(rng, n);
    const Point q = testing::random_point(rng, n);
    const WeightedTensor dg = co_covariant_derivative(metric_field(geo), geo, q);
    CHECK(dg.weight == 2);
    CHECK(dg.components.rank() == 3);
    CHECK(max_abs(dg.components) <= 1e-9);
  }

  const Geometry geo = random_geometry(rng, n);
  const Point q = testing::random_point(rng, n);
  const Field t = testing::random_scalar(rng, n);
  const WeightedTensor plain = co_covariant_derivative({t, {}, 0}, geo, q);
  const Eigen::VectorXd dt = gradient(t).values(q);
  for (int i = 0; i < n; ++i) CHECK(plain.components(i) == doctest::Approx(dt[i]));

  for (int w : {-2, 1, 3}) {
    const WeightedField tw{t, {}, w};
    const Field lambda = testing::random_positive(rng, n);
    const WeightedTensor before = co_covariant_derivative(tw, geo, q);
    const WeightedTensor after =
        co_covariant_derivative(gauge_transform(tw, lambda), gauge_transform(geo, lambda), q);
    const double scale = std::pow(lambda.value(q), w);
    for (int i = 0; i < n; ++i) {
      CHECK(rel(after.components(i), scale * before.components(i)) <= 1e-8);
    }
  }

  // Mixed-variance tensor: D_i (g_jk v^k) = g_jk D_i v^k, since D_i g = 0.
  const Field v = testing::random_covector(rng, n);
  const WeightedField up{v, {Variance::Up}, 1};
  Field g = geo.metric;
  const Field lowered(n, n, [g, v, n](const Point& p, int order) {
    const auto gj = g.jets(p, order);
    const auto vj = v.jets(p, order);
    std::vector<Jet> out;
    for (int j = 0; j < n; ++j) {
      Jet s = gj[j * n] * vj[0];
      for (int k = 1; k < n; ++k) s += gj[j * n + k] * vj[k];
      out.push_back(s);
    }
    return out;
  });
  const WeightedTensor dv = co_covariant_derivative(up, geo, q);
  const WeightedTensor dlow = co_covariant_derivative({lowered, {Variance::Down}, 3}, geo, q);
  const Eigen::VectorXd gq = geo.metric.values(q);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double expected = 0.0;
      for (int k = 0; k < n; ++k) expected += gq[j * n + k] * dv.components(i, k);
      CHECK(std::abs(dlow.components(i, j) - expected) <= 1e-9);
    }
}

TEST_CASE("parallel transport changes the squared length by -2 l phi.dq") {
  CounterRng rng(32);
  const int n = 4;
  for (int draw = 0; draw < 4; ++draw) {
    const Geometry geo = random_geometry(rng, n);
    const Point q = testing::random_point(rng, n, 0.5);
    const Eigen::VectorXd a = testing::random_point(rng, n);
    Eigen::VectorXd u = testing::random_point(rng, n);
    const double l0 = squared_length(geo, q, a);
    auto slope = [&](double h) {
      const Eigen::VectorXd moved = parallel_transport(geo, q, a, h * u, 16);
      return (squared_length(geo, q + h * u, moved) - l0) / h;
    };
    const double h = 1e-2;
    const double extrapolated = 2 * slope(h / 2) - slope(h);
    const double expected = -2 * l0 * geo.phi.values(q).dot(u);
    CHECK(std::abs(extrapolated - expected) <= 1e-5 * std::max(1.0, std::abs(expected)));
    // The transported length obeys l(1) = l(0) exp(-2 int phi.dq) exactly;
    // for a gradient phi the integral is path independent.
  }
}

TEST_CASE("degenerate metrics are rejected") {
  const Geometry bad(Field::constant(2, {1, 1, 1, 1}), Field::zero(2, 2));
  const Point q = Point::Zero(2);
  CHECK_THROWS_AS(christoffel(bad, q), GeometryError);
  const Geometry skew(Field::constant(2, {1, 0.5, 0, 1}), Field::zero(2, 2));
  CHECK_THROWS_AS(christoffel(skew, q), GeometryError);
  CHECK_THROWS_AS(Geometry(Field::zero(3, 4), Field::zero(3, 3)), GeometryError);
}
