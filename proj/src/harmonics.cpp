#include "cqg/harmonics.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "cqg/errors.hpp"
#include "cqg/rng.hpp"
#include "cqg/weyl.hpp"

namespace cqg::harmonics {

namespace {

constexpr double kPi = std::numbers::pi;

// Complex 2x2 algebra over a real scalar type (double or Jet), used to
// differentiate the chart exactly.
template <class T>
struct Cx {
  T re;
  T im;
};

template <class T>
Cx<T> operator+(const Cx<T>& a, const Cx<T>& b) {
  return {a.re + b.re, a.im + b.im};
}
template <class T>
Cx<T> operator-(const Cx<T>& a, const Cx<T>& b) {
  return {a.re - b.re, a.im - b.im};
}
template <class T>
Cx<T> operator*(const Cx<T>& a, const Cx<T>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

template <class T>
using M2 = std::array<Cx<T>, 4>;

template <class T>
M2<T> operator*(const M2<T>& a, const M2<T>& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

template <class T>
M2<T> rz_t(const T& t) {
  using std::cos;
  using std::sin;
  const T c = cos(t * 0.5), s = sin(t * 0.5);
  const T z = t * 0.0;
  return {Cx<T>{c, -1.0 * s}, Cx<T>{z, z}, Cx<T>{z, z}, Cx<T>{c, s}};
}

template <class T>
M2<T> ry_t(const T& b) {
  using std::cos;
  using std::sin;
  const T c = cos(b * 0.5), s = sin(b * 0.5);
  const T z = b * 0.0;
  return {Cx<T>{c, z}, Cx<T>{-1.0 * s, z}, Cx<T>{s, z}, Cx<T>{c, z}};
}

template <class T>
M2<T> boost_t(const T& chi, const T& theta, const T& phi) {
  using std::cos;
  using std::cosh;
  using std::sin;
  using std::sinh;
  const T ch = cosh(chi * 0.5), sh = sinh(chi * 0.5);
  const T n1 = sin(theta) * cos(phi), n2 = sin(theta) * sin(phi), n3 = cos(theta);
  const T z = chi * 0.0;
  return {Cx<T>{ch + sh * n3, z}, Cx<T>{sh * n1, -1.0 * (sh * n2)},
          Cx<T>{sh * n1, sh * n2}, Cx<T>{ch - sh * n3, z}};
}

// Lambda(y) in chart order (alpha, beta, gamma[, phi, theta, chi]).
template <class T>
M2<T> chart_t(std::span<const T> y, Mode mode) {
  M2<T> m = rz_t(y[0]) * ry_t(y[1]);
  if (mode == Mode::Lorentz) m = m * boost_t(y[5], y[4], y[3]);
  return m * rz_t(y[2]);
}

Mat2 to_eigen(const M2<double>& m) {
  Mat2 out;
  out << Complex(m[0].re, m[0].im), Complex(m[1].re, m[1].im), Complex(m[2].re, m[2].im),
      Complex(m[3].re, m[3].im);
  return out;
}

std::array<Mat2, 4> pauli() {
  const Complex I(0, 1);
  Mat2 s0 = Mat2::Identity(), s1, s2, s3;
  s1 << 0, 1, 1, 0;
  s2 << 0, -I, I, 0;
  s3 << 1, 0, 0, -1;
  return {s0, s1, s2, s3};
}

double wrap_pi(double a) {
  a = std::remainder(a, 2 * kPi);
  if (a <= -kPi) a += 2 * kPi;
  return a;
}

double wrap_two_pi(double a) {
  a = std::remainder(a, 4 * kPi);
  if (a <= -2 * kPi) a += 4 * kPi;
  return a;
}

// Chart coordinates y from ytilde and gamma.
std::vector<double> chart_point(std::span<const double> ytilde, double gamma, Mode mode) {
  std::vector<double> y(chart_dim(mode));
  y[0] = ytilde[0];
  y[1] = ytilde[1];
  y[2] = gamma;
  if (mode == Mode::Lorentz) {
    y[3] = ytilde[2];
    y[4] = ytilde[3];
    y[5] = ytilde[4];
  }
  return y;
}

void check_ytilde(std::span<const double> ytilde, Mode mode) {
  if (static_cast<int>(ytilde.size()) != coset_dim(mode)) {
    throw ChartError("coset point needs " + std::to_string(coset_dim(mode)) + " coordinates");
  }
  for (double v : ytilde) {
    if (!std::isfinite(v)) throw ChartError("coset coordinate is not finite");
  }
}

double factorial(int n) { return std::tgamma(n + 1.0); }

}  // namespace

int chart_dim(Mode mode) { return mode == Mode::Rotation ? 3 : 6; }
int coset_dim(Mode mode) { return mode == Mode::Rotation ? 2 : 5; }
int algebra_dim(Mode mode) { return mode == Mode::Rotation ? 3 : 6; }

Mat2 rz(double angle) { return to_eigen(rz_t(angle)); }
Mat2 ry(double angle) { return to_eigen(ry_t(angle)); }
Mat2 boost(double chi, double theta, double phi) { return to_eigen(boost_t(chi, theta, phi)); }

GroupElement::GroupElement(Mat2 m) : sl2(std::move(m)) {
  if (std::abs(sl2.determinant() - 1.0) > 1e-9) {
    throw ChartError("group element is not unimodular");
  }
}

Eigen::Matrix4d GroupElement::lorentz4() const {
  const auto s = pauli();
  Eigen::Matrix4d out;
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) {
      out(mu, nu) = 0.5 * (s[mu] * sl2 * s[nu] * sl2.adjoint()).trace().real();
    }
  return out;
}

GroupElement GroupElement::inverse() const {
  Mat2 inv;
  inv << sl2(1, 1), -sl2(0, 1), -sl2(1, 0), sl2(0, 0);
  return GroupElement(inv);
}

GroupElement from_euler(std::span<const double> y, Mode mode) {
  if (static_cast<int>(y.size()) != chart_dim(mode)) {
    throw ChartError("chart point needs " + std::to_string(chart_dim(mode)) + " coordinates");
  }
  return GroupElement(to_eigen(chart_t(y, mode)));
}

GroupElement representative_boost(std::span<const double> ytilde, Mode mode) {
  check_ytilde(ytilde, mode);
  const auto y = chart_point(ytilde, 0.0, mode);
  return from_euler(y, mode);
}

Factorization factorize(const GroupElement& g, Mode mode) {
  Mat2 u = g.sl2;
  Mat2 p = Mat2::Identity();
  if (mode == Mode::Lorentz) {
    // Polar decomposition g = U P with P = sqrt(g^dagger g), det P = 1.
    const Mat2 x = g.sl2.adjoint() * g.sl2;
    p = (x + Mat2::Identity()) / std::sqrt(x.trace().real() + 2.0);
    Mat2 p_inv;
    p_inv << p(1, 1), -p(0, 1), -p(1, 0), p(0, 0);
    u = g.sl2 * p_inv;
  } else if ((u * u.adjoint() - Mat2::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ChartError("rotation-mode element is not unitary");
  }
  // ZYZ angles of u = Rz(alpha) Ry(beta) Rz(gamma).
  const double c = std::abs(u(0, 0)), s = std::abs(u(1, 0));
  const double beta = 2 * std::atan2(s, c);
  double alpha = 0.0, gamma = 0.0;
  constexpr double eps = 1e-15;
  if (s <= eps) {
    gamma = 2 * std::arg(u(1, 1));
  } else if (c <= eps) {
    alpha = 2 * std::arg(u(1, 0));
  } else {
    const double a1 = std::arg(u(1, 1)), a2 = std::arg(u(1, 0));
    alpha = a1 + a2;
    gamma = a1 - a2;
  }
  const double shift = alpha - wrap_pi(alpha);
  alpha -= shift;
  gamma = wrap_two_pi(gamma - shift);

  Factorization out;
  out.gamma = gamma;
  if (mode == Mode::Rotation) {
    out.ytilde.resize(2);
    out.ytilde << alpha, beta;
    return out;
  }
  const Mat2 h = rz(gamma) * p * rz(-gamma);
  // sinh(chi/2) is the norm of the traceless part; asinh keeps small chi accurate.
  const double sh = std::hypot(0.5 * (h(0, 0) - h(1, 1)).real(), std::abs(h(1, 0)));
  const double chi = 2 * std::asinh(sh);
  double theta = 0.0, phi = 0.0;
  if (sh > 1e-15) {
    const double n3 = 0.5 * (h(0, 0) - h(1, 1)).real() / sh;
    const double n1 = h(1, 0).real() / sh, n2 = h(1, 0).imag() / sh;
    const double rho = std::hypot(n1, n2);
    theta = std::atan2(rho, n3);
    if (rho > 1e-15) phi = std::atan2(n2, n1);
  }
  out.ytilde.resize(5);
  out.ytilde << alpha, beta, phi, theta, chi;
  return out;
}

Eigen::VectorXd to_euler(const GroupElement& g, Mode mode) {
  const Factorization f = factorize(g, mode);
  const auto y = chart_point(std::span<const double>(f.ytilde.data(), f.ytilde.size()), f.gamma,
                             mode);
  return Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
}

Factorization left_translation(const GroupElement& lambda_bar, std::span<const double> ytilde,
                               Mode mode) {
  return factorize(lambda_bar * representative_boost(ytilde, mode), mode);
}

double wigner_rotation(const GroupElement& lambda_bar, std::span<const double> ytilde, Mode mode) {
  const Factorization f = left_translation(lambda_bar, ytilde, mode);
  const GroupElement b_new =
      representative_boost(std::span<const double>(f.ytilde.data(), f.ytilde.size()), mode);
  const Mat2 r = b_new.inverse().sl2 * lambda_bar.sl2 * representative_boost(ytilde, mode).sl2;
  return wrap_two_pi(-2 * std::arg(r(0, 0)));
}

double left_translation_residual(const GroupElement& lambda_bar, std::span<const double> ytilde,
                                 const Factorization& result, Mode mode) {
  const Mat2 lhs = lambda_bar.sl2 * representative_boost(ytilde, mode).sl2;
  const Mat2 rhs =
      representative_boost(std::span<const double>(result.ytilde.data(), result.ytilde.size()),
                           mode)
          .sl2 *
      rz(result.gamma);
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

Eigen::MatrixXcd symmetric_power(const Mat2& a, int two_j) {
  const int n = two_j;
  Eigen::MatrixXcd d(n + 1, n + 1);
  for (int k = 0; k <= n; ++k) {
    // (a00 xi + a10 eta)^{n-k} (a01 xi + a11 eta)^k as coefficients of eta^l.
    std::vector<Complex> poly{1.0};
    auto multiply = [&poly](Complex x, Complex e) {
      std::vector<Complex> next(poly.size() + 1, 0.0);
      for (std::size_t l = 0; l < poly.size(); ++l) {
        next[l] += poly[l] * x;
        next[l + 1] += poly[l] * e;
      }
      poly = std::move(next);
    };
    for (int r = 0; r < n - k; ++r) multiply(a(0, 0), a(1, 0));
    for (int r = 0; r < k; ++r) multiply(a(0, 1), a(1, 1));
    for (int l = 0; l <= n; ++l) {
      d(l, k) = poly[l] * std::sqrt(factorial(l) * factorial(n - l) / (factorial(k) * factorial(n - k)));
    }
  }
  return d;
}

Eigen::MatrixXcd wigner_D(const RepLabel& label, const GroupElement& g) {
  if (label.two_u < 0 || label.two_v < 0 || label.two_u > 4 || label.two_v > 4 ||
      label.dim() > 25) {
    throw Error("representation label (" + std::to_string(label.two_u) + "/2, " +
                std::to_string(label.two_v) + "/2) exceeds the supported size");
  }
  const Eigen::MatrixXcd du = symmetric_power(g.sl2, label.two_u);
  const Eigen::MatrixXcd dv = symmetric_power(g.inverse().sl2.adjoint(), label.two_v);
  Eigen::MatrixXcd out(du.rows() * dv.rows(), du.cols() * dv.cols());
  for (Eigen::Index i = 0; i < du.rows(); ++i)
    for (Eigen::Index j = 0; j < du.cols(); ++j) {
      out.block(i * dv.rows(), j * dv.cols(), dv.rows(), dv.cols()) = du(i, j) * dv;
    }
  return out;
}

Eigen::MatrixXd algebra_metric(Mode mode) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(algebra_dim(mode), algebra_dim(mode));
  if (mode == Mode::Lorentz) g.bottomRightCorner(3, 3) *= -1.0;
  return g;
}

Field killing_field(Mode mode) {
  const int nc = chart_dim(mode);
  const int na = algebra_dim(mode);
  return Field(nc, nc * na, [mode, nc, na](const Point& q, int order) {
    const std::vector<Jet> y = seed(std::span<const double>(q.data(), q.size()), order + 1);
    const M2<Jet> m = chart_t(std::span<const Jet>(y), mode);
    M2<Jet> inv;
    inv[0] = m[3];
    inv[1] = Cx<Jet>{-1.0 * m[1].re, -1.0 * m[1].im};
    inv[2] = Cx<Jet>{-1.0 * m[2].re, -1.0 * m[2].im};
    inv[3] = m[0];
    for (auto& e : inv) e = {e.re.truncated(order), e.im.truncated(order)};
    std::vector<Jet> out;
    out.reserve(nc * na);
    for (int a = 0; a < nc; ++a) {
      M2<Jet> dm;
      for (int e = 0; e < 4; ++e) dm[e] = {m[e].re.derivative(a), m[e].im.derivative(a)};
      const M2<Jet> x = dm * inv;
      // c_m = tr(X sigma_m) / 2
      const Cx<Jet> c1{(x[1].re + x[2].re) * 0.5, (x[1].im + x[2].im) * 0.5};
      const Cx<Jet> c2{(x[2].im - x[1].im) * 0.5, (x[1].re - x[2].re) * 0.5};
      const Cx<Jet> c3{(x[0].re - x[3].re) * 0.5, (x[0].im - x[3].im) * 0.5};
      for (const auto* c : {&c1, &c2, &c3}) out.push_back(-2.0 * c->im);
      if (na == 6) {
        for (const auto* c : {&c1, &c2, &c3}) out.push_back(2.0 * c->re);
      }
    }
    return out;
  });
}

Field group_metric_field(Mode mode) {
  const int nc = chart_dim(mode);
  const int na = algebra_dim(mode);
  const Eigen::MatrixXd gmn = algebra_metric(mode);
  return killing_field(mode).map(nc * nc, [nc, na, gmn](const std::vector<Jet>& k) {
    std::vector<Jet> out;
    out.reserve(nc * nc);
    for (int a = 0; a < nc; ++a)
      for (int b = 0; b < nc; ++b) {
        Jet s = k[a * na] * k[b * na] * gmn(0, 0);
        for (int m = 1; m < na; ++m) s += k[a * na + m] * k[b * na + m] * gmn(m, m);
        out.push_back(s);
      }
    return out;
  });
}

KillingData killing_data(std::span<const double> y, Mode mode) {
  const int nc = chart_dim(mode);
  const int na = algebra_dim(mode);
  if (static_cast<int>(y.size()) != nc) throw ChartError("chart point has the wrong dimension");
  const Point q = Eigen::Map<const Point>(y.data(), nc);
  const Eigen::VectorXd k = killing_field(mode).values(q);
  KillingData out;
  out.K = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      k.data(), nc, na);
  if (std::abs(out.K.determinant()) < 1e-9) {
    throw ChartError("Killing matrix is singular at this chart point (Euler-angle degeneracy)");
  }
  out.group_metric = out.K * algebra_metric(mode) * out.K.transpose();
  return out;
}

Field configuration_metric(const Field& spacetime_metric, Mode mode, double group_scale) {
  const Field group = group_metric_field(mode).map(
      chart_dim(mode) * chart_dim(mode), [group_scale](const std::vector<Jet>& v) {
        std::vector<Jet> out = v;
        for (auto& j : out) j *= group_scale;
        return out;
      });
  return weyl::block_diagonal({spacetime_metric, group});
}

Field assemble_internal_field(const Field& A_mu, const Field& F, Mode mode, double charge_over_c) {
  const int nx = A_mu.dim();
  const int nc = chart_dim(mode);
  const int na = algebra_dim(mode);
  if (A_mu.components() != nx) throw Error("A_mu must have one component per spacetime coordinate");
  if (F.dim() != nx || F.components() != na) {
    throw Error("F must have " + std::to_string(na) + " components on the spacetime chart");
  }
  const int dim = nx + nc;
  std::vector<int> xs(nx), ys(nc);
  for (int i = 0; i < nx; ++i) xs[i] = i;
  for (int i = 0; i < nc; ++i) ys[i] = nx + i;
  const Field a = pullback(A_mu, dim, xs);
  const Field f = pullback(F, dim, xs);
  const Field k = pullback(killing_field(mode), dim, ys);
  return Field(dim, dim, [a, f, k, nc, na, charge_over_c](const Point& q, int order) {
    std::vector<Jet> out = a.jets(q, order);
    const auto fj = f.jets(q, order);
    const auto kj = k.jets(q, order);
    for (int b = 0; b < nc; ++b) {
      Jet s = kj[b * na] * fj[0];
      for (int m = 1; m < na; ++m) s += kj[b * na + m] * fj[m];
      out.push_back(s);
    }
    for (auto& j : out) j *= charge_over_c;
    return out;
  });
}

Complex fiber_character(int two_s, double gamma) {
  return std::exp(Complex(0.0, 0.5 * two_s * gamma));
}

Eigen::VectorXcd undotted_basis(std::span<const double> ytilde, int two_s, Mode mode) {
  const GroupElement b_inv = representative_boost(ytilde, mode).inverse();
  return wigner_D({0, two_s}, b_inv).row(0).transpose();
}

Eigen::VectorXcd dotted_basis(std::span<const double> ytilde, int two_s, Mode mode) {
  const GroupElement b_inv = representative_boost(ytilde, mode).inverse();
  return wigner_D({two_s, 0}, b_inv).row(0).transpose();
}

// Newton iteration on P_n from Chebyshev-like starting guesses.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const double p = std::legendre(n, x);
      const double dp = n * (x * p - std::legendre(n - 1, x)) / (x * x - 1.0);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = n * (x * std::legendre(n, x) - std::legendre(n - 1, x)) / (x * x - 1.0);
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

QuotientExpansion quotient_expand(const std::function<Complex(std::span<const double>)>& phi,
                                  int two_s, Mode mode, const QuadratureOptions& options) {
  if (two_s < 0 || two_s > 4) throw Error("helicity s must be in {0, 1/2, ..., 2}");
  QuotientExpansion e;
  e.two_s = two_s;
  e.mode = mode;
  const int size = two_s + 1;
  double misfit = 0.0, norm = 0.0;

  if (mode == Mode::Rotation) {
    if (options.legendre_nodes < 2 * two_s + 2 || options.azimuth_nodes < 2 * two_s + 1) {
      throw Error("too few quadrature nodes for this helicity");
    }
    std::vector<double> x, w;
    gauss_legendre(options.legendre_nodes, x, w);
    std::vector<std::array<double, 2>> points;
    std::vector<double> weight;
    std::vector<Complex> values;
    e.undotted = Eigen::VectorXcd::Zero(size);
    const double wa = 2 * kPi / options.azimuth_nodes;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (int j = 0; j < options.azimuth_nodes; ++j) {
        const std::array<double, 2> y{-kPi + (j + 0.5) * wa, std::acos(x[i])};
        const Complex v = phi(y);
        const Eigen::VectorXcd f = undotted_basis(y, two_s, mode);
        e.undotted += (w[i] * wa * v) * f.conjugate();
        points.push_back(y);
        weight.push_back(w[i] * wa);
        values.push_back(v);
      }
    }
    e.undotted *= (two_s + 1) / (4 * kPi);
    for (std::size_t k = 0; k < points.size(); ++k) {
      misfit += weight[k] * std::norm(values[k] - quotient_reconstruct(e, points[k]));
      norm += weight[k] * std::norm(values[k]);
    }
  } else {
    const int unknowns = two_s == 0 ? 1 : 2 * size;
    const int samples = options.lorentz_samples > 0 ? options.lorentz_samples : 12 * unknowns;
    CounterRng rng(options.seed, 0x51);
    Eigen::MatrixXcd a(samples, unknowns);
    Eigen::VectorXcd b(samples);
    std::vector<std::array<double, 5>> points(samples);
    for (int r = 0; r < samples; ++r) {
      auto& y = points[r];
      y = {rng.uniform(-kPi, kPi), rng.uniform(0.1, kPi - 0.1), rng.uniform(-kPi, kPi),
           rng.uniform(0.1, kPi - 0.1), rng.uniform(0.05, 1.5)};
      const Eigen::VectorXcd f = undotted_basis(y, two_s, mode);
      a.row(r).head(size) = f.transpose();
      if (two_s > 0) a.row(r).tail(size) = dotted_basis(y, two_s, mode).transpose();
      b[r] = phi(y);
    }
    const Eigen::VectorXcd c = a.colPivHouseholderQr().solve(b);
    e.undotted = c.head(size);
    if (two_s > 0) e.dotted = c.tail(size);
    misfit = (a * c - b).squaredNorm();
    norm = b.squaredNorm();
  }
  e.residual = norm > 0.0 ? std::sqrt(misfit / norm) : std::sqrt(misfit);
  e.band_limited = e.residual <= options.band_limit_tolerance;
  return e;
}

QuotientExpansion quotient_expand(const Field& phi, const Point& x, int two_s, Mode mode,
                                  const QuadratureOptions& options) {
  const int nx = static_cast<int>(x.size());
  if (phi.components() != 2 || phi.dim() != nx + coset_dim(mode)) {
    throw Error("quotient field must be (re, im) on the (x, ytilde) chart");
  }
  return quotient_expand(
      [&](std::span<const double> y) {
        Point q(nx + coset_dim(mode));
        q.head(nx) = x;
        for (int i = 0; i < coset_dim(mode); ++i) q[nx + i] = y[i];
        const Eigen::VectorXd v = phi.values(q);
        return Complex(v[0], v[1]);
      },
      two_s, mode, options);
}

Complex quotient_reconstruct(const QuotientExpansion& e, std::span<const double> ytilde) {
  Complex out = undotted_basis(ytilde, e.two_s, e.mode).cwiseProduct(e.undotted).sum();
  if (e.dotted.size() > 0) {
    out += dotted_basis(ytilde, e.two_s, e.mode).cwiseProduct(e.dotted).sum();
  }
  return out;
}

}  // namespace cqg::harmonics
