#include "cqg/madelung.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cqg/errors.hpp"

namespace cqg::madelung {

namespace {

using weyl::Geometry;

struct Local {
  Eigen::MatrixXd ginv;
  Tensor<double> gamma;  // Levi-Civita
};

Local local(const Geometry& geo, const Point& q) {
  const int n = geo.dim();
  const Tensor<double> gi = values(weyl::inverse_metric(weyl::metric_jets(geo, q, 0)));
  Local out;
  out.ginv.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.ginv(i, j) = gi(i, j);
  out.gamma = weyl::christoffel(geo, q);
  return out;
}

// g^kl (d_k d_l f - Gamma^m_kl d_m f) for an order >= 2 scalar jet.
double box(const Jet& f, const Local& L) {
  const int n = static_cast<int>(L.ginv.rows());
  double out = 0.0;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      double h = f.derivative(k).gradient(l);
      for (int m = 0; m < n; ++m) h -= L.gamma(m, k, l) * f.gradient(m);
      out += L.ginv(k, l) * h;
    }
  return out;
}

void check_state(const State& s, int n) {
  if (s.rho.components() != 1 || s.S.components() != 1 || s.A.components() != n ||
      s.rho.dim() != n || s.S.dim() != n || s.A.dim() != n) {
    throw Error("state fields do not match the " + std::to_string(n) + "-dimensional chart");
  }
}

std::string describe(const Point& q) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (Eigen::Index i = 0; i < q.size(); ++i) os << (i ? ", " : "") << q[i];
  os << ")";
  return os.str();
}

double principal_phase(const Wavefunction& psi, const Point& q) {
  const Complex v = psi.value(q);
  if (std::norm(v) < 1e-24) throw DomainError("wavefunction vanishes at " + describe(q));
  return std::arg(v);
}

double wrap(double d) {
  constexpr double two_pi = 2 * std::numbers::pi;
  d = std::fmod(d, two_pi);
  if (d > std::numbers::pi) d -= two_pi;
  if (d <= -std::numbers::pi) d += two_pi;
  return d;
}

}  // namespace

double xi_coefficient(int n) {
  if (n < 3) throw Error("xi needs n >= 3");
  return std::sqrt((n - 2.0) / (4.0 * (n - 1.0)));
}

State gauge_transform(const State& state, const Field& lambda) {
  const int n = state.rho.dim();
  return {scale_by_power(state.rho, lambda, -(n - 2.0)), state.S, state.A};
}

double hj_residual(const State& state, const Geometry& geo, const Point& q, const Couplings& c) {
  const int n = geo.dim();
  check_state(state, n);
  const Local L = local(geo, q);
  const Eigen::VectorXd p = gradient(state.S).values(q) - state.A.values(q);
  const double xi = xi_coefficient(n);
  const double rw = weyl::weyl_curvature_from_density(state.rho, geo, q);
  return p.dot(L.ginv * p) + c.hbar * c.hbar * xi * xi * rw;
}

double continuity_residual(const State& state, const Geometry& geo, const Point& q,
                           const Couplings&) {
  const int n = geo.dim();
  check_state(state, n);
  const Jet rho = state.rho.jet(q, 1);
  const Jet s = state.S.jet(q, 2);
  const std::vector<Jet> a = state.A.jets(q, 1);
  const Tensor<Jet> ginv = weyl::inverse_metric(weyl::metric_jets(geo, q, 1));
  const Tensor<double> gamma = weyl::christoffel(geo, q);
  std::vector<Jet> p(n);
  for (int l = 0; l < n; ++l) p[l] = s.derivative(l) - a[l];
  std::vector<Jet> v(n);  // rho P^k
  for (int k = 0; k < n; ++k) {
    Jet sum = ginv(k, 0) * p[0];
    for (int l = 1; l < n; ++l) sum += ginv(k, l) * p[l];
    v[k] = rho * sum;
  }
  double out = 0.0;
  for (int k = 0; k < n; ++k) {
    out += v[k].gradient(k);
    for (int m = 0; m < n; ++m) out += gamma(k, k, m) * v[m].value();
  }
  return out;
}

Eigen::VectorXd current_density(const State& state, const Geometry& geo, const Point& q) {
  const int n = geo.dim();
  check_state(state, n);
  const Local L = local(geo, q);
  const Eigen::MatrixXd g = geo.metric.values(q).reshaped(n, n);
  const Eigen::VectorXd p = gradient(state.S).values(q) - state.A.values(q);
  return state.rho.value(q) * std::sqrt(std::abs(g.determinant())) * (L.ginv * p);
}

Complex Wavefunction::value(const Point& q) const {
  const Eigen::VectorXd v = psi.values(q);
  return {v[0], v[1]};
}

Wavefunction ansatz_compose(const State& state, const Couplings& c) {
  const Field rho = state.rho;
  const Field S = state.S;
  const double hbar = c.hbar;
  return {Field(rho.dim(), 2, [rho, S, hbar](const Point& q, int order) {
    const Jet r = rho.jet(q, order);
    if (!(r.value() > 0.0)) throw DomainError("density must be positive at " + describe(q));
    const Jet a = sqrt(r);
    const Jet phase = S.jet(q, order) * (1.0 / hbar);
    return std::vector<Jet>{a * cos(phase), a * sin(phase)};
  })};
}

std::vector<double> continue_phase(const Wavefunction& psi, const std::vector<Point>& path) {
  std::vector<double> out;
  out.reserve(path.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double here = principal_phase(psi, path[i]);
    out.push_back(i == 0 ? here : out.back() + wrap(here - prev));
    prev = here;
  }
  return out;
}

State ansatz_decompose(const Wavefunction& psi, const Field& A, const BranchPolicy& branch,
                       const Couplings& c) {
  const Field f = psi.psi;
  const int n = f.dim();
  Field rho(n, 1, [f](const Point& q, int order) {
    const auto v = f.jets(q, order);
    return std::vector<Jet>{v[0] * v[0] + v[1] * v[1]};
  });
  const double hbar = c.hbar;
  Field S(n, 1, [psi, branch, hbar](const Point& q, int order) {
    const auto v = psi.psi.jets(q, order);
    if (v[0].value() * v[0].value() + v[1].value() * v[1].value() < 1e-24) {
      throw DomainError("wavefunction vanishes at " + describe(q) + "; phase undefined");
    }
    Jet theta = atan2(v[1], v[0]);
    if (branch.kind == BranchPolicy::Kind::Continuation) {
      std::vector<Point> path;
      for (int s = 0; s <= branch.segments; ++s) {
        path.push_back(branch.anchor + (q - branch.anchor) * (double(s) / branch.segments));
      }
      const std::vector<double> unwrapped = continue_phase(psi, path);
      const double shift = branch.anchor_phase - unwrapped.front();
      const double target = unwrapped.back() + shift;
      theta += 2 * std::numbers::pi * std::round((target - theta.value()) / (2 * std::numbers::pi));
    }
    return std::vector<Jet>{theta * hbar};
  });
  return {rho, S, A};
}

Complex wave_residual(const Wavefunction& psi, const Field& A, const Geometry& geo,
                      const Point& q, const Couplings& c) {
  const int n = geo.dim();
  const Local L = local(geo, q);
  const auto v = psi.psi.jets(q, 2);
  const std::vector<Jet> a = A.jets(q, 1);
  const Complex I(0.0, 1.0);
  const Complex value(v[0].value(), v[1].value());
  std::vector<Complex> d(n);
  for (int k = 0; k < n; ++k) d[k] = {v[0].gradient(k), v[1].gradient(k)};
  const Complex lap(box(v[0], L), box(v[1], L));
  double div_a = 0.0;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      double h = a[l].gradient(k);
      for (int m = 0; m < n; ++m) h -= L.gamma(m, k, l) * a[m].value();
      div_a += L.ginv(k, l) * h;
    }
  Eigen::VectorXd a_low(n);
  for (int k = 0; k < n; ++k) a_low[k] = a[k].value();
  const Eigen::VectorXd a_up = L.ginv * a_low;
  Complex transport = 0.0;
  for (int k = 0; k < n; ++k) transport += a_up[k] * d[k];
  const double hbar = c.hbar;
  const Complex dd = lap - (I / hbar) * (div_a * value + 2.0 * transport) -
                     a_low.dot(a_up) * value / (hbar * hbar);
  const double xi = xi_coefficient(n);
  const double rg = weyl::scalar_curvature_jet(geo, q, 0).value();
  return hbar * hbar * dd - hbar * hbar * xi * xi * rg * value;
}

Equivalence madelung_equivalence(const State& state, const Geometry& geo, const Point& q,
                                 const Couplings& c) {
  const Wavefunction psi = ansatz_compose(state, c);
  Equivalence e;
  e.ratio = wave_residual(psi, state.A, geo, q, c) / psi.value(q);
  e.hj = hj_residual(state, geo, q, c);
  e.continuity = continuity_residual(state, geo, q, c);
  e.real_gap = std::abs(e.ratio.real() + e.hj);
  e.imag_gap = std::abs(e.ratio.imag() - c.hbar * e.continuity / state.rho.value(q));
  return e;
}

double quantum_potential_gap(const Field& rho, const Geometry& geo, const Point& q,
                             const Couplings& c) {
  const int n = geo.dim();
  const double xi = xi_coefficient(n);
  const double rw = weyl::weyl_curvature_from_density(rho, geo, q);
  const double rg = weyl::scalar_curvature_jet(geo, q, 0).value();
  const Jet a = sqrt(rho.jet(q, 2));
  const double h2 = c.hbar * c.hbar;
  return h2 * xi * xi * (rw - rg) + h2 * box(a, local(geo, q)) / a.value();
}

}  // namespace cqg::madelung
