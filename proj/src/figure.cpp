#include "cqg/figure.hpp"

#include <cmath>
#include <future>
#include <sstream>

#include "cqg/errors.hpp"
#include "cqg/madelung.hpp"
#include "cqg/weyl.hpp"

namespace cqg::figure {

namespace {

struct Local {
  Eigen::MatrixXd g, ginv;
  Eigen::VectorXd A;
  double M = 0.0;
};

Eigen::MatrixXd matrix(const Field& metric, const Point& q) {
  const int n = metric.dim();
  return metric.values(q).reshaped(n, n).transpose();
}

Local local(const Background& bg, const Point& q) {
  Local L;
  L.g = matrix(bg.metric, q);
  Tensor<Jet> gj(bg.dim(), 2);
  gj.data() = bg.metric.jets(q, 0);
  const Tensor<double> gi = values(weyl::inverse_metric(gj));
  const int n = bg.dim();
  L.ginv.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) L.ginv(i, j) = gi(i, j);
  L.A = bg.A.values(q);
  L.M = -bg.coupling * bg.rw.value(q);
  return L;
}

std::string at(double tau) {
  std::ostringstream os;
  os << " at tau = " << tau;
  return os.str();
}

void check(const Background& bg) {
  const int n = bg.dim();
  if (bg.metric.dim() != n || bg.metric.components() != n * n || bg.rw.dim() != n ||
      bg.rw.components() != 1 || bg.A.components() != n) {
    throw Error("background fields do not share an " + std::to_string(n) + "-dimensional chart");
  }
}

template <class Rhs>
Eigen::VectorXd rk4_step(const Rhs& f, double tau, const Eigen::VectorXd& y, double h) {
  const Eigen::VectorXd k1 = f(tau, y);
  const Eigen::VectorXd k2 = f(tau + h / 2, y + h / 2 * k1);
  const Eigen::VectorXd k3 = f(tau + h / 2, y + h / 2 * k2);
  const Eigen::VectorXd k4 = f(tau + h, y + h * k3);
  return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

double speed_at(const IntegrationOptions& o, double tau) {
  if (!o.speed) return 1.0;
  const double f = o.speed(tau);
  if (!(f > 0.0)) throw Error("reparameterization speed must be positive" + at(tau));
  return f;
}

void finish(Sample& s, const Background& bg) {
  const Eigen::MatrixXd g = matrix(bg.metric, s.q);
  const Eigen::VectorXd a = bg.A.values(s.q);
  const double M = mass(bg, s.q);
  const Eigen::VectorXd low = g * s.qdot;
  s.radicand = M * s.qdot.dot(low);
  s.lagrangian = std::sqrt(std::max(s.radicand, 0.0)) + a.dot(s.qdot);
  if (s.radicand > 0.0) {
    s.p_conjugate = M * low / std::sqrt(s.radicand) + a;
  } else {
    s.p_conjugate = Eigen::VectorXd::Constant(s.q.size(), std::nan(""));
  }
}

}  // namespace

Background from_curvature(Field metric, Field rw, Field A, double coupling) {
  Background bg{cached(metric), cached(rw), cached(A), coupling};
  check(bg);
  return bg;
}

Background from_density(Field metric, Field rho, Field A, double hbar) {
  const int n = metric.dim();
  metric = cached(metric);
  const weyl::Geometry geo(metric, Field::zero(n, n));
  Field rw(n, 1, [rho, geo](const Point& q, int order) {
    return std::vector<Jet>{weyl::weyl_curvature_from_density_jet(rho, geo, q, order)};
  });
  const double xi = madelung::xi_coefficient(n);
  return from_curvature(std::move(metric), std::move(rw), std::move(A), hbar * hbar * xi * xi);
}

Background gauge_transform(const Background& bg, const Field& lambda) {
  return {scale_by_power(bg.metric, lambda, 2.0), scale_by_power(bg.rw, lambda, -2.0), bg.A,
          bg.coupling};
}

double mass(const Background& bg, const Point& q) { return -bg.coupling * bg.rw.value(q); }

double homogeneous_lagrangian(const Background& bg, const Point& q, const Eigen::VectorXd& qdot) {
  const double r = mass(bg, q) * qdot.dot(matrix(bg.metric, q) * qdot);
  if (r < 0.0) throw ConeError("velocity outside allowed cone (radicand " + std::to_string(r) + ")");
  return std::sqrt(r) + bg.A.values(q).dot(qdot);
}

Eigen::VectorXd conjugate_momenta(const Background& bg, const Point& q,
                                  const Eigen::VectorXd& qdot) {
  const double M = mass(bg, q);
  const Eigen::VectorXd low = matrix(bg.metric, q) * qdot;
  const double r = M * qdot.dot(low);
  if (!(r > 0.0)) {
    throw ConeError(r == 0.0 ? "zero speed: momenta undefined"
                             : "velocity outside allowed cone (radicand " + std::to_string(r) + ")");
  }
  return M * low / std::sqrt(r) + bg.A.values(q);
}

Eigen::VectorXd complete_on_shell(const Background& bg, const Point& q, Eigen::VectorXd p,
                                  int component) {
  const Local L = local(bg, q);
  const int c = component;
  Eigen::VectorXd P = p - L.A;
  const double sign = P[c] < 0.0 ? -1.0 : 1.0;
  P[c] = 0.0;
  // a x^2 + 2 b x + d = M with x = P_c
  const double a = L.ginv(c, c);
  const double b = L.ginv.row(c).dot(P);
  const double d = P.dot(L.ginv * P) - L.M;
  if (a == 0.0) {
    if (b == 0.0) throw ConeError("mass shell cannot be solved for this component");
    p[c] = L.A[c] - d / (2 * b);
    return p;
  }
  const double disc = b * b - a * d;
  if (disc < 0.0) throw ConeError("no real momentum on the mass shell");
  const double r1 = (-b + std::sqrt(disc)) / a, r2 = (-b - std::sqrt(disc)) / a;
  const double x = (sign > 0) == (std::max(r1, r2) > 0) ? std::max(r1, r2) : std::min(r1, r2);
  p[c] = L.A[c] + x;
  return p;
}

Trajectory integrate_trajectory(const Field& S, const Background& bg, const Point& q0,
                                const IntegrationOptions& options) {
  check(bg);
  if (options.steps < 0) throw Error("negative step count");
  const Field dS = gradient(S);
  Trajectory t;
  auto velocity = [&](double tau, const Eigen::VectorXd& q) -> Eigen::VectorXd {
    const Local L = local(bg, q);
    const Eigen::VectorXd P = dS.values(q) - L.A;
    const Eigen::VectorXd up = L.ginv * P;
    const double r = L.M * P.dot(up);
    if (!(r > 0.0)) {
      throw ConeError("gradient flow leaves the allowed cone" + at(tau) +
                      " (M P.P = " + std::to_string(r) + ")");
    }
    return speed_at(options, tau) * (L.M > 0 ? 1.0 : -1.0) / std::sqrt(r) * up;
  };
  auto record = [&](double tau, const Eigen::VectorXd& q) {
    Sample s;
    s.tau = tau;
    s.q = q;
    s.qdot = velocity(tau, q);
    s.p = dS.values(q);
    finish(s, bg);
    const Local L = local(bg, q);
    const Eigen::VectorXd P = s.p - L.A;
    t.max_hj_residual = std::max(t.max_hj_residual, std::abs(P.dot(L.ginv * P) - L.M));
    t.samples.push_back(std::move(s));
  };
  const double h = options.steps ? (options.tau1 - options.tau0) / options.steps : 0.0;
  Eigen::VectorXd q = q0;
  record(options.tau0, q);
  for (int k = 0; k < options.steps; ++k) {
    const double tau = options.tau0 + k * h;
    q = rk4_step(velocity, tau, q, h);
    if (!q.allFinite()) throw Error("step rejected: non-finite state" + at(tau + h));
    record(options.tau0 + (k + 1) * h, q);
  }
  t.hj_warning = t.max_hj_residual > options.hj_tolerance;
  return t;
}

Trajectory integrate_characteristics(const Background& bg, const Point& q0,
                                     const Eigen::VectorXd& p0,
                                     const IntegrationOptions& options) {
  check(bg);
  const int n = bg.dim();
  const double sigma = mass(bg, q0) > 0 ? 1.0 : -1.0;
  auto rhs = [&](double tau, const Eigen::VectorXd& y) -> Eigen::VectorXd {
    const Point q = y.head(n);
    const Eigen::VectorXd p = y.tail(n);
    Tensor<Jet> gj(n, 2);
    gj.data() = bg.metric.jets(q, 1);
    const Tensor<Jet> gi = weyl::inverse_metric(gj);
    const std::vector<Jet> a = bg.A.jets(q, 1);
    const Jet rw = bg.rw.jet(q, 1);
    if (-bg.coupling * rw.value() * sigma <= 0.0) {
      throw ConeError("mass changes sign along the characteristic" + at(tau));
    }
    Eigen::VectorXd P(n);
    for (int i = 0; i < n; ++i) P[i] = p[i] - a[i].value();
    Eigen::MatrixXd ginv(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) ginv(i, j) = gi(i, j).value();
    const Eigen::VectorXd up = ginv * P;
    const double f = speed_at(options, tau);
    Eigen::VectorXd out(2 * n);
    out.head(n) = f * sigma * up;
    for (int k = 0; k < n; ++k) {
      double dh = bg.coupling * rw.gradient(k) / 2;  // -dM/2
      for (int i = 0; i < n; ++i) {
        dh -= a[i].gradient(k) * up[i];
        for (int j = 0; j < n; ++j) dh += P[i] * gi(i, j).gradient(k) * P[j] / 2;
      }
      out[n + k] = -f * sigma * dh;
    }
    return out;
  };
  Trajectory t;
  auto record = [&](double tau, const Eigen::VectorXd& y) {
    Sample s;
    s.tau = tau;
    s.q = y.head(n);
    s.p = y.tail(n);
    s.qdot = rhs(tau, y).head(n);
    finish(s, bg);
    t.samples.push_back(std::move(s));
  };
  Eigen::VectorXd y(2 * n);
  y << q0, p0;
  const double h = options.steps ? (options.tau1 - options.tau0) / options.steps : 0.0;
  record(options.tau0, y);
  for (int k = 0; k < options.steps; ++k) {
    const double tau = options.tau0 + k * h;
    y = rk4_step(rhs, tau, y, h);
    if (!y.allFinite()) throw Error("step rejected: non-finite state" + at(tau + h));
    record(options.tau0 + (k + 1) * h, y);
  }
  return t;
}

std::vector<Trajectory> integrate_bundle(const Field& S, const Background& bg,
                                         const std::vector<Point>& initial,
                                         const IntegrationOptions& options) {
  std::vector<std::future<Trajectory>> jobs;
  for (const auto& q0 : initial) {
    jobs.push_back(std::async(std::launch::async,
                              [&, q0] { return integrate_trajectory(S, bg, q0, options); }));
  }
  std::vector<Trajectory> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

double action_increment(const Trajectory& t) {
  const auto& s = t.samples;
  const int m = static_cast<int>(s.size()) - 1;  // intervals
  if (m <= 0) return 0.0;
  const double h = (s.back().tau - s.front().tau) / m;
  auto L = [&](int k) { return s[k].lagrangian; };
  if (m == 1) return h * (L(0) + L(1)) / 2;
  double out = 0.0;
  const int simpson = m % 2 == 0 ? m : m - 3;
  for (int k = 0; k + 2 <= simpson; k += 2) out += h / 3 * (L(k) + 4 * L(k + 1) + L(k + 2));
  if (simpson != m) {
    const int k = simpson;
    out += 3 * h / 8 * (L(k) + 3 * L(k + 1) + 3 * L(k + 2) + L(k + 3));
  }
  return out;
}

HelicityRecord intrinsic_helicity(const Trajectory& t, int gamma_index, double hbar,
                                  std::optional<double> expected_s) {
  if (t.samples.empty()) throw Error("empty trajectory");
  const int n = static_cast<int>(t.samples.front().p.size());
  if (gamma_index < 0 || gamma_index >= n) {
    throw Error("configuration has no gamma coordinate at index " + std::to_string(gamma_index));
  }
  HelicityRecord r;
  r.s = expected_s ? *expected_s : t.samples.front().p[gamma_index] / hbar;
  for (const auto& s : t.samples) {
    r.p_gamma.push_back(s.p[gamma_index]);
    r.max_deviation = std::max(r.max_deviation, std::abs(s.p[gamma_index] - hbar * r.s));
  }
  return r;
}

void write_csv(const Trajectory& t, std::ostream& out, int gamma_index) {
  if (t.samples.empty()) return;
  const int n = static_cast<int>(t.samples.front().q.size());
  out << "tau";
  for (int i = 0; i < n; ++i) out << ",q" << i;
  for (int i = 0; i < n; ++i) out << ",p" << i;
  if (gamma_index >= 0) out << ",p_gamma";
  out << ",radicand,lagrangian\n";
  const auto old = out.precision(17);
  for (const auto& s : t.samples) {
    out << s.tau;
    for (int i = 0; i < n; ++i) out << ',' << s.q[i];
    for (int i = 0; i < n; ++i) out << ',' << s.p[i];
    if (gamma_index >= 0) out << ',' << s.p[gamma_index];
    out << ',' << s.radicand << ',' << s.lagrangian << '\n';
  }
  out.precision(old);
}

}  // namespace cqg::figure
