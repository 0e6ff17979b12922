#include "cqg/weyl.hpp"

#include <cmath>
#include <string>

#include "cqg/errors.hpp"

namespace cqg::weyl {

namespace {

constexpr double kMaxCondition = 1e12;

Jet zero_jet(const Point& q, int order) {
  return Jet(JetSpace::get(static_cast<int>(q.size()), order), 0.0);
}

Tensor<Jet> zero_tensor(const Point& q, int rank, int order) {
  return Tensor<Jet>(static_cast<int>(q.size()), rank, zero_jet(q, order));
}

// Connection jets at `order` from metric jets at order + 1 and phi at order.
bool vanishes(const Jet& j) { return j.value() == 0.0 && j.is_constant(); }

Tensor<Jet> levi_civita(const Tensor<Jet>& g1, const Tensor<Jet>& ginv, const Point& q,
                        int order) {
  const int n = g1.dim();
  std::vector<Tensor<Jet>> dg;  // dg[k](i, j) = d_k g_ij
  dg.reserve(n);
  for (int k = 0; k < n; ++k) {
    Tensor<Jet> t(n, 2);
    for (int c = 0; c < t.size(); ++c) t.flat(c) = g1.flat(c).derivative(k);
    dg.push_back(std::move(t));
  }
  Tensor<Jet> lowered = zero_tensor(q, 3, order);  // Gamma_ljk
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        Jet v = dg[j](l, k) + dg[k](l, j) - dg[l](j, k);
        v *= 0.5;
        lowered(l, j, k) = v;
        lowered(l, k, j) = v;
      }
  Tensor<Jet> out = zero_tensor(q, 3, order);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        Jet v = zero_jet(q, order);
        for (int l = 0; l < n; ++l) {
          if (!vanishes(ginv(i, l)) && !vanishes(lowered(l, j, k))) v += ginv(i, l) * lowered(l, j, k);
        }
        out(i, j, k) = v;
        out(i, k, j) = v;
      }
  return out;
}

Tensor<Jet> truncated(const Tensor<Jet>& t, int order) {
  Tensor<Jet> out(t.dim(), t.rank());
  for (int c = 0; c < t.size(); ++c) out.flat(c) = t.flat(c).truncated(order);
  return out;
}

void add_weyl_terms(Tensor<Jet>& gamma, const Tensor<Jet>& g, const Tensor<Jet>& ginv,
                    const std::vector<Jet>& phi) {
  const int n = gamma.dim();
  std::vector<Jet> up(n);
  for (int i = 0; i < n; ++i) {
    up[i] = ginv(i, 0) * phi[0];
    for (int l = 1; l < n; ++l) up[i] += ginv(i, l) * phi[l];
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Jet& v = gamma(i, j, k);
        if (i == j) v += phi[k];
        if (i == k) v += phi[j];
        v -= g(j, k) * up[i];
      }
}

// Connection at order + 1, ready to be differentiated once.
Tensor<Jet> connection(const Geometry& geo, const Point& q, int order, bool weyl) {
  const Tensor<Jet> g = metric_jets(geo, q, order + 1);
  const Tensor<Jet> g_low = truncated(g, order);
  const Tensor<Jet> ginv = inverse_metric(g_low);
  Tensor<Jet> gamma = levi_civita(g, ginv, q, order);
  if (weyl) add_weyl_terms(gamma, g_low, ginv, geo.phi.jets(q, order));
  return gamma;
}

// R_ij = R^k_ikj from connection jets one order above the result.
Tensor<Jet> ricci_from(const Tensor<Jet>& gamma, const Point& q, int order) {
  const int n = gamma.dim();
  const Tensor<Jet> low = truncated(gamma, order);
  std::vector<char> zero(low.size());
  for (int c = 0; c < low.size(); ++c) zero[c] = vanishes(low.flat(c));
  auto z = [&](int a, int b, int c) { return zero[(a * n + b) * n + c]; };
  Tensor<Jet> out = zero_tensor(q, 2, order);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet v = zero_jet(q, order);
      for (int k = 0; k < n; ++k) {
        v += gamma(k, j, i).derivative(k);
        v -= gamma(k, k, i).derivative(j);
        for (int m = 0; m < n; ++m) {
          if (!z(k, k, m) && !z(m, j, i)) v += low(k, k, m) * low(m, j, i);
          if (!z(k, j, m) && !z(m, k, i)) v -= low(k, j, m) * low(m, k, i);
        }
      }
      out(i, j) = v;
    }
  return out;
}

Jet trace(const Tensor<Jet>& ginv, const Tensor<Jet>& t) {
  Jet v = ginv.flat(0) * t.flat(0);
  for (int c = 1; c < t.size(); ++c) v += ginv.flat(c) * t.flat(c);
  return v;
}

void require_positive(const Jet& v, const char* what) {
  if (!(v.value() > 0.0)) {
    throw DomainError(std::string(what) + " must be positive, got " + std::to_string(v.value()));
  }
}

// |d rho|^2 / rho^2 and box rho / rho at `order`.
std::pair<Jet, Jet> density_terms(const Field& rho, const Geometry& geo, const Point& q,
                                  int order) {
  const int n = geo.dim();
  const Jet r = rho.jet(q, order + 2);
  require_positive(r, "density");
  const Tensor<Jet> ginv = inverse_metric(metric_jets(geo, q, order));
  const Tensor<Jet> gamma = christoffel_jets(geo, q, order);
  std::vector<Jet> dr(n);
  for (int i = 0; i < n; ++i) dr[i] = r.derivative(i);
  Jet grad2 = zero_jet(q, order);
  Jet box = zero_jet(q, order);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      grad2 += ginv(i, j) * dr[i] * dr[j];
      Jet hess = dr[j].derivative(i);
      for (int k = 0; k < n; ++k) hess -= gamma(k, i, j) * dr[k];
      box += ginv(i, j) * hess;
    }
  const Jet inv = reciprocal(r.truncated(order));
  return {grad2 * inv * inv, box * inv};
}

}  // namespace

Geometry::Geometry(Field metric_, Field phi_) : metric(std::move(metric_)), phi(std::move(phi_)) {
  const int n = phi.components();
  if (metric.components() != n * n) {
    throw GeometryError("metric has " + std::to_string(metric.components()) +
                        " components, expected " + std::to_string(n * n));
  }
  if (metric.dim() != n || phi.dim() != n) {
    throw GeometryError("metric and Weyl vector must live on an " + std::to_string(n) +
                        "-dimensional chart");
  }
}

Field diagonal_metric(const std::vector<int>& signature) {
  const int n = static_cast<int>(signature.size());
  std::vector<double> v(n * n, 0.0);
  for (int i = 0; i < n; ++i) v[i * n + i] = signature[i];
  return Field::constant(n, std::move(v));
}

std::vector<int> spacetime_signature(int n) {
  std::vector<int> s(n, -1);
  s[0] = 1;
  return s;
}

Field block_diagonal(const std::vector<Field>& metrics) {
  std::vector<int> dims;
  int n = 0;
  for (const auto& m : metrics) {
    if (m.components() != m.dim() * m.dim()) throw Error("block is not a metric field");
    dims.push_back(m.dim());
    n += m.dim();
  }
  const Field joined = direct_sum(metrics);
  return joined.map(n * n, [dims, n](const std::vector<Jet>& v) {
    std::vector<Jet> out(n * n, v[0] * 0.0);
    int offset = 0, at = 0;
    for (int d : dims) {
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out[(offset + i) * n + offset + j] = v[at++];
      offset += d;
    }
    return out;
  });
}

Tensor<Jet> metric_jets(const Geometry& geo, const Point& q, int order) {
  const int n = geo.dim();
  Tensor<Jet> g(n, 2);
  g.data() = geo.metric.jets(q, order);
  return g;
}

Tensor<Jet> inverse_metric(const Tensor<Jet>& g) {
  const int n = g.dim();
  Eigen::MatrixXd v(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) v(i, j) = g(i, j).value();
  const double scale = v.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || !v.allFinite()) throw GeometryError("metric is zero or not finite");
  if ((v - v.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw GeometryError("metric is not symmetric");
  }
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(v).singularValues();
  if (!(sv[n - 1] > 0.0) || sv[0] / sv[n - 1] > kMaxCondition) {
    throw GeometryError("metric is degenerate (condition number above 1e12)");
  }
  // Gauss-Jordan on jets, pivoting on values.
  Tensor<Jet> a = g;
  Tensor<Jet> inv(n, 2, Jet(g.flat(0).space(), 0.0));
  for (int i = 0; i < n; ++i) inv(i, i) += 1.0;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col).value()) > std::abs(a(pivot, col).value())) pivot = r;
    }
    if (pivot != col) {
      for (int c = 0; c < n; ++c) {
        std::swap(a(pivot, c), a(col, c));
        std::swap(inv(pivot, c), inv(col, c));
      }
    }
    const Jet scale_row = reciprocal(a(col, col));
    for (int c = 0; c < n; ++c) {
      a(col, c) *= scale_row;
      inv(col, c) *= scale_row;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const Jet f = a(r, col);
      if (f.value() == 0.0 && f.is_constant()) continue;
      for (int c = 0; c < n; ++c) {
        a(r, c) -= f * a(col, c);
        inv(r, c) -= f * inv(col, c);
      }
    }
  }
  return inv;
}

Tensor<Jet> christoffel_jets(const Geometry& geo, const Point& q, int order) {
  return connection(geo, q, order, false);
}

Tensor<Jet> weyl_connection_jets(const Geometry& geo, const Point& q, int order) {
  return connection(geo, q, order, true);
}

Tensor<double> christoffel(const Geometry& geo, const Point& q) {
  return values(christoffel_jets(geo, q, 0));
}

Tensor<double> weyl_connection(const Geometry& geo, const Point& q) {
  return values(weyl_connection_jets(geo, q, 0));
}

Geometry gauge_transform(const Geometry& geo, const Field& lambda) {
  const int n = geo.dim();
  if (lambda.components() != 1 || lambda.dim() != n) {
    throw GeometryError("gauge function must be a scalar on the same chart");
  }
  Field g = geo.metric;
  Field phi = geo.phi;
  Field metric(n, n * n, [g, lambda](const Point& q, int order) {
    const Jet l = lambda.jet(q, order);
    require_positive(l, "gauge function");
    const Jet l2 = l * l;
    std::vector<Jet> out = g.jets(q, order);
    for (auto& c : out) c *= l2;
    return out;
  });
  Field weyl(n, n, [phi, lambda, n](const Point& q, int order) {
    const Jet l = lambda.jet(q, order + 1);
    require_positive(l, "gauge function");
    const Jet inv = reciprocal(l.truncated(order));
    std::vector<Jet> out = phi.jets(q, order);
    for (int i = 0; i < n; ++i) out[i] -= l.derivative(i) * inv;
    return out;
  });
  return Geometry(std::move(metric), std::move(weyl));
}

CurvatureBundle curvature(const Geometry& geo, const Point& q, bool use_weyl_connection) {
  const int n = geo.dim();
  const Tensor<Jet> gamma = connection(geo, q, 1, use_weyl_connection);
  CurvatureBundle b;
  b.riemann = Tensor<double>(n, 4, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double v = gamma(i, l, j).gradient(k) - gamma(i, k, j).gradient(l);
          for (int m = 0; m < n; ++m) {
            v += gamma(i, k, m).value() * gamma(m, l, j).value() -
                 gamma(i, l, m).value() * gamma(m, k, j).value();
          }
          b.riemann(i, j, k, l) = v;
        }
  b.ricci = Tensor<double>(n, 2, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) b.ricci(i, j) += b.riemann(k, i, k, j);
  const Tensor<double> ginv = values(inverse_metric(metric_jets(geo, q, 0)));
  for (int c = 0; c < ginv.size(); ++c) b.scalar += ginv.flat(c) * b.ricci.flat(c);
  const std::vector<Jet> phi = geo.phi.jets(q, 1);
  b.segre = Tensor<double>(n, 2, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b.segre(i, j) = phi[j].gradient(i) - phi[i].gradient(j);
  return b;
}

Jet scalar_curvature_jet(const Geometry& geo, const Point& q, int order,
                         bool use_weyl_connection) {
  const Tensor<Jet> gamma = connection(geo, q, order + 1, use_weyl_connection);
  const Tensor<Jet> ricci = ricci_from(gamma, q, order);
  return trace(inverse_metric(metric_jets(geo, q, order)), ricci);
}

Jet weyl_scalar_curvature_jet(const Geometry& geo, const Point& q, int order) {
  const int n = geo.dim();
  const Jet rg = scalar_curvature_jet(geo, q, order, false);
  const Tensor<Jet> ginv = inverse_metric(metric_jets(geo, q, order));
  const Tensor<Jet> gamma = christoffel_jets(geo, q, order);
  const std::vector<Jet> phi = geo.phi.jets(q, order + 1);
  Jet norm = zero_jet(q, order);
  Jet div = zero_jet(q, order);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      norm += ginv(i, j) * phi[i] * phi[j];
      Jet cov = phi[j].derivative(i);
      for (int k = 0; k < n; ++k) cov -= gamma(k, i, j) * phi[k];
      div += ginv(i, j) * cov;
    }
  return rg - (n - 1.0) * ((n - 2.0) * norm + 2.0 * div);
}

double weyl_scalar_curvature(const Geometry& geo, const Point& q) {
  return weyl_scalar_curvature_jet(geo, q, 0).value();
}

Field weyl_vector_from_density(const Field& rho) {
  const int n = rho.dim();
  if (n <= 2) throw GeometryError("Weyl vector from a density needs n > 2");
  if (rho.components() != 1) throw GeometryError("density must be a scalar field");
  return Field(n, n, [rho, n](const Point& q, int order) {
    const Jet r = rho.jet(q, order + 1);
    require_positive(r, "density");
    const Jet scale = reciprocal(r.truncated(order)) * (1.0 / (n - 2.0));
    std::vector<Jet> out(n);
    for (int i = 0; i < n; ++i) out[i] = r.derivative(i) * scale;
    return out;
  });
}

double density_coefficient(int n) {
  if (n <= 2) throw GeometryError("density coefficient needs n > 2");
  return (n - 1.0) / (n - 2.0);
}

double printed_density_coefficient(int n) { return (n - 1.0) / (n + 2.0); }

Jet weyl_curvature_from_density_jet(const Field& rho, const Geometry& geo, const Point& q,
                                    int order, double coefficient) {
  const int n = geo.dim();
  if (coefficient == 0.0) coefficient = density_coefficient(n);
  const Jet rg = scalar_curvature_jet(geo, q, order, false);  // highest metric order first
  auto [grad2, box] = density_terms(rho, geo, q, order);
  return rg + coefficient * (grad2 - 2.0 * box);
}

double weyl_curvature_from_density(const Field& rho, const Geometry& geo, const Point& q,
                                   double coefficient) {
  return weyl_curvature_from_density_jet(rho, geo, q, 0, coefficient).value();
}

double density_bracket(const Field& rho, const Geometry& geo, const Point& q) {
  auto [grad2, box] = density_terms(rho, geo, q, 0);
  return grad2.value() - 2.0 * box.value();
}

double fitted_density_coefficient(const Field& rho, const Geometry& geo, const Point& q) {
  const Geometry from_rho(geo.metric, weyl_vector_from_density(rho));
  const double rw = weyl_scalar_curvature(from_rho, q);
  const double rg = scalar_curvature_jet(geo, q, 0).value();
  return (rw - rg) / density_bracket(rho, geo, q);
}

WeightedTensor co_covariant_derivative(const WeightedField& t, const Geometry& geo,
                                       const Point& q) {
  const int n = geo.dim();
  const int rank = static_cast<int>(t.variance.size());
  Tensor<Jet> comps(n, rank);
  if (t.components.components() != comps.size()) {
    throw GeometryError("weighted field has the wrong number of components");
  }
  comps.data() = t.components.jets(q, 1);
  const Tensor<double> gamma = weyl_connection(geo, q);
  const Eigen::VectorXd phi = geo.phi.values(q);

  WeightedTensor out;
  out.variance = t.variance;
  out.variance.insert(out.variance.begin(), Variance::Down);
  out.weight = t.weight;
  out.components = Tensor<double>(n, rank + 1, 0.0);
  for (int c = 0; c < out.components.size(); ++c) {
    std::vector<int> idx = out.components.unflatten(c);
    const int i = idx[0];
    std::vector<int> a(idx.begin() + 1, idx.end());
    auto flat = [&](const std::vector<int>& v) {
      int k = 0;
      for (int x : v) k = k * n + x;
      return k;
    };
    const int base = flat(a);
    double v = comps.flat(base).gradient(i) + t.weight * phi[i] * comps.flat(base).value();
    for (int s = 0; s < rank; ++s) {
      std::vector<int> b = a;
      for (int m = 0; m < n; ++m) {
        b[s] = m;
        const double tm = comps.flat(flat(b)).value();
        if (t.variance[s] == Variance::Up) {
          v += gamma(a[s], i, m) * tm;
        } else {
          v -= gamma(m, i, a[s]) * tm;
        }
      }
    }
    out.components.flat(c) = v;
  }
  return out;
}

WeightedField gauge_transform(const WeightedField& t, const Field& lambda) {
  WeightedField out = t;
  out.components = scale_by_power(t.components, lambda, t.weight);
  return out;
}

WeightedField metric_field(const Geometry& geo) {
  return {geo.metric, {Variance::Down, Variance::Down}, 2};
}

Eigen::VectorXd parallel_transport(const Geometry& geo, const Point& q0,
                                   const Eigen::VectorXd& a, const Eigen::VectorXd& dq,
                                   int steps) {
  const int n = geo.dim();
  auto rhs = [&](double t, const Eigen::VectorXd& v) {
    const Tensor<double> gamma = weyl_connection(geo, q0 + t * dq);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) out[i] -= gamma(i, j, k) * v[j] * dq[k];
    return out;
  };
  Eigen::VectorXd v = a;
  const double h = 1.0 / steps;
  for (int s = 0; s < steps; ++s) {
    const double t = s * h;
    const Eigen::VectorXd k1 = rhs(t, v);
    const Eigen::VectorXd k2 = rhs(t + h / 2, v + h / 2 * k1);
    const Eigen::VectorXd k3 = rhs(t + h / 2, v + h / 2 * k2);
    const Eigen::VectorXd k4 = rhs(t + h, v + h * k3);
    v += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return v;
}

double squared_length(const Geometry& geo, const Point& q, const Eigen::VectorXd& a) {
  const int n = geo.dim();
  const Eigen::VectorXd g = geo.metric.values(q);
  double l = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) l += g[i * n + j] * a[i] * a[j];
  return l;
}

}  // namespace cqg::weyl
