#pragma once

// Weyl geometry on an n-dimensional chart.
//
// Conventions (fixed once, used everywhere):
//   Gamma(i, j, k)      = Gamma^i_jk
//   R^i_jkl             = d_k Gamma^i_lj - d_l Gamma^i_kj
//                         + Gamma^i_km Gamma^m_lj - Gamma^i_lm Gamma^m_kj
//   R_ij                = R^k_ikj,   R = g^ij R_ij
// so the unit 2-sphere has R = +2. The Weyl connection is
//   Gamma^i_jk = LC^i_jk + delta^i_j phi_k + delta^i_k phi_j - g_jk phi^i,
// the Levi-Civita connection of e^{2f} g when phi = df. Under a gauge
// function lambda > 0: g -> lambda^2 g, phi_i -> phi_i - d_i lambda / lambda.

#include <Eigen/Dense>
#include <vector>

#include "cqg/field.hpp"
#include "cqg/tensor.hpp"

namespace cqg::weyl {

struct Geometry {
  Field metric;  // n*n components g_ij, row-major, weight +2
  Field phi;     // n components phi_i

  Geometry() = default;
  Geometry(Field metric, Field phi);
  int dim() const { return phi.components(); }
};

/// Diagonal metric with the given signs, e.g. {+1, -1, -1, -1}.
Field diagonal_metric(const std::vector<int>& signature);
/// Spacetime block (+, -, ..., -) in n dimensions.
std::vector<int> spacetime_signature(int n);
/// Metrics on separate charts combined block-diagonally on the product chart.
Field block_diagonal(const std::vector<Field>& metrics);

/// Metric and inverse-metric jets; the inverse is rejected when the metric
/// is not symmetric or its condition number exceeds 1e12.
Tensor<Jet> metric_jets(const Geometry& geo, const Point& q, int order);
Tensor<Jet> inverse_metric(const Tensor<Jet>& g);

Tensor<Jet> christoffel_jets(const Geometry& geo, const Point& q, int order);
Tensor<Jet> weyl_connection_jets(const Geometry& geo, const Point& q, int order);
Tensor<double> christoffel(const Geometry& geo, const Point& q);
Tensor<double> weyl_connection(const Geometry& geo, const Point& q);

/// Field-level gauge map (g, phi) -> (lambda^2 g, phi - dlambda/lambda).
/// Non-positive lambda raises DomainError where it is evaluated.
Geometry gauge_transform(const Geometry& geo, const Field& lambda);

struct CurvatureBundle {
  Tensor<double> riemann;  // R^i_jkl
  Tensor<double> ricci;    // R_ij = R^k_ikj
  Tensor<double> segre;    // W_ij = d_i phi_j - d_j phi_i
  double scalar = 0.0;     // g^ij R_ij
};

CurvatureBundle curvature(const Geometry& geo, const Point& q, bool use_weyl_connection);

/// Scalar curvature of the Levi-Civita (or Weyl) connection, to `order`.
Jet scalar_curvature_jet(const Geometry& geo, const Point& q, int order,
                         bool use_weyl_connection = false);

/// R_W = R_g - (n-1)[(n-2) phi.phi + 2 div phi]; weight -2.
Jet weyl_scalar_curvature_jet(const Geometry& geo, const Point& q, int order);
double weyl_scalar_curvature(const Geometry& geo, const Point& q);

/// phi_i = d_i rho / ((n-2) rho), a closed one-form.
Field weyl_vector_from_density(const Field& rho);

/// Coefficient C(n) in R_W = R_g + C(n) [d rho.d rho / rho^2 - 2 box rho / rho]
/// obtained by substituting phi(rho) into R_W: (n-1)/(n-2).
double density_coefficient(int n);
/// The value (n-1)/(n+2) as printed in the source formula, kept for reports.
double printed_density_coefficient(int n);

/// R_g + C [ |d rho|^2 / rho^2 - 2 box rho / rho ] using the metric of `geo`
/// (its phi is ignored). `coefficient` defaults to density_coefficient(n).
Jet weyl_curvature_from_density_jet(const Field& rho, const Geometry& geo, const Point& q,
                                    int order, double coefficient = 0.0);
double weyl_curvature_from_density(const Field& rho, const Geometry& geo, const Point& q,
                                   double coefficient = 0.0);

/// The bracket |d rho|^2 / rho^2 - 2 box rho / rho multiplying C(n).
double density_bracket(const Field& rho, const Geometry& geo, const Point& q);

/// Coefficient recovered from the two-path values at q:
/// (R_W[phi(rho)] - R_g) / bracket.
double fitted_density_coefficient(const Field& rho, const Geometry& geo, const Point& q);

enum class Variance { Up, Down };

/// Tensor field with index positions and Weyl weight w(T).
struct WeightedField {
  Field components;  // dim^rank components, row-major
  std::vector<Variance> variance;
  int weight = 0;
};

struct WeightedTensor {
  Tensor<double> components;
  std::vector<Variance> variance;
  int weight = 0;
};

/// D_i T = Weyl-covariant derivative of T + w(T) phi_i T. The derivative
/// index comes first; the weight is unchanged.
WeightedTensor co_covariant_derivative(const WeightedField& t, const Geometry& geo,
                                       const Point& q);

/// T -> lambda^w T, the companion of gauge_transform for weighted fields.
WeightedField gauge_transform(const WeightedField& t, const Field& lambda);

/// The metric as a weight +2 covariant field.
WeightedField metric_field(const Geometry& geo);

/// Transport a^i along q(t) = q0 + t dq, t in [0, 1], with the Weyl
/// connection (RK4, `steps` steps): da^i/dt = -Gamma^i_jk a^j dq^k.
Eigen::VectorXd parallel_transport(const Geometry& geo, const Point& q0,
                                   const Eigen::VectorXd& a, const Eigen::VectorXd& dq,
                                   int steps);

/// l = g_ij a^i a^j, the weight +2 squared length that obeys dl = -2 l phi.dq.
double squared_length(const Geometry& geo, const Point& q, const Eigen::VectorXd& a);

}  // namespace cqg::weyl
