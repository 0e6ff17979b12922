#pragma once

// Complete figure: the bundle of curves transversal to the surfaces
// S = const, generated by the homogeneous Lagrangian
//   L*(q, qdot) = sqrt(M g_ij qdot^i qdot^j) + A_i qdot^i,   M = -kappa R_W.
// kappa = 1 is the bare form; from_density() picks kappa = hbar^2 xi^2 so
// that the mass shell g^ij (p - A)_i (p - A)_j = M is the Hamilton-Jacobi
// equation of the field theory and solution gradients generate the bundle.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "cqg/field.hpp"

namespace cqg::figure {

struct Background {
  Field metric;  // n*n components
  Field rw;      // Weyl scalar curvature R_W
  Field A;       // n components
  double coupling = 1.0;

  int dim() const { return A.dim(); }
};

Background from_curvature(Field metric, Field rw, Field A, double coupling = 1.0);

/// R_W from rho through phi = d rho / ((n-2) rho); kappa = hbar^2 xi^2.
Background from_density(Field metric, Field rho, Field A, double hbar = 1.0);

/// (g, R_W, A) -> (lambda^2 g, lambda^-2 R_W, A).
Background gauge_transform(const Background& bg, const Field& lambda);

/// M = -kappa R_W at q.
double mass(const Background& bg, const Point& q);

/// ConeError when M g(qdot, qdot) < 0.
double homogeneous_lagrangian(const Background& bg, const Point& q, const Eigen::VectorXd& qdot);

/// p_i = M g_ij qdot^j / sqrt(M g qdot qdot) + A_i. ConeError unless the
/// radicand is positive.
Eigen::VectorXd conjugate_momenta(const Background& bg, const Point& q,
                                  const Eigen::VectorXd& qdot);

/// Solve g^ij (p - A)_i (p - A)_j = M for p[component], taking the root
/// whose (p - A)[component] has the sign of `p[component] - A[component]`
/// (positive when that is zero). ConeError when no real root exists.
Eigen::VectorXd complete_on_shell(const Background& bg, const Point& q, Eigen::VectorXd p,
                                  int component);

struct Sample {
  double tau = 0.0;
  Eigen::VectorXd q, qdot, p;
  Eigen::VectorXd p_conjugate;  // from L*, for comparison with p
  double radicand = 0.0;        // M g(qdot, qdot)
  double lagrangian = 0.0;
};

struct Trajectory {
  std::vector<Sample> samples;
  double max_hj_residual = 0.0;  // max |g^ij P_i P_j - M| (gradient mode)
  bool hj_warning = false;       // residual above IntegrationOptions::hj_tolerance
};

struct IntegrationOptions {
  double tau0 = 0.0;
  double tau1 = 1.0;
  int steps = 1000;
  /// Optional positive rescaling of the velocity, qdot -> f(tau) qdot.
  std::function<double(double)> speed;
  double hj_tolerance = 1e-6;
};

/// Gradient flow qdot = c g^-1 (dS - A), c = sign(M) / sqrt(M P.P), which
/// normalizes the radicand to 1. Records p = dS. Fixed-step RK4.
Trajectory integrate_trajectory(const Field& S, const Background& bg, const Point& q0,
                                const IntegrationOptions& options = {});

/// Characteristics of H = sign(M) [(p - A) g^-1 (p - A) - M] / 2 from (q0, p0).
/// Needs first derivatives of g, A and R_W; p is the integrated momentum.
Trajectory integrate_characteristics(const Background& bg, const Point& q0,
                                     const Eigen::VectorXd& p0,
                                     const IntegrationOptions& options = {});

/// One gradient-flow trajectory per initial point, integrated concurrently.
std::vector<Trajectory> integrate_bundle(const Field& S, const Background& bg,
                                         const std::vector<Point>& initial,
                                         const IntegrationOptions& options = {});

/// Integral of L* over the samples (composite Simpson, 3/8 rule on the tail
/// for an odd number of intervals).
double action_increment(const Trajectory& t);

struct HelicityRecord {
  double s = 0.0;
  std::vector<double> p_gamma;
  double max_deviation = 0.0;  // max |p_gamma - hbar s|
};

/// p_gamma along the curve. s is `expected_s` when given, otherwise read
/// from the first sample. Error when gamma_index is outside the chart.
HelicityRecord intrinsic_helicity(const Trajectory& t, int gamma_index, double hbar = 1.0,
                                  std::optional<double> expected_s = std::nullopt);

/// Columns tau, q_i, p_i, [p_gamma,] radicand, lagrangian.
void write_csv(const Trajectory& t, std::ostream& out, int gamma_index = -1);

}  // namespace cqg::figure
