#pragma once

// Rotation and proper Lorentz group machinery in the SL(2,C) picture.
//
// Chart (fixed once):
//   rotation mode  y = (alpha, beta, gamma)
//                  Lambda(y) = Rz(alpha) Ry(beta) Rz(gamma)
//   lorentz mode   y = (alpha, beta, gamma, phi, theta, chi)
//                  Lambda(y) = B(ytilde) Rz(gamma),
//                  B(ytilde) = Rz(alpha) Ry(beta) H(chi, theta, phi)
// with Rz(t) = diag(e^{-it/2}, e^{it/2}), Ry(b) = [[cos b/2, -sin b/2],
// [sin b/2, cos b/2]] and H = cosh(chi/2) + sinh(chi/2) n.sigma, n the unit
// vector at polar angle theta and azimuth phi. The coset coordinates are
// ytilde = (alpha, beta) or (alpha, beta, phi, theta, chi); gamma is the
// fiber angle, determined by the group element modulo 4 pi.
//
// Factorization conventions: alpha in (-pi, pi], beta in [0, pi],
// alpha = 0 when beta = 0, theta and phi = 0 when chi = 0, phi = 0 when
// theta is 0 or pi, gamma in (-2 pi, 2 pi].

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

#include "cqg/field.hpp"

namespace cqg::harmonics {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

enum class Mode { Rotation, Lorentz };

int chart_dim(Mode mode);     // 3 or 6
int coset_dim(Mode mode);     // 2 or 5
int algebra_dim(Mode mode);   // 3 or 6
/// Position of gamma in the chart coordinates.
constexpr int kGammaIndex = 2;

Mat2 rz(double angle);
Mat2 ry(double angle);
Mat2 boost(double chi, double theta, double phi);

struct GroupElement {
  Mat2 sl2 = Mat2::Identity();

  GroupElement() = default;
  explicit GroupElement(Mat2 m);
  /// Lambda^mu_nu = tr(sigma_mu A sigma_nu A^dagger) / 2.
  Eigen::Matrix4d lorentz4() const;
  GroupElement operator*(const GroupElement& rhs) const { return GroupElement(sl2 * rhs.sl2); }
  GroupElement inverse() const;
};

GroupElement from_euler(std::span<const double> y, Mode mode);
GroupElement representative_boost(std::span<const double> ytilde, Mode mode);

struct Factorization {
  Eigen::VectorXd ytilde;
  double gamma = 0.0;
};

/// Solve g = B(ytilde) Rz(gamma).
Factorization factorize(const GroupElement& g, Mode mode);

/// Chart coordinates y of g (ytilde and gamma interleaved per the chart).
Eigen::VectorXd to_euler(const GroupElement& g, Mode mode);

/// (ytilde', gamma') with Lambda_bar B(ytilde) = B(ytilde') Rz(gamma').
Factorization left_translation(const GroupElement& lambda_bar, std::span<const double> ytilde,
                               Mode mode);

/// gamma' from Rz(gamma') = B(ytilde')^{-1} Lambda_bar B(ytilde).
double wigner_rotation(const GroupElement& lambda_bar, std::span<const double> ytilde, Mode mode);

/// Residual max-norm of Lambda_bar B(ytilde) - B(ytilde') Rz(gamma').
double left_translation_residual(const GroupElement& lambda_bar, std::span<const double> ytilde,
                                 const Factorization& result, Mode mode);

/// Representation label (u, v) stored as (2u, 2v).
struct RepLabel {
  int two_u = 0;
  int two_v = 0;
  int dim() const { return (two_u + 1) * (two_v + 1); }
};

/// Symmetric 2j-fold power of a 2x2 matrix; index k = 0..2j is m = j - k.
Eigen::MatrixXcd symmetric_power(const Mat2& a, int two_j);

/// D^{(u,0)} = Sym^{2u}(A), D^{(0,v)} = Sym^{2v}((A^dagger)^{-1}),
/// D^{(u,v)} = D^{(u,0)} (x) D^{(0,v)}. Labels beyond dimension 25 or
/// u, v > 2 are rejected.
Eigen::MatrixXcd wigner_D(const RepLabel& label, const GroupElement& g);

/// Right-invariant Maurer-Cartan components d_a Lambda Lambda^{-1}
/// = sum_m (-i omega^m + zeta^m) sigma_m / 2, stored as
/// K(a, m) = (omega^1, omega^2, omega^3, zeta^1, zeta^2, zeta^3)
/// (rotation mode keeps omega only). They do not depend on gamma.
struct KillingData {
  Eigen::MatrixXd K;             // chart_dim x algebra_dim
  Eigen::MatrixXd group_metric;  // K g_mn K^T
};

/// g_mn = diag(1,1,1,-1,-1,-1), or the 3x3 identity in rotation mode.
Eigen::MatrixXd algebra_metric(Mode mode);

/// Killing data at a chart point. ChartError when K is singular there
/// (beta = 0 or pi, chi = 0, theta = 0 or pi).
KillingData killing_data(std::span<const double> y, Mode mode);

/// K(a, m) as a chart_dim * algebra_dim component field (row-major).
Field killing_field(Mode mode);
/// g_ab as a chart_dim^2 component field.
Field group_metric_field(Mode mode);

/// Metric on the (x, y) chart: g_x block-diagonally joined with
/// `group_scale` times the group metric.
Field configuration_metric(const Field& spacetime_metric, Mode mode, double group_scale);

/// Covector on spacetime x group chart:
/// A_h = (e/c) (A_mu(x), K_a^m(y) F_m(x)).
/// A_mu has nx components on an nx-dimensional chart; F has algebra_dim
/// components ordered (H, E) on the same chart. The result lives on the
/// (nx + chart_dim)-dimensional chart (x, y).
Field assemble_internal_field(const Field& A_mu, const Field& F, Mode mode,
                              double charge_over_c = 1.0);

/// Characters e^{i s gamma} of the fiber rotation.
Complex fiber_character(int two_s, double gamma);

/// Basis functions of the quotient expansion at ytilde:
/// undotted f_p = D^{(0,s)}[B^{-1}]^s_p, dotted g_p = D^{(s,0)}[B^{-1}]^s_p,
/// p = s - k for k = 0..2s.
Eigen::VectorXcd undotted_basis(std::span<const double> ytilde, int two_s, Mode mode);
Eigen::VectorXcd dotted_basis(std::span<const double> ytilde, int two_s, Mode mode);

struct QuadratureOptions {
  int legendre_nodes = 32;   // in cos(beta)
  int azimuth_nodes = 32;    // trapezoid in alpha
  int lorentz_samples = 0;   // 0: 12 * (number of unknowns)
  std::uint64_t seed = 1;
  double band_limit_tolerance = 1e-8;
};

struct QuotientExpansion {
  int two_s = 0;
  Mode mode = Mode::Rotation;
  Eigen::VectorXcd undotted;  // psi^p
  Eigen::VectorXcd dotted;    // psi^pdot (empty in rotation mode and for s = 0)
  double residual = 0.0;      // relative RMS misfit on the sample set
  bool band_limited = true;
};

/// Expand Phi(ytilde) for fixed x. Rotation mode integrates against the
/// Haar measure on the sphere (Gauss-Legendre in cos beta, trapezoid in
/// alpha); the dotted and undotted bases coincide there (B is unitary), so
/// a single block is returned. Lorentz mode solves least squares on sampled
/// coset points and returns both blocks (one block when s = 0).
QuotientExpansion quotient_expand(const std::function<Complex(std::span<const double>)>& phi,
                                  int two_s, Mode mode, const QuadratureOptions& options = {});

/// Expansion of a 2-component (re, im) field on (x, ytilde) at fixed x.
QuotientExpansion quotient_expand(const Field& phi, const Point& x, int two_s, Mode mode,
                                  const QuadratureOptions& options = {});

Complex quotient_reconstruct(const QuotientExpansion& e, std::span<const double> ytilde);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace cqg::harmonics
