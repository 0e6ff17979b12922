#pragma once

// Field-equation residuals for (rho, S, A), the ansatz Psi = sqrt(rho) e^{iS/hbar}
// and the wave equation it linearizes to.
//
// Conventions: P_k = d_k S - A_k; minimal coupling D_k = nabla_k - (i/hbar) A_k.
//   hj          = P.P + hbar^2 xi^2 R_W[rho]                       weight -2
//   continuity  = nabla_k (rho P^k)                                 weight -n
//   wave        = hbar^2 D_k D^k Psi - hbar^2 xi^2 R_g Psi          weight -(n+2)/2
// and for every smooth state
//   wave / Psi  = -hj + i hbar continuity / rho.
// Only the metric of the geometry is used; rho fixes the Weyl vector.

#include <complex>
#include <vector>

#include "cqg/field.hpp"
#include "cqg/weyl.hpp"

namespace cqg::madelung {

using Complex = std::complex<double>;

struct Couplings {
  double hbar = 1.0;
  double charge_over_c = 1.0;
};

/// xi = sqrt((n-2) / (4(n-1))).
double xi_coefficient(int n);

struct State {
  Field rho;  // scalar, weight -(n-2)
  Field S;    // scalar, weight 0
  Field A;    // n components, weight 0
};

/// rho -> lambda^{-(n-2)} rho; S and A are unchanged.
State gauge_transform(const State& state, const Field& lambda);

double hj_residual(const State& state, const weyl::Geometry& geo, const Point& q,
                   const Couplings& c = {});
double continuity_residual(const State& state, const weyl::Geometry& geo, const Point& q,
                           const Couplings& c = {});
/// J^i = rho P^i sqrt|det g|.
Eigen::VectorXd current_density(const State& state, const weyl::Geometry& geo, const Point& q);

/// Complex scalar field stored as two real components (re, im).
struct Wavefunction {
  Field psi;
  Complex value(const Point& q) const;
};

Wavefunction ansatz_compose(const State& state, const Couplings& c = {});

/// How S = hbar (arg Psi + 2 pi k) picks k.
struct BranchPolicy {
  enum class Kind { Principal, Continuation };
  Kind kind = Kind::Principal;
  /// Continuation: phase at `anchor` is `anchor_phase`; k at q follows the
  /// straight segment from the anchor.
  Point anchor;
  double anchor_phase = 0.0;
  int segments = 256;
};

/// rho = |Psi|^2 and S from the branch policy; A is passed through. Zeros of
/// Psi raise DomainError naming the point.
State ansatz_decompose(const Wavefunction& psi, const Field& A, const BranchPolicy& branch,
                       const Couplings& c = {});

/// Unwrapped phase of Psi along a sampled path, starting from the principal
/// value at path[0]; consecutive samples must differ by less than pi.
std::vector<double> continue_phase(const Wavefunction& psi, const std::vector<Point>& path);

Complex wave_residual(const Wavefunction& psi, const Field& A, const weyl::Geometry& geo,
                      const Point& q, const Couplings& c = {});

struct Equivalence {
  double real_gap = 0.0;  // |Re(wave/Psi) + hj|
  double imag_gap = 0.0;  // |Im(wave/Psi) - hbar continuity/rho|
  Complex ratio;          // wave / Psi
  double hj = 0.0;
  double continuity = 0.0;
};

Equivalence madelung_equivalence(const State& state, const weyl::Geometry& geo, const Point& q,
                                 const Couplings& c = {});

/// hbar^2 xi^2 (R_W - R_g) + hbar^2 box(sqrt rho) / sqrt rho.
double quantum_potential_gap(const Field& rho, const weyl::Geometry& geo, const Point& q,
                             const Couplings& c = {});

}  // namespace cqg::madelung
