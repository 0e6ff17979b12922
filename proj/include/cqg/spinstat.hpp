#pragma once

// Exchange of identical particles. Each particle carries q = (x, ytilde,
// gamma); x and ytilde are exchanged naturally, the fiber angles only by
// counterclockwise continuation (gamma1 -> gamma2, gamma2 -> gamma1 + 2 pi
// for gamma2 > gamma1), which is where the factor (-1)^{2s} comes from.
//
// Coefficients Phi_{p1..pN}(x1, ..., xN) are complex fields on the joint
// x chart with 2 d^N components, d = 2s + 1: component 2 k + {0, 1} holds
// (re, im) of the multi-index k = k1 d^{N-1} + ... + kN, where p = s - k.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cqg/field.hpp"
#include "cqg/harmonics.hpp"
#include "cqg/rng.hpp"

namespace cqg::spinstat {

using Complex = std::complex<double>;
using harmonics::Mode;

struct ParticleConfig {
  Eigen::VectorXd x;
  Eigen::VectorXd ytilde;
  double gamma = 0.0;
};

struct SpinBlock {
  int two_s = 0;
  int particles = 2;
  int nx = 0;  // spacetime coordinates per particle
  Mode mode = Mode::Rotation;
  Field undotted;  // Phi_{p1..pN}
  Field dotted;    // optional; empty when absent

  int index_dim() const { return two_s + 1; }
  /// Error unless both blocks have the shape described above.
  void validate() const;
};

/// (gamma1, gamma2) -> (gamma2, gamma1 + 2 pi). Requires gamma1 < gamma2 <=
/// gamma1 + 2 pi (beyond that gamma2 would have to move clockwise).
std::pair<double, double> gamma_exchange(double gamma1, double gamma2);

/// The rule for arbitrary distinct angles: equal angles are rejected, the
/// mirrored form (gamma1 -> gamma2 + 2 pi, gamma2 -> gamma1) handles
/// gamma1 > gamma2, and separations beyond 2 pi are first brought into
/// range by a 4 pi lift, which is the identity on SL(2, C).
std::pair<double, double> exchange_angles(double gamma1, double gamma2);

/// Both angles non-decreasing from `before` to `after`.
bool monotone_feasible(std::pair<double, double> before, std::pair<double, double> after);

/// e^{is(g1' + g2')} / e^{is(g1 + g2)} for the exchange rule, returned as
/// an exact +1 or -1. s = two_s / 2 must be one of 0, 1/2, ..., 2.
int exchange_phase(int two_s);

/// Psi = e^{is sum gamma} [sum_p prod_h D^{(0,s)}[B^-1(ytilde_h)]^s_{p_h} Phi_p(x)
///        + the same with D^{(s,0)} and the dotted block].
Complex scalar_psi(const SpinBlock& block, std::span<const ParticleConfig> q);
Complex two_particle_psi(const SpinBlock& block, const ParticleConfig& q1,
                         const ParticleConfig& q2);

/// Phi_p(x) = (1/N!) sum_sigma sign^{parity sigma} F_{sigma p}(sigma x): a block
/// of declared class `sign` (+1 symmetric, -1 antisymmetric under joint
/// index and argument permutation).
Field symmetrize(const Field& F, int two_s, int particles, int nx, int sign);

/// Parity of a permutation of 0..N-1 (0 even, 1 odd). Error on malformed input.
int permutation_parity(std::span<const int> perm);

enum class Decomposition { Adjacent, Cycles };

/// Slot swaps turning the identity arrangement into `perm` (slot h ends up
/// holding particle perm[h]). Adjacent yields bubble-sort transpositions,
/// Cycles one transposition per non-fixed element of each cycle but one.
std::vector<std::pair<int, int>> transpositions(std::span<const int> perm, Decomposition kind);

/// Applies the swaps in order; every swap exchanges x and ytilde naturally
/// and the fiber angles with exchange_angles.
std::vector<ParticleConfig> apply_exchanges(std::vector<ParticleConfig> q,
                                            std::span<const std::pair<int, int>> swaps);

struct VerifyOptions {
  int samples = 1000;
  std::uint64_t seed = 1;
  double tolerance = 1e-10;
  double x_half_width = 1.0;
  /// Applied to every sampled particle before evaluation (e.g. a global
  /// left translation of the group coordinates).
  std::function<ParticleConfig(const ParticleConfig&)> transform;
};

struct ExchangeReport {
  int two_s = 0;
  int particles = 2;
  std::vector<int> permutation;
  int transpositions = 0;
  int phase_expected = 1;        // (-1)^{2 k_p s}
  double phase_observed = 0.0;   // least-squares sign of Phi_p(x) against Phi_{pp}(px)
  double max_residual = 0.0;     // max |Psi(q) - Psi(exchanged q)| / max(1, |Psi(q)|)
  double phi_residual = 0.0;     // max coefficient-level violation of the symmetry class
  bool decomposition_independent = true;
  bool passed = false;
  int samples = 0;
  std::optional<std::vector<ParticleConfig>> counterexample;
};

/// Random configuration: x in the box, ytilde away from chart
/// singularities, gamma in [0, 4 pi).
ParticleConfig random_particle(CounterRng& rng, Mode mode, int nx, double x_half_width = 1.0);

/// Two-particle check: Psi(q1, q2) = Psi(q2, q1) with the gamma rule.
ExchangeReport verify_exchange(const SpinBlock& block, const VerifyOptions& options = {});

/// Psi(q) = Psi(p(q)) for a permutation realized as k_p exchanges; both
/// decompositions are evaluated and must agree.
ExchangeReport n_particle_verify(const SpinBlock& block, std::span<const int> perm,
                                 const VerifyOptions& options = {});

}  // namespace cqg::spinstat
