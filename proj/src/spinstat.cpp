#include "cqg/spinstat.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <numeric>
#include <thread>

#include "cqg/errors.hpp"

namespace cqg::spinstat {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

int power(int base, int exp) {
  int out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

// Digits of k in base d, most significant first.
std::vector<int> digits(int k, int d, int n) {
  std::vector<int> out(n);
  for (int h = n - 1; h >= 0; --h) {
    out[h] = k % d;
    k /= d;
  }
  return out;
}

int number(std::span<const int> digit, int d) {
  int k = 0;
  for (int v : digit) k = k * d + v;
  return k;
}

// Multi-index k permuted as (pi k)_h = k_{perm[h]}.
int permuted_index(int k, std::span<const int> perm, int d) {
  const int n = static_cast<int>(perm.size());
  const std::vector<int> dk = digits(k, d, n);
  std::vector<int> out(n);
  for (int h = 0; h < n; ++h) out[h] = dk[perm[h]];
  return number(out, d);
}

Eigen::VectorXd joint_x(std::span<const ParticleConfig> q) {
  Eigen::Index size = 0;
  for (const auto& p : q) size += p.x.size();
  Eigen::VectorXd out(size);
  Eigen::Index at = 0;
  for (const auto& p : q) {
    out.segment(at, p.x.size()) = p.x;
    at += p.x.size();
  }
  return out;
}

Complex block_sum(const Field& phi, const std::vector<Eigen::VectorXcd>& basis,
                  const Eigen::VectorXd& x, int d) {
  const int n = static_cast<int>(basis.size());
  const Eigen::VectorXd v = phi.values(x);
  const int count = power(d, n);
  Complex out = 0.0;
  for (int k = 0; k < count; ++k) {
    const Complex c(v[2 * k], v[2 * k + 1]);
    if (c == 0.0) continue;
    Complex prod = c;
    int rest = k;
    for (int h = n - 1; h >= 0; --h) {
      prod *= basis[h][rest % d];
      rest /= d;
    }
    out += prod;
  }
  return out;
}

std::vector<int> identity(int n) {
  std::vector<int> out(n);
  std::iota(out.begin(), out.end(), 0);
  return out;
}

void check_permutation(std::span<const int> perm) {
  const int n = static_cast<int>(perm.size());
  if (n == 0) throw Error("empty permutation");
  std::vector<char> seen(n, 0);
  for (int v : perm) {
    if (v < 0 || v >= n || seen[v]) throw Error("malformed permutation");
    seen[v] = 1;
  }
}

struct SampleResult {
  double residual = 0.0;
  double decomposition_gap = 0.0;
  double phi_residual = 0.0;
  Complex num = 0.0;
  double den = 0.0;
  bool phase_ok = true;
  std::vector<ParticleConfig> config;
};

}  // namespace

void SpinBlock::validate() const {
  if (two_s < 0 || two_s > 4) throw Error("spin s must be one of 0, 1/2, ..., 2");
  if (particles < 1 || particles > 5) throw Error("particle count must be between 1 and 5");
  if (nx < 1) throw Error("each particle needs at least one spacetime coordinate");
  const int comps = 2 * power(index_dim(), particles);
  for (const Field* f : {&undotted, &dotted}) {
    if (f == &dotted && f->empty()) continue;
    if (f->empty()) throw Error("undotted coefficient block is missing");
    if (f->dim() != particles * nx || f->components() != comps) {
      throw Error("coefficient block has shape (" + std::to_string(f->dim()) + " coordinates, " +
                  std::to_string(f->components()) + " components), expected (" +
                  std::to_string(particles * nx) + ", " + std::to_string(comps) + ")");
    }
  }
}

std::pair<double, double> gamma_exchange(double gamma1, double gamma2) {
  if (!(gamma2 > gamma1)) throw Error("gamma exchange needs gamma2 > gamma1");
  if (gamma2 - gamma1 > kTwoPi) {
    throw Error("gamma2 - gamma1 exceeds 2 pi: gamma2 -> gamma1 + 2 pi would run clockwise");
  }
  return {gamma2, gamma1 + kTwoPi};
}

std::pair<double, double> exchange_angles(double gamma1, double gamma2) {
  const double lift = 2 * kTwoPi * std::floor((gamma2 - gamma1 + kTwoPi) / (2 * kTwoPi));
  const double g1 = gamma1 + lift;  // gamma2 - g1 in [-2 pi, 2 pi)
  if (g1 == gamma2) throw Error("coincident fiber angles cannot be exchanged");
  if (gamma2 > g1) return gamma_exchange(g1, gamma2);
  const auto [b, a] = gamma_exchange(gamma2, g1);
  return {a, b};
}

bool monotone_feasible(std::pair<double, double> before, std::pair<double, double> after) {
  return after.first >= before.first && after.second >= before.second;
}

int exchange_phase(int two_s) {
  if (two_s < 0 || two_s > 4) throw Error("spin s must be one of 0, 1/2, 1, 3/2, 2");
  const double g1 = 0.3, g2 = 1.2;
  const auto [a, b] = gamma_exchange(g1, g2);
  const Complex before = harmonics::fiber_character(two_s, g1) * harmonics::fiber_character(two_s, g2);
  const Complex after = harmonics::fiber_character(two_s, a) * harmonics::fiber_character(two_s, b);
  const Complex ratio = after / before;
  if (std::abs(ratio - 1.0) < 1e-12) return 1;
  if (std::abs(ratio + 1.0) < 1e-12) return -1;
  throw Error("exchange phase is not +-1");
}

Complex scalar_psi(const SpinBlock& block, std::span<const ParticleConfig> q) {
  if (static_cast<int>(q.size()) != block.particles) {
    throw Error("expected " + std::to_string(block.particles) + " particle configurations");
  }
  const int d = block.index_dim();
  const int ny = harmonics::coset_dim(block.mode);
  double gamma = 0.0;
  std::vector<Eigen::VectorXcd> up, down;
  for (const auto& p : q) {
    if (p.x.size() != block.nx || p.ytilde.size() != ny) {
      throw Error("particle configuration has the wrong dimensions");
    }
    gamma += p.gamma;
    const std::span<const double> y(p.ytilde.data(), p.ytilde.size());
    up.push_back(harmonics::undotted_basis(y, block.two_s, block.mode));
    if (!block.dotted.empty()) down.push_back(harmonics::dotted_basis(y, block.two_s, block.mode));
  }
  const Eigen::VectorXd x = joint_x(q);
  Complex sum = block_sum(block.undotted, up, x, d);
  if (!block.dotted.empty()) sum += block_sum(block.dotted, down, x, d);
  return harmonics::fiber_character(block.two_s, gamma) * sum;
}

Complex two_particle_psi(const SpinBlock& block, const ParticleConfig& q1,
                         const ParticleConfig& q2) {
  const ParticleConfig q[] = {q1, q2};
  return scalar_psi(block, q);
}

Field symmetrize(const Field& F, int two_s, int particles, int nx, int sign) {
  const int d = two_s + 1;
  const int count = power(d, particles);
  if (F.dim() != particles * nx || F.components() != 2 * count) {
    throw Error("field to symmetrize has the wrong shape");
  }
  if (sign != 1 && sign != -1) throw Error("symmetry sign must be +1 or -1");
  struct Term {
    Field f;
    std::vector<int> source;  // output multi-index k reads component source[k]
    double weight;
  };
  std::vector<Term> terms;
  std::vector<int> sigma = identity(particles);
  double total = 0.0;
  do {
    std::vector<int> vars(particles * nx);
    for (int h = 0; h < particles; ++h)
      for (int c = 0; c < nx; ++c) vars[h * nx + c] = sigma[h] * nx + c;
    std::vector<int> source(count);
    for (int k = 0; k < count; ++k) source[k] = permuted_index(k, sigma, d);
    const double w = permutation_parity(sigma) && sign < 0 ? -1.0 : 1.0;
    terms.push_back({pullback(F, particles * nx, vars), std::move(source), w});
    total += 1.0;
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  for (auto& t : terms) t.weight /= total;
  return Field(particles * nx, 2 * count, [terms, count](const Point& q, int order) {
    std::vector<Jet> out;
    for (const auto& t : terms) {
      const std::vector<Jet> v = t.f.jets(q, order);
      if (out.empty()) out.assign(2 * count, v[0] * 0.0);
      for (int k = 0; k < count; ++k) {
        out[2 * k] += v[2 * t.source[k]] * t.weight;
        out[2 * k + 1] += v[2 * t.source[k] + 1] * t.weight;
      }
    }
    return out;
  });
}

int permutation_parity(std::span<const int> perm) {
  check_permutation(perm);
  const int n = static_cast<int>(perm.size());
  std::vector<char> seen(n, 0);
  int cycles = 0;
  for (int i = 0; i < n; ++i) {
    if (seen[i]) continue;
    ++cycles;
    for (int j = i; !seen[j]; j = perm[j]) seen[j] = 1;
  }
  return (n - cycles) % 2;
}

std::vector<std::pair<int, int>> transpositions(std::span<const int> perm, Decomposition kind) {
  check_permutation(perm);
  const int n = static_cast<int>(perm.size());
  std::vector<std::pair<int, int>> out;
  if (kind == Decomposition::Adjacent) {
    std::vector<int> a(perm.begin(), perm.end());
    for (bool changed = true; changed;) {
      changed = false;
      for (int i = 0; i + 1 < n; ++i) {
        if (a[i] > a[i + 1]) {
          std::swap(a[i], a[i + 1]);
          out.emplace_back(i, i + 1);
          changed = true;
        }
      }
    }
    std::reverse(out.begin(), out.end());
  } else {
    std::vector<int> cur = identity(n);
    for (int i = 0; i < n; ++i) {
      if (cur[i] == perm[i]) continue;
      const int j = static_cast<int>(std::find(cur.begin(), cur.end(), perm[i]) - cur.begin());
      std::swap(cur[i], cur[j]);
      out.emplace_back(i, j);
    }
  }
  return out;
}

std::vector<ParticleConfig> apply_exchanges(std::vector<ParticleConfig> q,
                                            std::span<const std::pair<int, int>> swaps) {
  for (const auto& [i, j] : swaps) {
    std::swap(q[i].x, q[j].x);
    std::swap(q[i].ytilde, q[j].ytilde);
    const auto [gi, gj] = exchange_angles(q[i].gamma, q[j].gamma);
    q[i].gamma = gi;
    q[j].gamma = gj;
  }
  return q;
}

ParticleConfig random_particle(CounterRng& rng, Mode mode, int nx, double x_half_width) {
  constexpr double pi = std::numbers::pi;
  ParticleConfig p;
  p.x.resize(nx);
  for (int i = 0; i < nx; ++i) p.x[i] = rng.uniform(-x_half_width, x_half_width);
  p.ytilde.resize(harmonics::coset_dim(mode));
  p.ytilde[0] = rng.uniform(-pi, pi);
  p.ytilde[1] = rng.uniform(0.2, pi - 0.2);
  if (mode == Mode::Lorentz) {
    p.ytilde[2] = rng.uniform(-pi, pi);
    p.ytilde[3] = rng.uniform(0.2, pi - 0.2);
    p.ytilde[4] = rng.uniform(0.1, 1.2);
  }
  p.gamma = rng.uniform(0.0, 2 * kTwoPi);
  return p;
}

ExchangeReport n_particle_verify(const SpinBlock& block, std::span<const int> perm,
                                 const VerifyOptions& options) {
  block.validate();
  check_permutation(perm);
  const int n = block.particles;
  if (static_cast<int>(perm.size()) != n) throw Error("permutation size differs from particle count");
  const int d = block.index_dim();
  const int count = power(d, n);
  const auto adjacent = transpositions(perm, Decomposition::Adjacent);
  const auto cycles = transpositions(perm, Decomposition::Cycles);
  const int parity = permutation_parity(perm);
  const int sign = block.two_s % 2 && parity ? -1 : 1;  // (-1)^{2 k_p s}

  ExchangeReport report;
  report.two_s = block.two_s;
  report.particles = n;
  report.permutation.assign(perm.begin(), perm.end());
  report.transpositions = static_cast<int>(adjacent.size());
  report.phase_expected = sign;
  report.samples = options.samples;

  auto run = [&](int index) {
    CounterRng rng = CounterRng(options.seed).substream(static_cast<std::uint64_t>(index));
    SampleResult r;
    for (int h = 0; h < n; ++h) {
      ParticleConfig p = random_particle(rng, block.mode, block.nx, options.x_half_width);
      r.config.push_back(options.transform ? options.transform(p) : std::move(p));
    }
    const Complex psi = scalar_psi(block, r.config);
    const auto a = apply_exchanges(r.config, adjacent);
    const auto b = apply_exchanges(r.config, cycles);
    const Complex pa = scalar_psi(block, a);
    const Complex pb = scalar_psi(block, b);
    const double scale = std::max(1.0, std::abs(psi));
    r.residual = std::max(std::abs(psi - pa), std::abs(psi - pb)) / scale;
    r.decomposition_gap = std::abs(pa - pb) / scale;
    // Accumulated fiber phase of each decomposition against (-1)^{2 k_p s}.
    for (const auto* moved : {&a, &b}) {
      double shift = 0.0;
      for (int h = 0; h < n; ++h) shift += (*moved)[h].gamma - r.config[h].gamma;
      const Complex phase = harmonics::fiber_character(block.two_s, shift);
      if (std::abs(phase - double(sign)) > 1e-9) r.phase_ok = false;
    }
    // Coefficient level: Phi_k(x) against sign * Phi_{pi k}(pi x).
    const Eigen::VectorXd x = joint_x(r.config);
    Eigen::VectorXd px(x.size());
    for (int h = 0; h < n; ++h) px.segment(h * block.nx, block.nx) = x.segment(perm[h] * block.nx, block.nx);
    for (const Field* f : {&block.undotted, &block.dotted}) {
      if (f->empty()) continue;
      const Eigen::VectorXd v = f->values(x);
      const Eigen::VectorXd w = f->values(px);
      const double fscale = std::max(1.0, v.cwiseAbs().maxCoeff());
      for (int k = 0; k < count; ++k) {
        const int pk = permuted_index(k, perm, d);
        const Complex lhs(v[2 * k], v[2 * k + 1]);
        const Complex rhs(w[2 * pk], w[2 * pk + 1]);
        r.phi_residual = std::max(r.phi_residual, std::abs(lhs - double(sign) * rhs) / fscale);
        r.num += std::conj(lhs) * rhs;
        r.den += std::norm(lhs);
      }
    }
    return r;
  };

  std::vector<SampleResult> results(std::max(options.samples, 0));
  const int workers = std::clamp(static_cast<int>(std::thread::hardware_concurrency()), 1, 8);
  std::vector<std::future<void>> jobs;
  for (int w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (int i = w; i < options.samples; i += workers) results[i] = run(i);
    }));
  }
  for (auto& j : jobs) j.get();

  Complex num = 0.0;
  double den = 0.0;
  bool phases = true;
  double worst = -1.0;
  for (const auto& r : results) {
    report.max_residual = std::max(report.max_residual, r.residual);
    report.phi_residual = std::max(report.phi_residual, r.phi_residual);
    if (r.decomposition_gap > options.tolerance) report.decomposition_independent = false;
    phases = phases && r.phase_ok;
    num += r.num;
    den += r.den;
    if (r.residual > options.tolerance && r.residual > worst) {
      worst = r.residual;
      report.counterexample = r.config;
    }
  }
  if (!phases) report.decomposition_independent = false;
  report.phase_observed = den > 0.0 ? (num / den).real() : 0.0;
  report.passed = report.max_residual <= options.tolerance && report.decomposition_independent;
  return report;
}

ExchangeReport verify_exchange(const SpinBlock& block, const VerifyOptions& options) {
  if (block.particles != 2) throw Error("verify_exchange is the two-particle check");
  const int swap[] = {1, 0};
  return n_particle_verify(block, swap, options);
}

}  // namespace cqg::spinstat
