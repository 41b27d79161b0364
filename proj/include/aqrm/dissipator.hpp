#pragma once

// Dressed-basis Markovian master equation for the anisotropic Rabi model.
//
// Jump operators connect energy eigenstates |u> -> |l>, E_u > E_l, with rates
//   down = sum_baths gamma_bath(gap) |S_bath|^2 (1 + n_bath(gap))
//   up   = sum_baths gamma_bath(gap) |S_bath|^2 n_bath(gap)
// where S_qubit = <u| sx |l>, S_boson = <u| a + a' |l>, gamma is Ohmic with
// an exponential cutoff and n is the Bose occupation of the respective bath.
//
// In the eigenbasis the generator block-decouples: populations follow a
// classical rate matrix W (columns sum to zero) and each coherence relaxes
// independently with factor L(m,n) = -i(E_m - E_n) - (decay_m + decay_n)/2.
// Both baths at the same temperature satisfy detailed balance pairwise, so
// the Gibbs state is then a fixed point to machine precision at any cutoff.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "aqrm/spectrum.hpp"
#include "aqrm/types.hpp"

namespace aqrm {

struct BathParams {
  double alpha_boson = 0.0;  // Ohmic coupling of the cavity quadrature a + a'
  double alpha_qubit = 0.0;  // Ohmic coupling of sx
  double omega_c = 0.0;      // shared exponential cutoff of both spectral densities
  double temp_boson = 0.0;
  double temp_qubit = 0.0;

  static BathParams symmetric(double alpha, double omega_c, double temperature) {
    return BathParams{alpha, alpha, omega_c, temperature, temperature};
  }

  void validate() const {
    if (alpha_boson < 0 || alpha_qubit < 0) {
      throw std::invalid_argument("BathParams: couplings must be non-negative");
    }
    if (temp_boson < 0 || temp_qubit < 0) {
      throw std::invalid_argument("BathParams: temperatures must be non-negative");
    }
    if ((alpha_boson > 0 || alpha_qubit > 0) && !(omega_c > 0)) {
      throw std::invalid_argument("BathParams: omega_c must be positive when a bath is coupled");
    }
  }
};

// 1 / (exp(gap/T) - 1); zero at T = 0. Large gap/T underflows cleanly to 0.
inline double bose_einstein(double gap, double temperature) {
  if (!(gap > 0)) throw std::invalid_argument("bose_einstein: gap must be positive");
  if (temperature < 0) throw std::invalid_argument("bose_einstein: negative temperature");
  if (temperature == 0.0) return 0.0;
  return 1.0 / std::expm1(gap / temperature);
}

// pi * alpha * gap * exp(-gap / omega_c)
inline double ohmic_rate(double alpha, double gap, double omega_c) {
  if (!(gap > 0)) throw std::invalid_argument("ohmic_rate: gap must be positive");
  if (!(omega_c > 0)) throw std::invalid_argument("ohmic_rate: omega_c must be positive");
  if (alpha < 0) throw std::invalid_argument("ohmic_rate: negative coupling");
  return kPi * alpha * gap * std::exp(-gap / omega_c);
}

// One eigenstate pair u > l (by energy order). Degenerate pairs are kept in
// the table for inspection but carry zero rates and occupations.
struct RateEntry {
  int upper = 0;
  int lower = 0;
  double gap = 0;
  double s_sq_qubit = 0;
  double s_sq_boson = 0;
  double n_qubit = 0;
  double n_boson = 0;
  double rate_down = 0;
  double rate_up = 0;
};

struct RateTable {
  std::vector<RateEntry> entries;  // all pairs upper > lower, lower-major order
  double max_rate = 0;
  double degeneracy_tol = 0;
};

inline RateTable build_rate_table(const SpectralData& spectral, const BathParams& bath,
                                  double degeneracy_tol = 1e-10) {
  bath.validate();
  if (!(degeneracy_tol > 0)) {
    throw std::invalid_argument("build_rate_table: degeneracy_tol must be positive");
  }
  const int d = spectral.dim();
  const HilbertConfig cfg = spectral.config;

  // Coupling operators in the eigenbasis. Both flip parity, so matrix
  // elements between equal-parity states vanish identically; the sector
  // block structure of the eigenvectors makes those zeros exact.
  const Operator sx_d =
      spectral.states.adjoint() * embed_qubit(qubit_operator(QubitOp::sx), cfg) * spectral.states;
  const Operator a = annihilation(cfg);
  const Operator x_d =
      spectral.states.adjoint() * embed_boson(Operator(a + a.adjoint()), cfg) * spectral.states;

  RateTable table;
  table.degeneracy_tol = degeneracy_tol;
  table.entries.reserve(static_cast<size_t>(d) * (d - 1) / 2);
  const double gap_floor = degeneracy_tol * spectral.params.omega;

  for (int l = 0; l < d; ++l) {
    for (int u = l + 1; u < d; ++u) {
      RateEntry e;
      e.upper = u;
      e.lower = l;
      e.gap = spectral.energies[u] - spectral.energies[l];
      e.s_sq_qubit = std::norm(sx_d(u, l));
      e.s_sq_boson = std::norm(x_d(u, l));
      if (e.gap > gap_floor) {
        const double gq = ohmic_rate(bath.alpha_qubit, e.gap, bath.omega_c > 0 ? bath.omega_c : 1.0);
        const double gb = ohmic_rate(bath.alpha_boson, e.gap, bath.omega_c > 0 ? bath.omega_c : 1.0);
        e.n_qubit = bose_einstein(e.gap, bath.temp_qubit);
        e.n_boson = bose_einstein(e.gap, bath.temp_boson);
        e.rate_down = gq * e.s_sq_qubit * (1.0 + e.n_qubit) + gb * e.s_sq_boson * (1.0 + e.n_boson);
        e.rate_up = gq * e.s_sq_qubit * e.n_qubit + gb * e.s_sq_boson * e.n_boson;
      }
      table.max_rate = std::max({table.max_rate, e.rate_down, e.rate_up});
      table.entries.push_back(e);
    }
  }
  return table;
}

namespace detail {

// Number of strongly connected components with no outgoing edge, for the
// directed graph on [0, n) given by adjacency lists. Iterative Tarjan.
inline int count_terminal_sccs(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  int next_index = 0, n_comp = 0;

  struct Frame {
    int v;
    size_t edge;
  };
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.edge < adj[f.v].size()) {
        const int w = adj[f.v][f.edge++];
        if (index[w] == -1) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
      } else {
        if (low[f.v] == index[f.v]) {
          int w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
            comp[w] = n_comp;
          } while (w != f.v);
          ++n_comp;
        }
        const int done = f.v;
        call.pop_back();
        if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[done]);
      }
    }
  }

  std::vector<char> has_exit(n_comp, 0);
  for (int v = 0; v < n; ++v) {
    for (int w : adj[v]) {
      if (comp[v] != comp[w]) has_exit[comp[v]] = 1;
    }
  }
  int terminal = 0;
  for (int c = 0; c < n_comp; ++c) {
    if (!has_exit[c]) ++terminal;
  }
  return terminal;
}

}  // namespace detail

class LindbladGenerator {
 public:
  LindbladGenerator(SpectralData spectral, BathParams bath, double degeneracy_tol = 1e-10)
      : spectral_(std::move(spectral)), bath_(bath) {
    table_ = build_rate_table(spectral_, bath_, degeneracy_tol);
    const int d = spectral_.dim();

    w_ = RealMatrix::Zero(d, d);
    for (const RateEntry& e : table_.entries) {
      w_(e.lower, e.upper) += e.rate_down;
      w_(e.upper, e.lower) += e.rate_up;
    }
    decay_ = RealVector::Zero(d);
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i < d; ++i) {
        if (i != j) decay_[j] += w_(i, j);
      }
      w_(j, j) = -decay_[j];
    }

    lambda_ = Operator::Zero(d, d);
    for (int m = 0; m < d; ++m) {
      for (int n = 0; n < d; ++n) {
        if (m == n) continue;
        lambda_(m, n) = Complex(-0.5 * (decay_[m] + decay_[n]),
                                -(spectral_.energies[m] - spectral_.energies[n]));
      }
    }
  }

  const SpectralData& spectral() const { return spectral_; }
  const BathParams& bath() const { return bath_; }
  const RateTable& rates() const { return table_; }
  int dim() const { return spectral_.dim(); }

  // Classical rate matrix on eigenstate populations; columns sum to zero.
  const RealMatrix& population_rates() const { return w_; }
  // Total outflow per eigenstate.
  const RealVector& total_decay() const { return decay_; }
  // Per-coherence relaxation factors; diagonal entries are zero and unused.
  const Operator& coherence_factors() const { return lambda_; }

  Operator apply_dressed(const Operator& rho) const {
    const int d = dim();
    if (rho.rows() != d || rho.cols() != d) {
      throw std::invalid_argument("LindbladGenerator: dimension mismatch");
    }
    Operator out = lambda_.cwiseProduct(rho);
    out.diagonal() = w_ * rho.diagonal();
    return out;
  }

  Operator apply(const Operator& rho_bare) const {
    const Operator rho_d = spectral_.states.adjoint() * rho_bare * spectral_.states;
    return spectral_.states * apply_dressed(rho_d) * spectral_.states.adjoint();
  }

  // Dense matrix of the generator acting on column-major vectorized bare-basis
  // density matrices, vec index r + c * dim. Materialized on demand; the
  // quartic memory footprint restricts this to small systems.
  Operator superoperator() const {
    const int d = dim();
    if (d > 64) {
      throw numerical_error("superoperator: dense form limited to dim <= 64");
    }
    const int d2 = d * d;
    Operator sup(d2, d2);
    Operator basis = Operator::Zero(d, d);
    for (int c = 0; c < d; ++c) {
      for (int r = 0; r < d; ++r) {
        basis(r, c) = 1.0;
        const Operator image = apply(basis);
        basis(r, c) = 0.0;
        sup.col(r + c * d) = Eigen::Map<const Eigen::VectorXcd>(image.data(), d2);
      }
    }
    return sup;
  }

 private:
  SpectralData spectral_;
  BathParams bath_;
  RateTable table_;
  RealMatrix w_;
  RealVector decay_;
  Operator lambda_;
};

inline LindbladGenerator build_generator(const SpectralData& spectral, const BathParams& bath,
                                         double degeneracy_tol = 1e-10) {
  return LindbladGenerator(spectral, bath, degeneracy_tol);
}

// exp(-(E_j - E_0)/T) / Z over the eigenbasis, returned in the bare basis.
// T = 0 gives the maximally mixed state on the (possibly degenerate) ground
// manifold.
inline Operator gibbs_state(const SpectralData& spectral, double temperature,
                            double degeneracy_tol = 1e-10) {
  if (temperature < 0) throw std::invalid_argument("gibbs_state: negative temperature");
  const int d = spectral.dim();
  RealVector weights(d);
  if (temperature == 0.0) {
    const double edge = spectral.energies[0] + degeneracy_tol * spectral.params.omega;
    for (int j = 0; j < d; ++j) weights[j] = spectral.energies[j] <= edge ? 1.0 : 0.0;
  } else {
    for (int j = 0; j < d; ++j) {
      weights[j] = std::exp(-(spectral.energies[j] - spectral.energies[0]) / temperature);
    }
  }
  weights /= weights.sum();
  return spectral.states * weights.cast<Complex>().asDiagonal() * spectral.states.adjoint();
}

// Solves L(rho) = 0, tr rho = 1 in the eigenbasis via a sparse bordered
// factorization: the population row of the lowest level is replaced by the
// trace constraint. Requires a structurally unique kernel: exactly one
// closed communicating class among populations and no undamped coherence.
inline Operator steady_state(const LindbladGenerator& gen) {
  const int d = gen.dim();
  const RealMatrix& w = gen.population_rates();
  const Operator& lambda = gen.coherence_factors();
  const double rate_scale = std::max(1.0, gen.rates().max_rate);

  const double edge_floor = 1e-14 * std::max(1.0, gen.rates().max_rate);
  std::vector<std::vector<int>> adj(d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      if (i != j && w(i, j) > edge_floor) adj[j].push_back(i);
    }
  }
  const int terminal = detail::count_terminal_sccs(adj);
  if (terminal != 1) {
    throw numerical_error("steady_state: stationary populations are not unique");
  }
  const double energy_span =
      gen.spectral().energies[d - 1] - gen.spectral().energies[0];
  const double free_tol = 1e-14 * std::max({1.0, rate_scale, energy_span});
  for (int m = 0; m < d; ++m) {
    for (int n = m + 1; n < d; ++n) {
      if (std::abs(lambda(m, n)) <= free_tol) {
        throw numerical_error("steady_state: undamped degenerate coherence");
      }
    }
  }

  const int d2 = d * d;
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(static_cast<size_t>(d2) + static_cast<size_t>(d) * d);
  for (int n = 0; n < d; ++n) {
    for (int m = 0; m < d; ++m) {
      const int idx = m + n * d;
      if (m == n) continue;
      trip.emplace_back(idx, idx, lambda(m, n));
    }
  }
  // population rows at vec(j, j); row 0 carries the trace instead
  for (int j = 1; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      if (w(j, i) != 0.0) trip.emplace_back(j + j * d, i + i * d, Complex(w(j, i), 0));
    }
  }
  for (int j = 0; j < d; ++j) trip.emplace_back(0, j + j * d, Complex(1, 0));

  Eigen::SparseMatrix<Complex> a(d2, d2);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) {
    throw numerical_error("steady_state: factorization failed");
  }
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(d2);
  b[0] = 1.0;
  const Eigen::VectorXcd x = lu.solve(b);
  if (lu.info() != Eigen::Success) {
    throw numerical_error("steady_state: solve failed");
  }

  Operator rho_d = Eigen::Map<const Operator>(x.data(), d, d);
  rho_d = hermitize(rho_d);
  rho_d /= rho_d.trace().real();

  const double residual = max_abs(gen.apply_dressed(rho_d));
  if (residual > 1e-9 * rate_scale) {
    throw numerical_error("steady_state: residual check failed");
  }

  Operator rho = gen.spectral().states * rho_d * gen.spectral().states.adjoint();
  validate_density(rho, 1e-10, -1e-10);
  return rho;
}

struct EvolveOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = 0.0;  // 0 disables the bound
  double trace_drift_tol = 1e-8;
  long max_steps = 2000000;
};

namespace detail {

// One adaptive Dormand-Prince 5(4) integration of the block-diagonal
// generator acting on the dressed-basis density matrix, sampling at the
// requested ascending times. The derivative is O(d^2) per stage.
inline std::vector<Operator> integrate_dressed(const LindbladGenerator& gen, Operator rho,
                                               const std::vector<double>& times,
                                               const EvolveOptions& opt) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

  std::vector<Operator> samples;
  samples.reserve(times.size());
  size_t next = 0;
  double t = 0.0;
  while (next < times.size() && times[next] <= 0.0) {
    samples.push_back(rho);
    ++next;
  }
  if (next == times.size()) return samples;

  const double scale =
      std::max({1.0, max_abs(gen.coherence_factors()), gen.rates().max_rate});
  double h = std::min(0.1 / scale, times.back());
  if (opt.max_step > 0) h = std::min(h, opt.max_step);

  Operator k1 = gen.apply_dressed(rho);
  long steps = 0;
  while (next < times.size()) {
    if (++steps > opt.max_steps) throw numerical_error("evolve: step limit exceeded");
    bool hit = false;
    if (t + h >= times[next]) {
      h = times[next] - t;
      hit = true;
    }

    const Operator k2 = gen.apply_dressed(rho + h * (a21 * k1));
    const Operator k3 = gen.apply_dressed(rho + h * (a31 * k1 + a32 * k2));
    const Operator k4 = gen.apply_dressed(rho + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Operator k5 = gen.apply_dressed(rho + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Operator k6 =
        gen.apply_dressed(rho + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Operator y_new = rho + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Operator k7 = gen.apply_dressed(y_new);
    const Operator err_m =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = 0.0;
    for (int c = 0; c < rho.cols(); ++c) {
      for (int r = 0; r < rho.rows(); ++r) {
        const double sc =
            opt.abs_tol + opt.rel_tol * std::max(std::abs(rho(r, c)), std::abs(y_new(r, c)));
        err = std::max(err, std::abs(err_m(r, c)) / sc);
      }
    }

    if (err <= 1.0) {
      t += h;
      rho = y_new;
      k1 = k7;
      const double drift = std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag());
      if (drift > opt.trace_drift_tol) throw numerical_error("evolve: trace drift");
      if (hit) {
        samples.push_back(rho);
        ++next;
        while (next < times.size() && times[next] <= t) {
          samples.push_back(rho);
          ++next;
        }
      }
    }
    const double grow = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    h *= std::clamp(grow, 0.2, 5.0);
    if (opt.max_step > 0) h = std::min(h, opt.max_step);
    if (!(h > 0) || t + h == t) throw numerical_error("evolve: step underflow");
  }
  return samples;
}

}  // namespace detail

inline std::vector<Operator> evolve_trajectory(const LindbladGenerator& gen, const Operator& rho0,
                                               const std::vector<double>& times,
                                               const EvolveOptions& opt = {}) {
  const int d = gen.dim();
  if (rho0.rows() != d || rho0.cols() != d) {
    throw std::invalid_argument("evolve: dimension mismatch");
  }
  if (!is_hermitian(rho0, 1e-10)) throw std::invalid_argument("evolve: state not Hermitian");
  if (std::abs(rho0.trace().real() - 1.0) > 1e-8) {
    throw std::invalid_argument("evolve: state trace must be 1");
  }
  if (times.empty()) return {};
  for (size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0 || (i > 0 && times[i] < times[i - 1])) {
      throw std::invalid_argument("evolve: times must be ascending and non-negative");
    }
  }
  const Operator rho_d = gen.spectral().states.adjoint() * rho0 * gen.spectral().states;
  std::vector<Operator> dressed = detail::integrate_dressed(gen, rho_d, times, opt);
  std::vector<Operator> out;
  out.reserve(dressed.size());
  for (const Operator& r : dressed) {
    out.push_back(gen.spectral().states * r * gen.spectral().states.adjoint());
  }
  return out;
}

inline Operator evolve(const LindbladGenerator& gen, const Operator& rho0, double t,
                       const EvolveOptions& opt = {}) {
  if (t < 0) throw std::invalid_argument("evolve: negative time");
  return evolve_trajectory(gen, rho0, {t}, opt).front();
}

}  // namespace aqrm
