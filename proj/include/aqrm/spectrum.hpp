#pragma once

// Dressed basis of the model: parity-resolved eigensolve, level-crossing
// detection along coupling sweeps, and the dressed emission operator that
// replaces the bare annihilation operator in output-field statistics.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "aqrm/model.hpp"
#include "aqrm/types.hpp"

namespace aqrm {

struct SpectralData {
  ModelParams params;
  HilbertConfig config;
  RealVector energies;   // ascending
  Operator states;       // columns are eigenvectors in the bare basis
  IntVector parities;    // +-1 per level

  int dim() const { return static_cast<int>(energies.size()); }
};

namespace detail {

// Phase convention: the largest-magnitude entry of each eigenvector is made
// real and positive (ties resolved toward the lowest index).
inline void fix_phase(Eigen::Ref<Eigen::VectorXcd> v) {
  int best = 0;
  double best_mag = 0.0;
  for (int i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]);
    if (mag > best_mag + 1e-12) {
      best_mag = mag;
      best = i;
    }
  }
  const Complex z = v[best];
  if (std::abs(z) > 0) v *= std::conj(z) / std::abs(z);
}

struct SectorSolution {
  RealVector energies;
  Operator states;  // scattered back to full dimension
  int parity = 1;
};

}  // namespace detail

// Diagonalizes a Hermitian operator on the composite space. When the
// operator commutes with the parity grading (the model Hamiltonian always
// does) each parity sector is solved separately, which keeps degenerate
// doublets parity-pure and makes the labels exact.
inline SpectralData eigensolve(const Operator& h, const ModelParams& p) {
  p.validate();
  const HilbertConfig cfg = p.hilbert();
  const int d = cfg.total_dim();
  if (h.rows() != d || h.cols() != d) {
    throw std::invalid_argument("eigensolve: operator does not match the resolved cutoff");
  }
  if (!is_hermitian(h, 1e-12 * std::max(1.0, max_abs(h)))) {
    throw std::invalid_argument("eigensolve: operator is not Hermitian");
  }

  std::vector<int> even, odd;
  even.reserve(d);
  odd.reserve(d);
  for (int s = 0; s < 2; ++s) {
    for (int n = 0; n < cfg.fock_cutoff; ++n) {
      (basis_parity(s, n) == 1 ? even : odd).push_back(composite_index(s, n, cfg));
    }
  }

  // Parity commutation check: any matrix element between sectors breaks it.
  double cross = 0.0;
  for (int i : even) {
    for (int j : odd) {
      cross = std::max({cross, std::abs(h(i, j)), std::abs(h(j, i))});
    }
  }
  const bool parity_blocked = cross <= 1e-12 * std::max(1.0, max_abs(h));
  const bool real_valued = (h.imag().cwiseAbs().maxCoeff() == 0.0);

  std::vector<detail::SectorSolution> sectors;
  auto solve_sector = [&](const std::vector<int>& idx, int parity) {
    const int m = static_cast<int>(idx.size());
    detail::SectorSolution sol;
    sol.parity = parity;
    sol.states = Operator::Zero(d, m);
    if (real_valued) {
      RealMatrix block(m, m);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) block(r, c) = h(idx[r], idx[c]).real();
      Eigen::SelfAdjointEigenSolver<RealMatrix> es(block);
      if (es.info() != Eigen::Success) throw numerical_error("eigensolve: sector solve failed");
      sol.energies = es.eigenvalues();
      for (int c = 0; c < m; ++c)
        for (int r = 0; r < m; ++r) sol.states(idx[r], c) = es.eigenvectors()(r, c);
    } else {
      Operator block(m, m);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) block(r, c) = h(idx[r], idx[c]);
      Eigen::SelfAdjointEigenSolver<Operator> es(block);
      if (es.info() != Eigen::Success) throw numerical_error("eigensolve: sector solve failed");
      sol.energies = es.eigenvalues();
      for (int c = 0; c < m; ++c)
        for (int r = 0; r < m; ++r) sol.states(idx[r], c) = es.eigenvectors()(r, c);
    }
    sectors.push_back(std::move(sol));
  };

  SpectralData out;
  out.params = p;
  out.config = cfg;
  out.energies.resize(d);
  out.states.resize(d, d);
  out.parities.resize(d);

  if (parity_blocked) {
    solve_sector(even, +1);
    solve_sector(odd, -1);
    // Merge ascending; exact ties put the even sector first.
    int ie = 0, io = 0;
    const auto& ev = sectors[0];
    const auto& od = sectors[1];
    for (int k = 0; k < d; ++k) {
      const bool take_even =

          io >= od.energies.size() ||
          (ie < ev.energies.size() && ev.energies[ie] <= od.energies[io]);
      if (take_even) {
        out.energies[k] = ev.energies[ie];
        out.states.col(k) = ev.states.col(ie);
        out.parities[k] = +1;
        ++ie;
      } else {
        out.energies[k] = od.energies[io];
        out.states.col(k) = od.states.col(io);
        out.parities[k] = -1;
        ++io;
      }
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Operator> es(h);
    if (es.info() != Eigen::Success) throw numerical_error("eigensolve: solve failed");
    out.energies = es.eigenvalues();
    out.states = es.eigenvectors();
    const Operator pi = parity_operator(cfg);
    for (int k = 0; k < d; ++k) {
      const double expct = (out.states.col(k).adjoint() * pi * out.states.col(k))(0, 0).real();
      if (std::abs(expct) < 1.0 - 1e-6) {
        throw numerical_error("eigensolve: eigenvector has no definite parity");
      }
      out.parities[k] = expct > 0 ? 1 : -1;
    }
  }

  for (int k = 0; k < d; ++k) detail::fix_phase(out.states.col(k));

  const double residual = max_abs(h * out.states - out.states * out.energies.asDiagonal());
  if (residual > 1e-9 * std::max(1.0, max_abs(h))) {
    throw numerical_error("eigensolve: residual exceeds tolerance");
  }
  return out;
}

inline SpectralData eigensolve(const ModelParams& p) {
  return eigensolve(build_hamiltonian(p), p);
}

// Dressed emission operator
//   X+ = -i sum_{E_k > E_j} (E_k - E_j) <phi_j|(a + a')|phi_k>  |phi_j><phi_k|
// returned in the bare basis. Degenerate pairs drop out through the
// vanishing gap prefactor. In the decoupled limit X+ -> -i w a.
inline Operator build_x_plus(const SpectralData& s) {
  const int d = s.dim();
  const Operator x_bare = embed_boson(annihilation(s.config) + creation(s.config), s.config);
  const Operator x_dressed = s.states.adjoint() * x_bare * s.states;
  Operator up = Operator::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      const double gap = s.energies[k] - s.energies[j];
      if (gap > 0) up(j, k) = Complex(0, -1) * gap * x_dressed(j, k);
    }
  }
  return s.states * up * s.states.adjoint();
}

namespace detail {

// Golden-section minimization of a unimodal scalar function on [a, b].
inline double golden_section_minimize(const std::function<double(double)>& f, double a, double b,
                                      double xtol = 1e-8, int max_iter = 200) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < max_iter && (b - a) > xtol; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

enum class Coupling { lambda1, lambda2 };

struct CrossingRecord {
  int level = 0;              // gap between levels (level, level + 1)
  double coupling_value = 0;  // swept coupling at the gap minimum
  double gap = 0;             // refined minimal gap
  bool is_true_crossing = false;
  int parity_lower_before = 0;
  int parity_lower_after = 0;
};

struct CrossingOptions {
  double degeneracy_tol = 1e-6;   // in units of omega
  double prominence = 1e-3;       // gap must reopen this far on both sides
  double refine_xtol = 1e-9;
};

inline ModelParams with_swept_coupling(ModelParams base, Coupling swept, double ratio,
                                       double value) {
  if (swept == Coupling::lambda1) {
    base.lambda1 = value;
    base.lambda2 = ratio * value;
  } else {
    base.lambda2 = value;
    base.lambda1 = ratio * value;
  }
  return base;
}

// Scans adjacent-level gaps along a coupling sweep, refines every interior
// local minimum by golden-section search, and classifies it as a true
// crossing when the refined gap closes within tolerance and the parity pair
// swaps across the minimum. Minima whose gap never reopens on either side
// (asymptotically degenerate doublets) are not crossings.
inline std::vector<CrossingRecord> detect_crossings(const ModelParams& base, Coupling swept,
                                                    double ratio, const std::vector<double>& grid,
                                                    int levels,
                                                    const CrossingOptions& opt = {}) {
  base.validate();
  if (grid.size() < 3) {
    throw std::invalid_argument("detect_crossings: grid must contain at least 3 points");
  }
  if (levels < 2 || levels > 8) {
    throw std::invalid_argument("detect_crossings: levels must lie in [2, 8]");
  }
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw std::invalid_argument("detect_crossings: grid must be ascending");
  }

  // One fixed cutoff for the whole sweep keeps gap(lambda) continuous.
  ModelParams probe = with_swept_coupling(base, swept, ratio, grid.back());
  const int nc = probe.resolved_cutoff();

  auto solve_at = [&](double value) {
    ModelParams p = with_swept_coupling(base, swept, ratio, value);
    p.cutoff = nc;
    return eigensolve(p);
  };

  const int n = static_cast<int>(grid.size());
  RealMatrix energies(n, levels);
  Eigen::MatrixXi parities(n, levels);
  for (int i = 0; i < n; ++i) {
    const SpectralData s = solve_at(grid[i]);
    for (int k = 0; k < levels; ++k) {
      energies(i, k) = s.energies[k];
      parities(i, k) = s.parities[k];
    }
  }

  std::vector<CrossingRecord> records;
  for (int k = 0; k + 1 < levels; ++k) {
    auto gap_at = [&](double value) {
      const SpectralData s = solve_at(value);
      return s.energies[k + 1] - s.energies[k];
    };
    for (int i = 1; i + 1 < n; ++i) {
      const double g = energies(i, k + 1) - energies(i, k);
      const double gl = energies(i - 1, k + 1) - energies(i - 1, k);
      const double gr = energies(i + 1, k + 1) - energies(i + 1, k);
      if (!(g <= gl && g <= gr)) continue;
      // Prominence on both sides within the sweep window.
      const double need = opt.prominence * base.omega;
      bool reopen_left = false, reopen_right = false;
      for (int j = i; j >= 0; --j) {
        if (energies(j, k + 1) - energies(j, k) >= need) {
          reopen_left = true;
          break;
        }
      }
      for (int j = i; j < n; ++j) {
        if (energies(j, k + 1) - energies(j, k) >= need) {
          reopen_right = true;
          break;
        }
      }
      if (!reopen_left || !reopen_right) continue;

      CrossingRecord rec;
      rec.level = k;
      rec.coupling_value =
          detail::golden_section_minimize(gap_at, grid[i - 1], grid[i + 1], opt.refine_xtol);
      rec.gap = gap_at(rec.coupling_value);
      rec.parity_lower_before = parities(i - 1, k);
      rec.parity_lower_after = parities(i + 1, k);
      const bool parity_swap = parities(i - 1, k) == parities(i + 1, k + 1) &&
                               parities(i - 1, k + 1) == parities(i + 1, k) &&
                               parities(i - 1, k) != parities(i - 1, k + 1);
      rec.is_true_crossing = rec.gap < opt.degeneracy_tol * base.omega && parity_swap;
      records.push_back(rec);
    }
  }
  return records;
}

}  // namespace aqrm
