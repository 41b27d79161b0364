#pragma once

// Wigner function of the boson marginal on a phase-space grid, via matrix
// elements of the displaced parity operator,
//   <m| D(a) P D(a)' |n> = (-1)^n sqrt(n!/m!) (2a)^{m-n} e^{-2|a|^2}
//                          L_n^{m-n}(4|a|^2),   m >= n,
// evaluated with stable incremental prefactors and Laguerre recurrences.
// Quadratures are x = (a + a')/sqrt(2), so a = (q + ip)/sqrt(2) and the
// vacuum peaks at 1/pi.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "aqrm/fock.hpp"
#include "aqrm/types.hpp"

namespace aqrm {

struct WignerGrid {
  RealVector q;    // row coordinates
  RealVector p;    // column coordinates
  RealMatrix w;    // w(i, j) = W(q[i], p[j])
  double integral = 0.0;  // trapezoid norm; 1 when range and resolution suffice
};

namespace detail {

// W at one phase-space point for a boson density matrix.
inline double wigner_point(const Operator& rho, double q, double p) {
  const int d = static_cast<int>(rho.rows());
  const Complex alpha(q / std::sqrt(2.0), p / std::sqrt(2.0));
  const double x = 4.0 * std::norm(alpha);
  const double damp = std::exp(-2.0 * std::norm(alpha));
  const Complex two_a = 2.0 * alpha;

  double sum = 0.0;
  Complex zk(1.0, 0.0);  // (2a)^k / sqrt(k!)
  for (int k = 0; k < d; ++k) {
    if (k > 0) zk *= two_a / std::sqrt(static_cast<double>(k));
    // Laguerre L_n^k(x) upward in n, with the sqrt(n!/(n+k)!) prefactor
    // folded in incrementally.
    double l_prev = 0.0, l_cur = 1.0;
    double wn = 1.0;  // sqrt(n! k! / (n+k)!)
    double sign = 1.0;
    for (int n = 0; n + k < d; ++n) {
      if (n > 0) {
        const double l_next =
            ((2.0 * (n - 1) + 1.0 + k - x) * l_cur - (n - 1.0 + k) * l_prev) / n;
        l_prev = l_cur;
        l_cur = l_next;
        wn *= std::sqrt(n / (n + static_cast<double>(k)));
        sign = -sign;
      }
      const Complex elem = sign * wn * zk * damp * l_cur;  // <n+k| P(a) |n>
      if (k == 0) {
        sum += (rho(n, n) * elem).real();
      } else {
        sum += 2.0 * (rho(n, n + k) * elem).real();
      }
    }
  }
  // quadrature-plane density: W_qp = W_alpha / 2
  return sum / kPi;
}

}  // namespace detail

inline WignerGrid wigner_grid(const Operator& rho_boson, const RealVector& q, const RealVector& p,
                              bool check_norm = true) {
  if (rho_boson.rows() != rho_boson.cols() || rho_boson.rows() < 1) {
    throw std::invalid_argument("wigner_grid: density matrix must be square");
  }
  if (q.size() < 2 || p.size() < 2) {
    throw std::invalid_argument("wigner_grid: need at least 2 points per axis");
  }
  WignerGrid grid;
  grid.q = q;
  grid.p = p;
  grid.w.resize(q.size(), p.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      grid.w(i, j) = detail::wigner_point(rho_boson, q[i], p[j]);
    }
  }

  RealVector wq = RealVector::Ones(q.size());
  RealVector wp = RealVector::Ones(p.size());
  wq[0] = wq[q.size() - 1] = 0.5;
  wp[0] = wp[p.size() - 1] = 0.5;
  const double hq = (q[q.size() - 1] - q[0]) / (q.size() - 1);
  const double hp = (p[p.size() - 1] - p[0]) / (p.size() - 1);
  grid.integral = hq * hp * wq.dot(grid.w * wp);
  if (check_norm && std::abs(grid.integral - 1.0) > 1e-3) {
    throw numerical_error("wigner_grid: normalization outside tolerance");
  }
  return grid;
}

struct WignerOptions {
  double span_sigmas = 4.0;  // half-width in units of the larger quadrature spread
  double padding = 0.75;
  double target_step = 0.02;
  int min_points = 121;
  int max_points = 481;
};

// I = -(pi/2) * Int W (Lap + 2) W dq dp, evaluated with a five-point
// Laplacian on an automatically sized grid. Agrees with the operator form
// Tr[n rho^2] - Tr[a rho a' rho] for states resolved by the grid.
inline double macroscopicity_wigner(const Operator& rho_boson, const WignerOptions& opt = {}) {
  const int d = static_cast<int>(rho_boson.rows());
  if (d < 2) throw std::invalid_argument("macroscopicity_wigner: need at least 2 levels");
  const Operator a = annihilation(HilbertConfig{d});

  const Complex a_mean = (a * rho_boson).trace();
  const double n_mean = ((a.adjoint() * a) * rho_boson).trace().real();
  const Complex a_sq = (a * a * rho_boson).trace();
  const double qbar = std::sqrt(2.0) * a_mean.real();
  const double pbar = std::sqrt(2.0) * a_mean.imag();
  const double var_q =
      std::max(0.25, 0.5 * (1.0 + 2.0 * n_mean + 2.0 * a_sq.real()) - qbar * qbar);
  const double var_p =
      std::max(0.25, 0.5 * (1.0 + 2.0 * n_mean - 2.0 * a_sq.real()) - pbar * pbar);
  const double half = opt.span_sigmas * std::sqrt(std::max(var_q, var_p)) + opt.padding;

  int n = static_cast<int>(std::ceil(2.0 * half / opt.target_step)) + 1;
  n = std::clamp(n, opt.min_points, opt.max_points);
  RealVector q(n), p(n);
  for (int i = 0; i < n; ++i) {
    q[i] = qbar - half + 2.0 * half * i / (n - 1);
    p[i] = pbar - half + 2.0 * half * i / (n - 1);
  }
  const WignerGrid grid = wigner_grid(rho_boson, q, p);
  const double h = 2.0 * half / (n - 1);

  double acc = 0.0;
  for (int i = 1; i + 1 < n; ++i) {
    for (int j = 1; j + 1 < n; ++j) {
      const double lap = (grid.w(i + 1, j) + grid.w(i - 1, j) + grid.w(i, j + 1) +
                          grid.w(i, j - 1) - 4.0 * grid.w(i, j)) /
                         (h * h);
      acc += grid.w(i, j) * (lap + 2.0 * grid.w(i, j));
    }
  }
  return -0.5 * kPi * acc * h * h;
}

}  // namespace aqrm
