#pragma once

// Correlation and nonclassicality measures of qubit-boson states: photon
// statistics in the bare and dressed pictures, quadrature squeezing,
// interference-based macroscopicity, entanglement negativity, and quantum
// discord with the qubit as the measured party.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "aqrm/spectrum.hpp"
#include "aqrm/types.hpp"

namespace aqrm {

// Von Neumann entropy in nats. Eigenvalues below the floor are treated as
// exact zeros; values below -1e-10 indicate an invalid state.
inline double entropy(const Operator& rho, double floor = 1e-14) {
  Eigen::SelfAdjointEigenSolver<Operator> es(hermitize(rho));
  double s = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()[i];
    if (lam < -1e-10) throw std::invalid_argument("entropy: negative eigenvalue");
    if (lam > floor) s -= lam * std::log(lam);
  }
  return s;
}

struct BosonMoments {
  double n_mean = 0;       // <a'a>
  double n2_corr = 0;      // <a'a'aa>
  Complex a_mean = 0;      // <a>
  Complex a_sq_mean = 0;   // <a a>
};

inline BosonMoments boson_moments(const Operator& rho, const HilbertConfig& cfg) {
  const Operator a = embed_boson(annihilation(cfg), cfg);
  const Operator ad = a.adjoint();
  BosonMoments m;
  m.n_mean = expectation(rho, ad * a);
  m.n2_corr = expectation(rho, ad * ad * a * a);
  m.a_mean = expectation_c(rho, a);
  m.a_sq_mean = expectation_c(rho, a * a);
  return m;
}

// <a'a'aa> / <a'a>^2; empty when the occupation is too small for the ratio
// to be meaningful (denominator below 1e-12).
inline std::optional<double> g2_bare(const Operator& rho, const HilbertConfig& cfg) {
  const BosonMoments m = boson_moments(rho, cfg);
  const double den = m.n_mean * m.n_mean;
  if (den < 1e-12) return std::nullopt;
  return m.n2_corr / den;
}

// Same ratio for the dressed emission operator X. The operator must come
// from build_x_plus on the matching spectral data.
inline std::optional<double> g2_dressed(const Operator& rho, const Operator& x_plus) {
  const Operator xm = x_plus.adjoint();
  const double den_lin = expectation(rho, xm * x_plus);
  if (den_lin * den_lin < 1e-12) return std::nullopt;
  return expectation(rho, xm * xm * x_plus * x_plus) / (den_lin * den_lin);
}

inline std::optional<double> g2_dressed(const Operator& rho, const SpectralData& spectral) {
  return g2_dressed(rho, build_x_plus(spectral));
}

struct SqueezingResult {
  double zeta_sq = 1.0;  // minimal variance of a e^{-i t} + a' e^{i t}; vacuum gives 1
  double theta = 0.0;    // quadrature angle attaining it
};

// Var x_t = 1 + 2(<n> - |<a>|^2) + 2 Re[(<aa> - <a>^2) e^{-2it}], minimized
// in closed form over t. Values below 1 certify squeezing.
inline SqueezingResult squeezing(const Operator& rho, const HilbertConfig& cfg) {
  const BosonMoments m = boson_moments(rho, cfg);
  const Complex excess = m.a_sq_mean - m.a_mean * m.a_mean;
  SqueezingResult r;
  r.zeta_sq = 1.0 + 2.0 * (m.n_mean - std::norm(m.a_mean)) - 2.0 * std::abs(excess);
  r.theta = std::abs(excess) > 0 ? 0.5 * (std::arg(excess) + kPi) : 0.0;
  return r;
}

// Interference-based size of a boson state: I = Tr[n rho^2] - Tr[a rho a' rho].
// Zero for any coherent state and for every classical mixture of them; equals
// <n> - |<a>|^2 on pure states.
inline double macroscopicity(const Operator& rho_boson) {
  const int d = static_cast<int>(rho_boson.rows());
  HilbertConfig cfg{d};
  const Operator a = annihilation(cfg);
  const double first = ((a.adjoint() * a) * rho_boson * rho_boson).trace().real();
  const double second = (a * rho_boson * a.adjoint() * rho_boson).trace().real();
  return first - second;
}

// Sum of the negative eigenvalues of the partial transpose, in magnitude.
inline double negativity(const Operator& rho, const HilbertConfig& cfg) {
  const Operator pt = partial_transpose_qubit(rho, cfg);
  Eigen::SelfAdjointEigenSolver<Operator> es(hermitize(pt));
  double neg = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    neg += std::max(0.0, -es.eigenvalues()[i]);
  }
  return neg;
}

struct DiscordOptions {
  int grid_theta = 64;        // polar points on the measurement hemisphere
  int grid_phi = 128;         // azimuthal points
  double refine_tol = 1e-8;   // simplex spread tolerance for the local search
  int max_refine_evals = 400;
  double support_tol = 1e-14; // boson eigenvalues below this are dropped
  unsigned seed = 0;          // jitter of the restart points; same seed, same result
};

struct DiscordResult {
  double value = 0.0;
  double theta = 0.0;  // optimal measurement axis
  double phi = 0.0;
  double grid_value = 0.0;  // best conditional entropy seen on the raw grid
  long evaluations = 0;
};

namespace detail {

// Conditional boson entropy after measuring the qubit along (theta, phi).
// Blocks are the qubit components of rho, compressed to the boson support.
struct ConditionalEntropy {
  Operator ee, eg, ge, gg;
  long evals = 0;

  double operator()(double theta, double phi) {
    ++evals;
    const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    const Complex ph(std::cos(phi), std::sin(phi));
    // projector onto c|e> + e^{i phi} s|g> and its complement
    const Operator plus = c * c * ee + c * s * ph * eg + c * s * std::conj(ph) * ge + s * s * gg;
    const Operator minus = s * s * ee - c * s * ph * eg - c * s * std::conj(ph) * ge + c * c * gg;
    double total = 0.0;
    for (const Operator* blk : {&plus, &minus}) {
      Eigen::SelfAdjointEigenSolver<Operator> es(hermitize(*blk));
      const double p = std::max(0.0, es.eigenvalues().sum());
      if (p < 1e-14) continue;
      double s_cond = 0.0;
      for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double lam = es.eigenvalues()[i] / p;
        if (lam > 1e-14) s_cond -= lam * std::log(lam);
      }
      total += p * s_cond;
    }
    return total;
  }
};

struct SimplexPoint {
  double x, y, f;
};

// Plain two-dimensional Nelder-Mead; the target is smooth and periodic, so
// no bounds are needed.
inline SimplexPoint nelder_mead_2d(const std::function<double(double, double)>& f, double x0,
                                   double y0, double step, double tol, int max_evals) {
  std::vector<SimplexPoint> s = {{x0, y0, f(x0, y0)},
                                 {x0 + step, y0, f(x0 + step, y0)},
                                 {x0, y0 + step, f(x0, y0 + step)}};
  int evals = 3;
  while (evals < max_evals) {
    std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.f < b.f; });
    const double spread = std::max({std::abs(s[2].f - s[0].f),
                                    std::abs(s[2].x - s[0].x) + std::abs(s[2].y - s[0].y)});
    if (spread < tol) break;
    const double cx = 0.5 * (s[0].x + s[1].x), cy = 0.5 * (s[0].y + s[1].y);
    SimplexPoint refl{cx + (cx - s[2].x), cy + (cy - s[2].y), 0};
    refl.f = f(refl.x, refl.y);
    ++evals;
    if (refl.f < s[0].f) {
      SimplexPoint exp_{cx + 2 * (cx - s[2].x), cy + 2 * (cy - s[2].y), 0};
      exp_.f = f(exp_.x, exp_.y);
      ++evals;
      s[2] = exp_.f < refl.f ? exp_ : refl;
    } else if (refl.f < s[1].f) {
      s[2] = refl;
    } else {
      SimplexPoint con{cx + 0.5 * (s[2].x - cx), cy + 0.5 * (s[2].y - cy), 0};
      con.f = f(con.x, con.y);
      ++evals;
      if (con.f < s[2].f) {
        s[2] = con;
      } else {
        for (int i = 1; i < 3; ++i) {
          s[i].x = 0.5 * (s[i].x + s[0].x);
          s[i].y = 0.5 * (s[i].y + s[0].y);
          s[i].f = f(s[i].x, s[i].y);
          ++evals;
        }
      }
    }
  }
  std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.f < b.f; });
  return s[0];
}

}  // namespace detail

// Quantum discord with projective measurements on the qubit:
//   D = S(qubit) - S(joint) + min over axes of the conditional boson entropy.
// The minimization runs a hemisphere grid followed by local refinement from
// the best point and two perturbed restarts.
inline DiscordResult discord(const Operator& rho, const HilbertConfig& cfg,
                             const DiscordOptions& opt = {}) {
  cfg.validate();
  const int nb = cfg.fock_cutoff;
  if (rho.rows() != cfg.total_dim() || rho.cols() != cfg.total_dim()) {
    throw std::invalid_argument("discord: dimension mismatch");
  }
  if (opt.grid_theta < 2 || opt.grid_phi < 2) {
    throw std::invalid_argument("discord: grid must be at least 2 x 2");
  }

  const Operator rho_q = partial_trace(rho, cfg, Keep::qubit);
  const Operator rho_b = partial_trace(rho, cfg, Keep::boson);
  const double s_joint = entropy(rho);
  const double s_qubit = entropy(rho_q);

  // Work in the support of the boson marginal; both conditional states live
  // inside it, so entropies are unchanged.
  Eigen::SelfAdjointEigenSolver<Operator> es(hermitize(rho_b));
  std::vector<int> keep;
  for (int i = 0; i < nb; ++i) {
    if (es.eigenvalues()[i] > opt.support_tol) keep.push_back(i);
  }
  if (keep.empty()) keep.push_back(nb - 1);
  Operator basis(nb, static_cast<int>(keep.size()));
  for (size_t k = 0; k < keep.size(); ++k) basis.col(k) = es.eigenvectors().col(keep[k]);

  detail::ConditionalEntropy cond;
  cond.ee = basis.adjoint() * rho.block(0, 0, nb, nb) * basis;
  cond.eg = basis.adjoint() * rho.block(0, nb, nb, nb) * basis;
  cond.ge = basis.adjoint() * rho.block(nb, 0, nb, nb) * basis;
  cond.gg = basis.adjoint() * rho.block(nb, nb, nb, nb) * basis;

  double best = std::numeric_limits<double>::infinity();
  double best_theta = 0, best_phi = 0;
  for (int it = 0; it < opt.grid_theta; ++it) {
    const double theta = 0.5 * kPi * it / (opt.grid_theta - 1);
    for (int ip = 0; ip < opt.grid_phi; ++ip) {
      const double phi = 2.0 * kPi * ip / opt.grid_phi;
      const double val = cond(theta, phi);
      if (val < best) {
        best = val;
        best_theta = theta;
        best_phi = phi;
      }
    }
  }

  DiscordResult result;
  result.grid_value = best;
  const double step = 0.5 * kPi / opt.grid_theta;
  auto f = [&cond](double t, double p) { return cond(t, p); };
  detail::SimplexPoint opt_pt{best_theta, best_phi, best};
  std::mt19937 rng(opt.seed);
  std::uniform_real_distribution<double> jitter(-2.0, 2.0);
  std::array<std::pair<double, double>, 3> starts{
      std::pair{best_theta, best_phi},
      std::pair{best_theta + jitter(rng) * step, best_phi + jitter(rng) * step},
      std::pair{best_theta + jitter(rng) * step, best_phi + jitter(rng) * step}};
  for (const auto& start : starts) {
    const detail::SimplexPoint cand = detail::nelder_mead_2d(
        f, start.first, start.second, step, opt.refine_tol, opt.max_refine_evals);
    if (cand.f < opt_pt.f) opt_pt = cand;
  }

  // The raw value is reported as is; optimizer noise may leave it marginally
  // below zero, but anything past -1e-9 means the minimization failed.
  const double raw = s_qubit - s_joint + opt_pt.f;
  if (raw < -1e-9) throw numerical_error("discord: negative beyond tolerance");
  result.value = raw;
  result.theta = opt_pt.x;
  result.phi = opt_pt.y;
  result.evaluations = cond.evals;
  return result;
}

struct QuantifierOptions {
  bool with_discord = true;
  bool with_g2_dressed = true;
  DiscordOptions discord_options{};
};

struct QuantifierReport {
  double mean_occupation = 0;
  std::optional<double> g2_bare;
  std::optional<double> g2_dressed;
  double squeezing = 1.0;
  double squeezing_angle = 0.0;
  double macroscopicity = 0.0;
  double negativity = 0.0;
  std::optional<DiscordResult> discord;
};

// All measures of one state. The dressed pair correlation needs the spectral
// data of the Hamiltonian the state belongs to; a precomputed emission
// operator can be supplied to amortize it across states.
inline QuantifierReport evaluate_quantifiers(const Operator& rho, const SpectralData& spectral,
                                             const QuantifierOptions& opt = {},
                                             const Operator* x_plus = nullptr) {
  const HilbertConfig cfg = spectral.config;
  validate_density(rho, 1e-8, -1e-8);

  QuantifierReport rep;
  const BosonMoments m = boson_moments(rho, cfg);
  rep.mean_occupation = m.n_mean;
  rep.g2_bare = g2_bare(rho, cfg);
  if (opt.with_g2_dressed) {
    if (x_plus != nullptr) {
      rep.g2_dressed = g2_dressed(rho, *x_plus);
    } else {
      rep.g2_dressed = g2_dressed(rho, spectral);
    }
  }
  const SqueezingResult sq = squeezing(rho, cfg);
  rep.squeezing = sq.zeta_sq;
  rep.squeezing_angle = sq.theta;
  rep.macroscopicity = macroscopicity(partial_trace(rho, cfg, Keep::boson));
  rep.negativity = negativity(rho, cfg);
  if (opt.with_discord) {
    rep.discord = discord(rho, cfg, opt.discord_options);
  }
  return rep;
}

}  // namespace aqrm
