#pragma once

// Common types and validation helpers for the qubit (x) truncated-boson space.

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace aqrm {

using Complex = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;

inline constexpr double kPi = 3.14159265358979323846;

// Raised when a solver or integrator cannot meet its accuracy contract.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

struct HilbertConfig {
  int fock_cutoff = 2;  // number of retained Fock states, |0>..|fock_cutoff-1>

  int total_dim() const { return 2 * fock_cutoff; }

  void validate() const {
    if (fock_cutoff < 2) {
      throw std::invalid_argument("HilbertConfig: fock_cutoff must be >= 2");
    }
  }
};

// Factor ordering is fixed once and for all: composite = qubit (x) boson,
// so basis index = qubit_index * fock_cutoff + fock_index with qubit_index
// 0 = |e> and 1 = |g>. Every embed/partial-trace routine goes through here.
inline int composite_index(int qubit_index, int fock_index, const HilbertConfig& cfg) {
  return qubit_index * cfg.fock_cutoff + fock_index;
}

inline constexpr int kExcited = 0;
inline constexpr int kGround = 1;

inline double max_abs(const Operator& m) { return m.cwiseAbs().maxCoeff(); }

inline bool is_hermitian(const Operator& m, double tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.adjoint()) <= tol;
}

inline Operator hermitize(const Operator& m) { return 0.5 * (m + m.adjoint()); }

struct DensityDiagnostics {
  double trace_error = 0.0;    // |tr(rho) - 1|
  double min_eigenvalue = 0.0;
  double hermiticity_error = 0.0;
};

inline DensityDiagnostics density_diagnostics(const Operator& rho) {
  DensityDiagnostics d;
  d.hermiticity_error = max_abs(rho - rho.adjoint());
  d.trace_error = std::abs(rho.trace() - Complex(1.0, 0.0));
  Eigen::SelfAdjointEigenSolver<Operator> es(hermitize(rho), Eigen::EigenvaluesOnly);
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  return d;
}

// Contract for states handed between modules: unit trace to 1e-10 and
// spectrum bounded below by -1e-10.
inline void validate_density(const Operator& rho, double trace_tol = 1e-10,
                             double eig_floor = -1e-10) {
  const DensityDiagnostics d = density_diagnostics(rho);
  if (d.hermiticity_error > 1e-10) {
    throw std::invalid_argument("density matrix is not Hermitian");
  }
  if (d.trace_error > trace_tol) {
    throw std::invalid_argument("density matrix trace deviates from one");
  }
  if (d.min_eigenvalue < eig_floor) {
    throw std::invalid_argument("density matrix has a significant negative eigenvalue");
  }
}

// 1/2 * sum |eig(rho - sigma)| for Hermitian arguments.
inline double trace_distance(const Operator& rho, const Operator& sigma) {
  Eigen::SelfAdjointEigenSolver<Operator> es(hermitize(rho - sigma), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline double expectation(const Operator& rho, const Operator& obs) {
  return ((rho * obs).trace()).real();
}

inline Complex expectation_c(const Operator& rho, const Operator& obs) {
  return (rho * obs).trace();
}

}  // namespace aqrm
