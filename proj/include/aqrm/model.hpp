#pragma once

// Anisotropic Rabi Hamiltonian
//   H = w a'a + (D/2) sz + l1 (a s+ + a' s-) + l2 (a' s+ + a s-)
// together with its conserved excitation parity P = exp(i pi N),
// N = a'a + s+ s-. l2 = 0 is the rotating-wave model, l1 = 0 the
// counter-rotating one, l1 = l2 the isotropic Rabi model.

#include <cmath>
#include <stdexcept>

#include "aqrm/fock.hpp"
#include "aqrm/types.hpp"

namespace aqrm {

// Production truncation rule; displaced wells at coupling l need roughly
// (l/w)^2 quanta plus tail room.
inline int cutoff_rule(double lambda_max, double omega) {
  return static_cast<int>(std::ceil(12.0 + 6.0 * (lambda_max / omega) * (lambda_max / omega)));
}

struct ModelParams {
  double omega = 1.0;
  double delta = 1.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  int cutoff = 0;  // 0 requests the rule-based cutoff

  void validate() const {
    if (!(omega > 0)) throw std::invalid_argument("ModelParams: omega must be positive");
    if (delta < 0 || lambda1 < 0 || lambda2 < 0) {
      throw std::invalid_argument("ModelParams: delta and couplings must be non-negative");
    }
    if (cutoff != 0 && cutoff < 2) {
      throw std::invalid_argument("ModelParams: explicit cutoff must be >= 2");
    }
  }

  int resolved_cutoff() const {
    if (cutoff > 0) return cutoff;
    return cutoff_rule(std::max(lambda1, lambda2), omega);
  }

  HilbertConfig hilbert() const { return HilbertConfig{resolved_cutoff()}; }
};

// Parity of the bare basis state |s, n>: (-1)^(n + [s = e]).
inline int basis_parity(int qubit_index, int fock_index) {
  const int excitations = fock_index + (qubit_index == kExcited ? 1 : 0);
  return (excitations % 2 == 0) ? 1 : -1;
}

// Diagonal with entries exactly +-1; squares to the identity.
inline Operator parity_operator(const HilbertConfig& cfg) {
  cfg.validate();
  const int d = cfg.total_dim();
  Operator p = Operator::Zero(d, d);
  for (int s = 0; s < 2; ++s) {
    for (int n = 0; n < cfg.fock_cutoff; ++n) {
      const int i = composite_index(s, n, cfg);
      p(i, i) = static_cast<double>(basis_parity(s, n));
    }
  }
  return p;
}

inline Operator build_hamiltonian(const ModelParams& p) {
  p.validate();
  const HilbertConfig cfg = p.hilbert();
  const Operator a = annihilation(cfg);
  const Operator ad = a.adjoint();
  const Operator h =
      p.omega * embed_boson(ad * a, cfg) +
      0.5 * p.delta * embed_qubit(qubit_operator(QubitOp::sz), cfg) +
      p.lambda1 * (embed(qubit_operator(QubitOp::sp), a, cfg) +
                   embed(qubit_operator(QubitOp::sm), ad, cfg)) +
      p.lambda2 * (embed(qubit_operator(QubitOp::sp), ad, cfg) +
                   embed(qubit_operator(QubitOp::sm), a, cfg));
  return h;
}

}  // namespace aqrm
