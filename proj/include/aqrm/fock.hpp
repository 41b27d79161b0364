#pragma once

// Elementary operators on the truncated boson mode, the qubit, and their
// composite. All functions are pure; matrices are built fresh on each call.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "aqrm/types.hpp"

namespace aqrm {

// Truncated annihilation operator: <n-1|a|n> = sqrt(n), n < fock_cutoff.
inline Operator annihilation(const HilbertConfig& cfg) {
  cfg.validate();
  Operator a = Operator::Zero(cfg.fock_cutoff, cfg.fock_cutoff);
  for (int n = 1; n < cfg.fock_cutoff; ++n) {
    a(n - 1, n) = std::sqrt(static_cast<double>(n));
  }
  return a;
}

inline Operator creation(const HilbertConfig& cfg) { return annihilation(cfg).adjoint(); }

inline Operator number_operator(const HilbertConfig& cfg) {
  cfg.validate();
  Operator n = Operator::Zero(cfg.fock_cutoff, cfg.fock_cutoff);
  for (int k = 0; k < cfg.fock_cutoff; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

enum class QubitOp { sx, sy, sz, sp, sm, id };

// Basis order {|e>, |g>} with sz|e> = +|e>.
inline Operator qubit_operator(QubitOp op) {
  Operator m = Operator::Zero(2, 2);
  switch (op) {
    case QubitOp::sx: m(0, 1) = 1.0; m(1, 0) = 1.0; break;
    case QubitOp::sy: m(0, 1) = Complex(0, -1); m(1, 0) = Complex(0, 1); break;
    case QubitOp::sz: m(0, 0) = 1.0; m(1, 1) = -1.0; break;
    case QubitOp::sp: m(0, 1) = 1.0; break;  // |e><g|
    case QubitOp::sm: m(1, 0) = 1.0; break;  // |g><e|
    case QubitOp::id: m.setIdentity(); break;
  }
  return m;
}

// Kronecker product in the fixed qubit (x) boson order.
inline Operator embed(const Operator& qubit, const Operator& boson, const HilbertConfig& cfg) {
  cfg.validate();
  if (qubit.rows() != 2 || qubit.cols() != 2) {
    throw std::invalid_argument("embed: qubit factor must be 2x2");
  }
  if (boson.rows() != cfg.fock_cutoff || boson.cols() != cfg.fock_cutoff) {
    throw std::invalid_argument("embed: boson factor does not match fock_cutoff");
  }
  const int n = cfg.fock_cutoff;
  Operator out(2 * n, 2 * n);
  for (int s = 0; s < 2; ++s) {
    for (int t = 0; t < 2; ++t) {
      out.block(s * n, t * n, n, n) = qubit(s, t) * boson;
    }
  }
  return out;
}

inline Operator embed_qubit(const Operator& qubit, const HilbertConfig& cfg) {
  return embed(qubit, Operator::Identity(cfg.fock_cutoff, cfg.fock_cutoff), cfg);
}

inline Operator embed_boson(const Operator& boson, const HilbertConfig& cfg) {
  return embed(qubit_operator(QubitOp::id), boson, cfg);
}

enum class Keep { qubit, boson };

inline Operator partial_trace(const Operator& rho, const HilbertConfig& cfg, Keep keep) {
  cfg.validate();
  const int n = cfg.fock_cutoff;
  if (rho.rows() != 2 * n || rho.cols() != 2 * n) {
    throw std::invalid_argument("partial_trace: operator does not match configuration");
  }
  if (keep == Keep::qubit) {
    Operator out = Operator::Zero(2, 2);
    for (int s = 0; s < 2; ++s) {
      for (int t = 0; t < 2; ++t) {
        out(s, t) = rho.block(s * n, t * n, n, n).trace();
      }
    }
    return out;
  }
  Operator out = Operator::Zero(n, n);
  for (int s = 0; s < 2; ++s) {
    out += rho.block(s * n, s * n, n, n);
  }
  return out;
}

// Transpose of the qubit factor only; the entanglement witness used by the
// negativity quantifier.
inline Operator partial_transpose_qubit(const Operator& rho, const HilbertConfig& cfg) {
  cfg.validate();
  const int n = cfg.fock_cutoff;
  if (rho.rows() != 2 * n || rho.cols() != 2 * n) {
    throw std::invalid_argument("partial_transpose_qubit: operator does not match configuration");
  }
  Operator out(2 * n, 2 * n);
  for (int s = 0; s < 2; ++s) {
    for (int t = 0; t < 2; ++t) {
      out.block(s * n, t * n, n, n) = rho.block(t * n, s * n, n, n);
    }
  }
  return out;
}

}  // namespace aqrm
