#pragma once

// Brute-force reference simulator for small qubit counts. Builds full
// 2^n x 2^n gate matrices from scratch (its own gate definitions, its own
// circuit assembly from the descriptor fields) and multiplies them into the
// state, staying independent of the library's in-place update path.

#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "qdas/ansatz.hpp"

namespace qdas::test {

using cmat = std::vector<std::vector<std::complex<double>>>;
using cvec = std::vector<std::complex<double>>;

inline cmat identity_matrix(std::size_t dim) {
  cmat m(dim, cvec(dim, {0, 0}));
  for (std::size_t i = 0; i < dim; ++i) m[i][i] = 1.0;
  return m;
}

inline cmat kron(const cmat& a, const cmat& b) {
  const std::size_t ar = a.size(), ac = a[0].size();
  const std::size_t br = b.size(), bc = b[0].size();
  cmat m(ar * br, cvec(ac * bc, {0, 0}));
  for (std::size_t i = 0; i < ar; ++i)
    for (std::size_t j = 0; j < ac; ++j)
      for (std::size_t k = 0; k < br; ++k)
        for (std::size_t l = 0; l < bc; ++l)
          m[i * br + k][j * bc + l] = a[i][j] * b[k][l];
  return m;
}

inline cmat single_qubit_matrix(qdas::GateKind kind, double angle) {
  using namespace std::complex_literals;
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  switch (kind) {
    case qdas::GateKind::Hadamard: {
      const double r = 1.0 / std::sqrt(2.0);
      return {{r, r}, {r, -r}};
    }
    case qdas::GateKind::RotX:
      return {{c, -1i * s}, {-1i * s, c}};
    case qdas::GateKind::RotY:
      return {{c, -s}, {s, c}};
    case qdas::GateKind::RotZ:
      return {{std::exp(-0.5i * angle), 0.0}, {0.0, std::exp(0.5i * angle)}};
    default:
      throw std::invalid_argument("single_qubit_matrix: not a single-qubit gate");
  }
}

// Little-endian embedding: qubit 0 is the least-significant index bit, so a
// gate on qubit q is I_{2^(n-1-q)} (x) U (x) I_{2^q}.
inline cmat embed_single_qubit(const cmat& u, int qubit, int n_qubits) {
  cmat m = kron(identity_matrix(std::size_t{1} << (n_qubits - 1 - qubit)), u);
  return kron(m, identity_matrix(std::size_t{1} << qubit));
}

inline cmat cnot_matrix(int control, int target, int n_qubits) {
  const std::size_t dim = std::size_t{1} << n_qubits;
  cmat m(dim, cvec(dim, {0, 0}));
  for (std::size_t i = 0; i < dim; ++i) {
    const std::size_t j = (i >> control) & 1 ? i ^ (std::size_t{1} << target) : i;
    m[j][i] = 1.0;
  }
  return m;
}

inline cmat full_matrix(const qdas::Gate& g, int n_qubits) {
  if (g.kind == qdas::GateKind::Cnot) return cnot_matrix(g.control, g.target, n_qubits);
  return embed_single_qubit(single_qubit_matrix(g.kind, g.angle), g.target, n_qubits);
}

inline cvec mat_vec(const cmat& m, const cvec& v) {
  cvec out(m.size(), {0, 0});
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
  return out;
}

// Independent circuit assembly from the descriptor fields (mirrors the
// documented layout rather than calling gates_for).
inline std::vector<qdas::Gate> oracle_gate_sequence(const qdas::CircuitDescriptor& d,
                                                    std::span<const double> x,
                                                    std::span<const double> theta) {
  std::vector<qdas::Gate> gates;
  const int n = d.n_qubits;
  if (d.encoding.use_hadamard)
    for (int i = 0; i < n; ++i) gates.push_back(qdas::Gate::hadamard(i));
  for (int i = 0; i < n; ++i)
    gates.push_back(qdas::rotation_gate(d.encoding.axis, i, x[static_cast<std::size_t>(i)]));
  for (int layer = 0; layer < d.n_layers; ++layer) {
    for (int i = 0; i + 1 < n; ++i) gates.push_back(qdas::Gate::cnot(i, i + 1));
    if (d.variational.entangler == qdas::Entangler::Ring && n > 1)
      gates.push_back(qdas::Gate::cnot(n - 1, 0));
    for (int i = 0; i < n; ++i)
      gates.push_back(qdas::rotation_gate(d.variational.axis, i,
                                          theta[static_cast<std::size_t>(layer * n + i)]));
  }
  return gates;
}

inline cvec dense_final_state(const qdas::CircuitDescriptor& d,
                              std::span<const double> x,
                              std::span<const double> theta) {
  cvec state(std::size_t{1} << d.n_qubits, {0, 0});
  state[0] = 1.0;
  for (const qdas::Gate& g : oracle_gate_sequence(d, x, theta))
    state = mat_vec(full_matrix(g, d.n_qubits), state);
  return state;
}

inline std::vector<double> dense_run_circuit(const qdas::CircuitDescriptor& d,
                                             std::span<const double> x,
                                             std::span<const double> theta) {
  const cvec state = dense_final_state(d, x, theta);
  std::vector<double> out(static_cast<std::size_t>(d.n_qubits), 0.0);
  for (int k = 0; k < d.n_qubits; ++k) {
    double z = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i)
      z += ((i >> k) & 1 ? -1.0 : 1.0) * std::norm(state[i]);
    out[static_cast<std::size_t>(k)] = z;
  }
  return out;
}

}  // namespace qdas::test
