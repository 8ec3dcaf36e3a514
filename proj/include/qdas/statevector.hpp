#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdas {

using cdouble = std::complex<double>;

enum class GateKind { Hadamard, RotX, RotY, RotZ, Cnot };

// One circuit element. Rotations are exp(-i * angle/2 * P) for P in {X,Y,Z}.
struct Gate {
  GateKind kind;
  int target = 0;
  int control = -1;    // Cnot only
  double angle = 0.0;  // rotation kinds only

  static Gate hadamard(int target) { return {GateKind::Hadamard, target}; }
  static Gate rot_x(int target, double angle) { return {GateKind::RotX, target, -1, angle}; }
  static Gate rot_y(int target, double angle) { return {GateKind::RotY, target, -1, angle}; }
  static Gate rot_z(int target, double angle) { return {GateKind::RotZ, target, -1, angle}; }
  static Gate cnot(int control, int target) { return {GateKind::Cnot, target, control}; }

  bool is_rotation() const { return kind != GateKind::Hadamard && kind != GateKind::Cnot; }

  // Adjoint. H and CNOT are self-inverse, rotations negate the angle.
  Gate dagger() const {
    Gate g = *this;
    if (g.is_rotation()) g.angle = -g.angle;
    return g;
  }
};

// Dense n-qubit state, little-endian indexing: qubit k is bit k of the
// basis index. Amplitudes are mutated in place; the type itself has value
// semantics and instances are freely copyable across threads.
class StateVector {
 public:
  explicit StateVector(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > 16)
      throw std::invalid_argument("StateVector: qubit count must be in [1, 16]");
    amp_.assign(std::size_t{1} << n_qubits, cdouble{0.0, 0.0});
    amp_[0] = 1.0;
  }

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amp_.size(); }
  const std::vector<cdouble>& amplitudes() const { return amp_; }
  cdouble& operator[](std::size_t i) { return amp_[i]; }
  const cdouble& operator[](std::size_t i) const { return amp_[i]; }

  void apply(const Gate& g) {
    switch (g.kind) {
      case GateKind::Hadamard: apply_hadamard(g.target); break;
      case GateKind::RotX: apply_rot_x(g.target, g.angle); break;
      case GateKind::RotY: apply_rot_y(g.target, g.angle); break;
      case GateKind::RotZ: apply_rot_z(g.target, g.angle); break;
      case GateKind::Cnot: apply_cnot(g.control, g.target); break;
    }
  }

  void apply(const std::vector<Gate>& gates) {
    for (const Gate& g : gates) apply(g);
  }

  void apply_hadamard(int target) {
    check_qubit(target);
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    for_each_pair(target, [&](cdouble& a0, cdouble& a1) {
      const cdouble t0 = a0;
      a0 = inv_sqrt2 * (t0 + a1);
      a1 = inv_sqrt2 * (t0 - a1);
    });
  }

  // exp(-i a X/2) = [[cos, -i sin], [-i sin, cos]] on the half angle.
  void apply_rot_x(int target, double angle) {
    check_qubit(target);
    const double c = std::cos(angle / 2), s = std::sin(angle / 2);
    for_each_pair(target, [&](cdouble& a0, cdouble& a1) {
      const cdouble t0 = a0;
      a0 = c * t0 + cdouble{0, -s} * a1;
      a1 = cdouble{0, -s} * t0 + c * a1;
    });
  }

  // exp(-i a Y/2) = [[cos, -sin], [sin, cos]] on the half angle.
  void apply_rot_y(int target, double angle) {
    check_qubit(target);
    const double c = std::cos(angle / 2), s = std::sin(angle / 2);
    for_each_pair(target, [&](cdouble& a0, cdouble& a1) {
      const cdouble t0 = a0;
      a0 = c * t0 - s * a1;
      a1 = s * t0 + c * a1;
    });
  }

  // exp(-i a Z/2) = diag(e^{-ia/2}, e^{+ia/2}).
  void apply_rot_z(int target, double angle) {
    check_qubit(target);
    const cdouble p0{std::cos(angle / 2), -std::sin(angle / 2)};
    const cdouble p1 = std::conj(p0);
    for_each_pair(target, [&](cdouble& a0, cdouble& a1) {
      a0 *= p0;
      a1 *= p1;
    });
  }

  void apply_cnot(int control, int target) {
    check_qubit(control);
    check_qubit(target);
    if (control == target)
      throw std::invalid_argument("cnot: control and target must differ");
    const std::size_t cbit = std::size_t{1} << control;
    const std::size_t tbit = std::size_t{1} << target;
    for (std::size_t i = 0; i < amp_.size(); ++i) {
      if ((i & cbit) && !(i & tbit)) std::swap(amp_[i], amp_[i | tbit]);
    }
  }

  // Pauli application, used by the adjoint gradient sweep.
  void apply_pauli_x(int target) {
    check_qubit(target);
    for_each_pair(target, [](cdouble& a0, cdouble& a1) { std::swap(a0, a1); });
  }

  void apply_pauli_y(int target) {
    check_qubit(target);
    for_each_pair(target, [](cdouble& a0, cdouble& a1) {
      const cdouble t0 = a0;
      a0 = cdouble{0, -1} * a1;
      a1 = cdouble{0, 1} * t0;
    });
  }

  void apply_pauli_z(int target) {
    check_qubit(target);
    for_each_pair(target, [](cdouble&, cdouble& a1) { a1 = -a1; });
  }

  double norm_sq() const {
    double s = 0.0;
    for (const cdouble& a : amp_) s += std::norm(a);
    return s;
  }

 private:
  void check_qubit(int q) const {
    if (q < 0 || q >= n_qubits_)
      throw std::invalid_argument("qubit index " + std::to_string(q) +
                                  " out of range for " + std::to_string(n_qubits_) + " qubits");
  }

  // Visits each (|...0_t...>, |...1_t...>) amplitude pair exactly once.
  template <typename F>
  void for_each_pair(int target, F&& f) {
    const std::size_t stride = std::size_t{1} << target;
    const std::size_t dim = amp_.size();
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
      for (std::size_t i = base; i < base + stride; ++i) {
        f(amp_[i], amp_[i + stride]);
      }
    }
  }

  int n_qubits_;
  std::vector<cdouble> amp_;
};

inline StateVector zero_state(int n_qubits) { return StateVector(n_qubits); }

// Value-semantic single-gate application.
inline StateVector apply_gate(StateVector state, const Gate& g) {
  state.apply(g);
  return state;
}

// <Z_k> = sum_i (+1 if bit k of i is 0 else -1) * |amp_i|^2.
inline double expectation_z(const StateVector& state, int qubit) {
  if (qubit < 0 || qubit >= state.n_qubits())
    throw std::invalid_argument("expectation_z: qubit index out of range");
  const std::size_t bit = std::size_t{1} << qubit;
  double val = 0.0;
  for (std::size_t i = 0; i < state.dim(); ++i) {
    const double p = std::norm(state[i]);
    val += (i & bit) ? -p : p;
  }
  return val;
}

inline cdouble inner_product(const StateVector& bra, const StateVector& ket) {
  cdouble s{0.0, 0.0};
  for (std::size_t i = 0; i < bra.dim(); ++i) s += std::conj(bra[i]) * ket[i];
  return s;
}

}  // namespace qdas
