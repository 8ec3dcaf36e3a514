#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdas/statevector.hpp"

namespace qdas {

enum class Axis { X, Y, Z };
enum class Entangler { Chain, Ring };

// Input-encoding sub-circuit: optional Hadamard column, then one rotation
// per qubit carrying the input angles.
struct EncodingChoice {
  bool use_hadamard = false;
  Axis axis = Axis::X;
  bool operator==(const EncodingChoice&) const = default;
};

// Trainable sub-circuit: entangling CNOT pattern, then one rotation per
// qubit, repeated per layer.
struct VariationalChoice {
  Entangler entangler = Entangler::Chain;
  Axis axis = Axis::X;
  bool operator==(const VariationalChoice&) const = default;
};

// One concrete circuit realization out of the 36-candidate family.
// Identity is a pure function of the fields, so descriptors serve as keys.
struct CircuitDescriptor {
  EncodingChoice encoding;
  VariationalChoice variational;
  int n_qubits = 8;
  int n_layers = 2;
  bool operator==(const CircuitDescriptor&) const = default;

  int param_count() const { return n_layers * n_qubits; }
};

constexpr int kCandidateCount = 36;

inline char axis_letter(Axis a) {
  switch (a) {
    case Axis::X: return 'X';
    case Axis::Y: return 'Y';
    case Axis::Z: return 'Z';
  }
  return '?';
}

inline Gate rotation_gate(Axis axis, int qubit, double angle) {
  switch (axis) {
    case Axis::X: return Gate::rot_x(qubit, angle);
    case Axis::Y: return Gate::rot_y(qubit, angle);
    case Axis::Z: return Gate::rot_z(qubit, angle);
  }
  throw std::logic_error("unreachable");
}

// All 36 candidates in a fixed lexicographic order:
//   hadamard {off, on} x encoding axis {X,Y,Z} x entangler {chain, ring}
//   x variational axis {X,Y,Z}.
// The order is stable across runs and processes; index 0 is
// (no Hadamard, RotX encoding, chain, RotX variational).
inline std::vector<CircuitDescriptor> enumerate_all(int n_qubits = 8, int n_layers = 2) {
  static constexpr std::array<Axis, 3> axes{Axis::X, Axis::Y, Axis::Z};
  std::vector<CircuitDescriptor> out;
  out.reserve(kCandidateCount);
  for (bool hadamard : {false, true}) {
    for (Axis enc_axis : axes) {
      for (Entangler ent : {Entangler::Chain, Entangler::Ring}) {
        for (Axis var_axis : axes) {
          out.push_back({{hadamard, enc_axis}, {ent, var_axis}, n_qubits, n_layers});
        }
      }
    }
  }
  return out;
}

// The six hand-crafted reference circuits. All use a leading Hadamard
// column and the chain entangler; only the rotation axes vary:
//   k=1 (Ry,Ry)  k=2 (Rz,Ry)  k=3 (Rz,Rz)  k=4 (Ry,Rz)  k=5 (Rx,Rz)  k=6 (Rx,Ry)
inline CircuitDescriptor baseline(int k, int n_qubits = 8, int n_layers = 2) {
  static constexpr std::array<std::pair<Axis, Axis>, 6> table{{
      {Axis::Y, Axis::Y},
      {Axis::Z, Axis::Y},
      {Axis::Z, Axis::Z},
      {Axis::Y, Axis::Z},
      {Axis::X, Axis::Z},
      {Axis::X, Axis::Y},
  }};
  if (k < 1 || k > 6)
    throw std::invalid_argument("baseline: k must be in 1..6");
  const auto [enc, var] = table[static_cast<std::size_t>(k - 1)];
  return {{true, enc}, {Entangler::Chain, var}, n_qubits, n_layers};
}

inline void append_entangler(std::vector<Gate>& gates, Entangler ent, int n_qubits) {
  for (int i = 0; i + 1 < n_qubits; ++i) gates.push_back(Gate::cnot(i, i + 1));
  if (ent == Entangler::Ring && n_qubits > 1) gates.push_back(Gate::cnot(n_qubits - 1, 0));
}

// Which angle a gate carries: an input component, a trainable parameter,
// or none (H, CNOT). `index` points into x or theta respectively.
struct ParamTag {
  enum class Kind { None, Input, Theta } kind = Kind::None;
  int index = -1;
};

struct BuiltCircuit {
  std::vector<Gate> gates;
  std::vector<ParamTag> tags;  // aligned with gates
};

// Materializes the gate list:
//   [H on every qubit]? ++ [Rot_enc(x_i) on qubit i]
//   ++ per layer l: [entangler] ++ [Rot_var(theta[l*n + i]) on qubit i]
inline BuiltCircuit build_circuit(const CircuitDescriptor& desc,
                                  std::span<const double> x,
                                  std::span<const double> theta) {
  const int n = desc.n_qubits;
  if (static_cast<int>(x.size()) != n)
    throw std::invalid_argument("build_circuit: input length must equal qubit count");
  if (static_cast<int>(theta.size()) != desc.param_count())
    throw std::invalid_argument("build_circuit: parameter length must be n_layers * n_qubits");

  BuiltCircuit c;
  c.gates.reserve(static_cast<std::size_t>(n * (2 + 2 * desc.n_layers) + 2));
  const auto emit = [&c](Gate g, ParamTag tag = {}) {
    c.gates.push_back(g);
    c.tags.push_back(tag);
  };
  if (desc.encoding.use_hadamard)
    for (int i = 0; i < n; ++i) emit(Gate::hadamard(i));
  for (int i = 0; i < n; ++i)
    emit(rotation_gate(desc.encoding.axis, i, x[static_cast<std::size_t>(i)]),
         {ParamTag::Kind::Input, i});
  for (int layer = 0; layer < desc.n_layers; ++layer) {
    const std::size_t ent_begin = c.gates.size();
    append_entangler(c.gates, desc.variational.entangler, n);
    c.tags.resize(c.tags.size() + (c.gates.size() - ent_begin));
    for (int i = 0; i < n; ++i)
      emit(rotation_gate(desc.variational.axis, i,
                         theta[static_cast<std::size_t>(layer * n + i)]),
           {ParamTag::Kind::Theta, layer * n + i});
  }
  return c;
}

inline std::vector<Gate> gates_for(const CircuitDescriptor& desc,
                                   std::span<const double> x,
                                   std::span<const double> theta) {
  return build_circuit(desc, x, theta).gates;
}

// Human-readable descriptor key, e.g. "H+|encY|chain|varY|L2|Q8".
// Round-trips through parse_descriptor.
inline std::string to_string(const CircuitDescriptor& d) {
  std::string s;
  s += d.encoding.use_hadamard ? "H+" : "H-";
  s += "|enc";
  s += axis_letter(d.encoding.axis);
  s += d.variational.entangler == Entangler::Chain ? "|chain" : "|ring";
  s += "|var";
  s += axis_letter(d.variational.axis);
  s += "|L" + std::to_string(d.n_layers);
  s += "|Q" + std::to_string(d.n_qubits);
  return s;
}

inline Axis parse_axis(char c) {
  switch (c) {
    case 'X': return Axis::X;
    case 'Y': return Axis::Y;
    case 'Z': return Axis::Z;
    default: throw std::invalid_argument(std::string("bad axis letter: ") + c);
  }
}

inline CircuitDescriptor parse_descriptor(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto bar = s.find('|', pos);
    parts.push_back(s.substr(pos, bar == std::string::npos ? std::string::npos : bar - pos));
    if (bar == std::string::npos) break;
    pos = bar + 1;
  }
  if (parts.size() != 6 || parts[0].size() != 2 || parts[0][0] != 'H' ||
      parts[1].size() != 4 || parts[1].substr(0, 3) != "enc" ||
      (parts[2] != "chain" && parts[2] != "ring") ||
      parts[3].size() != 4 || parts[3].substr(0, 3) != "var" ||
      parts[4].size() < 2 || parts[4][0] != 'L' ||
      parts[5].size() < 2 || parts[5][0] != 'Q')
    throw std::invalid_argument("parse_descriptor: malformed descriptor string: " + s);

  CircuitDescriptor d;
  d.encoding.use_hadamard = parts[0][1] == '+';
  if (!d.encoding.use_hadamard && parts[0][1] != '-')
    throw std::invalid_argument("parse_descriptor: bad Hadamard flag in: " + s);
  d.encoding.axis = parse_axis(parts[1][3]);
  d.variational.entangler = parts[2] == "chain" ? Entangler::Chain : Entangler::Ring;
  d.variational.axis = parse_axis(parts[3][3]);
  d.n_layers = std::stoi(parts[4].substr(1));
  d.n_qubits = std::stoi(parts[5].substr(1));
  return d;
}

}  // namespace qdas
