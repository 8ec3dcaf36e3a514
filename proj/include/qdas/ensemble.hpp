#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <vector>

#include "qdas/ansatz.hpp"
#include "qdas/simulator.hpp"

namespace qdas {

enum class GradientMode { Adjoint, ParamShift };

// The mixture unit: candidate circuits C_j with independent parameters
// theta_j and raw (unnormalized) structural weights w_j, evaluated as
//   y = sum_j w_j f_Cj(x).
// Immutable during a forward/backward pair; workers own private copies.
struct EnsembleBlock {
  std::vector<CircuitDescriptor> descriptors;
  std::vector<std::vector<double>> theta;  // theta[j] has n_layers * n_qubits entries
  std::vector<double> weights;
  int n_qubits = 8;
  int n_layers = 2;
  bool train_weights = true;  // false pins the mixture (fixed-circuit mode)

  int candidate_count() const { return static_cast<int>(descriptors.size()); }
  int params_per_candidate() const { return n_layers * n_qubits; }

  // The standard 36-candidate search space, zero-initialized parameters,
  // uniform weights.
  static EnsembleBlock full_ensemble(int n_qubits = 8, int n_layers = 2) {
    EnsembleBlock b;
    b.n_qubits = n_qubits;
    b.n_layers = n_layers;
    b.descriptors = enumerate_all(n_qubits, n_layers);
    b.theta.assign(b.descriptors.size(),
                   std::vector<double>(static_cast<std::size_t>(b.params_per_candidate()), 0.0));
    b.weights = init_structural_weights(b.descriptors.size());
    return b;
  }

  // A single fixed circuit wrapped in the same interface (weight pinned at 1).
  static EnsembleBlock single(const CircuitDescriptor& desc) {
    EnsembleBlock b;
    b.n_qubits = desc.n_qubits;
    b.n_layers = desc.n_layers;
    b.descriptors = {desc};
    b.theta.assign(1, std::vector<double>(static_cast<std::size_t>(desc.param_count()), 0.0));
    b.weights = {1.0};
    b.train_weights = false;
    return b;
  }

  static std::vector<double> init_structural_weights(std::size_t count) {
    return std::vector<double>(count, 1.0 / static_cast<double>(count));
  }
};

inline std::vector<double> init_structural_weights(const EnsembleBlock& b) {
  return EnsembleBlock::init_structural_weights(b.descriptors.size());
}

// Forward cache: the block input plus every candidate output, kept so the
// backward pass can form grad_w by dot products without re-simulating.
struct BlockForward {
  std::vector<double> input;
  std::vector<std::vector<double>> candidate_outputs;
  std::vector<double> output;
};

inline BlockForward block_forward(const EnsembleBlock& b, std::span<const double> x) {
  if (static_cast<int>(x.size()) != b.n_qubits)
    throw std::invalid_argument("block_forward: input length must equal qubit count");

  BlockForward fwd;
  fwd.input.assign(x.begin(), x.end());
  fwd.candidate_outputs.reserve(b.descriptors.size());
  fwd.output.assign(static_cast<std::size_t>(b.n_qubits), 0.0);
  for (std::size_t j = 0; j < b.descriptors.size(); ++j) {
    fwd.candidate_outputs.push_back(run_circuit(b.descriptors[j], x, b.theta[j]));
    const double wj = b.weights[j];
    for (int k = 0; k < b.n_qubits; ++k)
      fwd.output[static_cast<std::size_t>(k)] +=
          wj * fwd.candidate_outputs[j][static_cast<std::size_t>(k)];
  }
  return fwd;
}

struct BlockGradients {
  std::vector<double> grad_w;
  std::vector<std::vector<double>> grad_theta;
  std::vector<double> grad_x;
};

// Chain rule through the mixture:
//   grad_w[j]     = upstream . f_Cj(x)
//   grad_theta[j] = w_j * (d f_Cj / d theta_j)^T upstream
//   grad_x        = sum_j w_j (d f_Cj / d x)^T upstream
// Candidates with w_j == 0 skip the circuit sweep; their contribution is
// identically zero.
inline BlockGradients block_backward(const EnsembleBlock& b, const BlockForward& fwd,
                                     std::span<const double> upstream,
                                     GradientMode mode = GradientMode::Adjoint) {
  if (static_cast<int>(fwd.input.size()) != b.n_qubits ||
      fwd.candidate_outputs.size() != b.descriptors.size())
    throw std::logic_error("block_backward: forward cache does not match this block");
  if (static_cast<int>(upstream.size()) != b.n_qubits)
    throw std::invalid_argument("block_backward: upstream length must equal qubit count");

  const auto n = static_cast<std::size_t>(b.n_qubits);
  BlockGradients g;
  g.grad_w.assign(b.descriptors.size(), 0.0);
  g.grad_theta.assign(b.descriptors.size(),
                      std::vector<double>(static_cast<std::size_t>(b.params_per_candidate()), 0.0));
  g.grad_x.assign(n, 0.0);

  for (std::size_t j = 0; j < b.descriptors.size(); ++j) {
    double dot = 0.0;
    for (std::size_t k = 0; k < n; ++k) dot += upstream[k] * fwd.candidate_outputs[j][k];
    g.grad_w[j] = dot;

    const double wj = b.weights[j];
    if (wj == 0.0) continue;

    if (mode == GradientMode::Adjoint) {
      const CircuitVjp vjp = adjoint_vjp(b.descriptors[j], fwd.input, b.theta[j], upstream);
      for (std::size_t p = 0; p < vjp.grad_theta.size(); ++p)
        g.grad_theta[j][p] = wj * vjp.grad_theta[p];
      for (std::size_t k = 0; k < n; ++k) g.grad_x[k] += wj * vjp.grad_x[k];
    } else {
      const CircuitJacobians jac = param_shift_gradients(b.descriptors[j], fwd.input, b.theta[j]);
      for (int p = 0; p < jac.d_theta.cols(); ++p) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k)
          s += upstream[k] * jac.d_theta(static_cast<int>(k), p);
        g.grad_theta[j][static_cast<std::size_t>(p)] = wj * s;
      }
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k)
          s += upstream[k] * jac.d_x(static_cast<int>(k), static_cast<int>(i));
        g.grad_x[i] += wj * s;
      }
    }
  }
  return g;
}

// M stacked mixture blocks; block m+1 encodes block m's output vector.
struct DiffQASStack {
  std::vector<EnsembleBlock> blocks;

  static DiffQASStack ensemble(int n_blocks, int n_qubits = 8, int n_layers = 2) {
    DiffQASStack s;
    for (int m = 0; m < n_blocks; ++m)
      s.blocks.push_back(EnsembleBlock::full_ensemble(n_qubits, n_layers));
    return s;
  }
};

struct StackForward {
  std::vector<BlockForward> blocks;
  const std::vector<double>& output() const { return blocks.back().output; }
};

inline StackForward stack_forward(const DiffQASStack& s, std::span<const double> x) {
  if (s.blocks.empty()) throw std::invalid_argument("stack_forward: empty stack");
  StackForward fwd;
  fwd.blocks.reserve(s.blocks.size());
  fwd.blocks.push_back(block_forward(s.blocks.front(), x));
  for (std::size_t m = 1; m < s.blocks.size(); ++m)
    fwd.blocks.push_back(block_forward(s.blocks[m], fwd.blocks.back().output));
  return fwd;
}

struct StackGradients {
  std::vector<BlockGradients> blocks;  // aligned with stack order
  std::vector<double> grad_x;          // gradient w.r.t. the stack input
};

inline StackGradients stack_backward(const DiffQASStack& s, const StackForward& fwd,
                                     std::span<const double> upstream,
                                     GradientMode mode = GradientMode::Adjoint) {
  if (fwd.blocks.size() != s.blocks.size())
    throw std::logic_error("stack_backward: forward cache does not match this stack");
  StackGradients g;
  g.blocks.resize(s.blocks.size());
  std::vector<double> up(upstream.begin(), upstream.end());
  for (std::size_t m = s.blocks.size(); m-- > 0;) {
    g.blocks[m] = block_backward(s.blocks[m], fwd.blocks[m], up, mode);
    up = g.blocks[m].grad_x;
  }
  g.grad_x = std::move(up);
  return g;
}

struct RankedCandidate {
  int index = 0;  // enumeration index within the block
  CircuitDescriptor descriptor;
  double weight = 0.0;
};

// Candidates sorted by descending weight; ties resolve to enumeration order.
inline std::vector<RankedCandidate> top_candidates(const EnsembleBlock& b, int k) {
  std::vector<RankedCandidate> ranked;
  ranked.reserve(b.descriptors.size());
  for (std::size_t j = 0; j < b.descriptors.size(); ++j)
    ranked.push_back({static_cast<int>(j), b.descriptors[j], b.weights[j]});
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedCandidate& a, const RankedCandidate& c) {
                     return a.weight > c.weight;
                   });
  if (k < static_cast<int>(ranked.size())) ranked.resize(static_cast<std::size_t>(k));
  return ranked;
}

}  // namespace qdas
