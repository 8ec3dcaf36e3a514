#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "qdas/ensemble.hpp"
#include "qdas/matrix.hpp"
#include "qdas/rng.hpp"

namespace qdas {

constexpr int kObservationSize = 147;  // 7 x 7 x 3 egocentric window
constexpr int kActionCount = 6;

struct LinearLayer {
  Mat weight;  // out x in
  std::vector<double> bias;

  LinearLayer() = default;
  LinearLayer(int out, int in) : weight(out, in), bias(static_cast<std::size_t>(out), 0.0) {}

  int out_dim() const { return weight.rows(); }
  int in_dim() const { return weight.cols(); }
  int param_count() const { return weight.rows() * weight.cols() + static_cast<int>(bias.size()); }

  std::vector<double> forward(std::span<const double> x) const {
    auto y = weight.mul(x);
    for (int r = 0; r < out_dim(); ++r) y[static_cast<std::size_t>(r)] += bias[static_cast<std::size_t>(r)];
    return y;
  }

  // U[-1/sqrt(fan_in), +1/sqrt(fan_in)]
  void init_uniform(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim()));
    for (double& v : weight.data()) v = rng.uniform(-bound, bound);
    for (double& v : bias) v = rng.uniform(-bound, bound);
  }
};

// Hybrid actor-critic Q(s) = heads(body(input_map(s))): a classical
// 147 -> n map feeding the quantum body, whose n expectation values feed a
// policy head (6 logits) and a value head (scalar). One worker thread owns
// each instance; copies are independent.
struct ActorCritic {
  LinearLayer input_map;    // 147 -> n_qubits
  DiffQASStack body;        // mixture blocks, or one pinned candidate
  LinearLayer policy_head;  // n_qubits -> 6
  LinearLayer value_head;   // n_qubits -> 1
  GradientMode gradient_mode = GradientMode::Adjoint;

  int n_qubits() const { return body.blocks.front().n_qubits; }

  static ActorCritic search_model(int n_qubits = 8, int n_layers = 2, int n_blocks = 1) {
    ActorCritic m;
    m.input_map = LinearLayer(n_qubits, kObservationSize);
    m.body = DiffQASStack::ensemble(n_blocks, n_qubits, n_layers);
    m.policy_head = LinearLayer(kActionCount, n_qubits);
    m.value_head = LinearLayer(1, n_qubits);
    return m;
  }

  static ActorCritic fixed_model(const CircuitDescriptor& desc) {
    ActorCritic m;
    m.input_map = LinearLayer(desc.n_qubits, kObservationSize);
    m.body.blocks.push_back(EnsembleBlock::single(desc));
    m.policy_head = LinearLayer(kActionCount, desc.n_qubits);
    m.value_head = LinearLayer(1, desc.n_qubits);
    return m;
  }

  // Classical layers U[-1/sqrt(fan_in), .]; rotation angles U[-pi, pi];
  // structural weights stay at their uniform 1/N initialization.
  void init_params(Rng& rng) {
    input_map.init_uniform(rng);
    for (EnsembleBlock& b : body.blocks)
      for (auto& th : b.theta)
        for (double& v : th) v = rng.uniform(-std::numbers::pi, std::numbers::pi);
    policy_head.init_uniform(rng);
    value_head.init_uniform(rng);
  }

  int param_count() const {
    int total = input_map.param_count();
    for (const EnsembleBlock& b : body.blocks) {
      total += b.candidate_count() * b.params_per_candidate();
      if (b.train_weights) total += b.candidate_count();
    }
    total += policy_head.param_count() + value_head.param_count();
    return total;
  }
};

// Per-evaluation cache; everything backward() needs, self-contained so
// rollouts can hold one per transition.
struct ModelForward {
  std::vector<double> obs;
  std::vector<double> x;  // encoding input = input_map(obs)
  StackForward body;
  std::array<double, kActionCount> logits{};
  double value = 0.0;
};

inline ModelForward model_forward(const ActorCritic& m, std::span<const double> obs) {
  if (static_cast<int>(obs.size()) != m.input_map.in_dim())
    throw std::invalid_argument("model_forward: observation length mismatch");
  ModelForward fwd;
  fwd.obs.assign(obs.begin(), obs.end());
  fwd.x = m.input_map.forward(obs);
  fwd.body = stack_forward(m.body, fwd.x);
  const auto logits = m.policy_head.forward(fwd.body.output());
  std::copy(logits.begin(), logits.end(), fwd.logits.begin());
  fwd.value = m.value_head.forward(fwd.body.output())[0];
  return fwd;
}

// Flattening order, shared with the global parameter store:
//   input_map.weight (row-major), input_map.bias,
//   per block: theta_0 .. theta_{C-1}, then weights (ensemble blocks only),
//   policy_head.weight, policy_head.bias, value_head.weight, value_head.bias.
inline std::vector<double> flatten_params(const ActorCritic& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.param_count()));
  const auto append_layer = [&out](const LinearLayer& l) {
    out.insert(out.end(), l.weight.data().begin(), l.weight.data().end());
    out.insert(out.end(), l.bias.begin(), l.bias.end());
  };
  append_layer(m.input_map);
  for (const EnsembleBlock& b : m.body.blocks) {
    for (const auto& th : b.theta) out.insert(out.end(), th.begin(), th.end());
    if (b.train_weights) out.insert(out.end(), b.weights.begin(), b.weights.end());
  }
  append_layer(m.policy_head);
  append_layer(m.value_head);
  return out;
}

inline void load_params(ActorCritic& m, std::span<const double> flat) {
  if (static_cast<int>(flat.size()) != m.param_count())
    throw std::invalid_argument("load_params: parameter vector length mismatch");
  std::size_t pos = 0;
  const auto read_layer = [&](LinearLayer& l) {
    for (double& v : l.weight.data()) v = flat[pos++];
    for (double& v : l.bias) v = flat[pos++];
  };
  read_layer(m.input_map);
  for (EnsembleBlock& b : m.body.blocks) {
    for (auto& th : b.theta)
      for (double& v : th) v = flat[pos++];
    if (b.train_weights)
      for (double& v : b.weights) v = flat[pos++];
  }
  read_layer(m.policy_head);
  read_layer(m.value_head);
}

// Accumulates d(loss)/d(params) into `grad` (flattening order above) given
// upstream gradients on the logits and the value. The chain runs through
// the linear heads, the mixture stack, and the input map.
inline void model_backward(const ActorCritic& m, const ModelForward& fwd,
                           std::span<const double> grad_logits, double grad_value,
                           std::span<double> grad) {
  if (static_cast<int>(grad.size()) != m.param_count())
    throw std::invalid_argument("model_backward: gradient buffer length mismatch");
  if (static_cast<int>(grad_logits.size()) != kActionCount)
    throw std::invalid_argument("model_backward: grad_logits must have 6 entries");
  if (fwd.obs.size() != static_cast<std::size_t>(m.input_map.in_dim()) ||
      fwd.body.blocks.size() != m.body.blocks.size())
    throw std::logic_error("model_backward: forward cache does not match this model");

  const int n = m.n_qubits();
  const std::vector<double>& y = fwd.body.output();

  // Heads.
  std::vector<double> grad_y(static_cast<std::size_t>(n), 0.0);
  std::size_t pos = static_cast<std::size_t>(m.input_map.param_count());
  for (const EnsembleBlock& b : m.body.blocks) {
    pos += static_cast<std::size_t>(b.candidate_count() * b.params_per_candidate());
    if (b.train_weights) pos += static_cast<std::size_t>(b.candidate_count());
  }
  std::size_t p = pos;  // policy head segment
  for (int r = 0; r < kActionCount; ++r)
    for (int c = 0; c < n; ++c)
      grad[p++] += grad_logits[static_cast<std::size_t>(r)] * y[static_cast<std::size_t>(c)];
  for (int r = 0; r < kActionCount; ++r) grad[p++] += grad_logits[static_cast<std::size_t>(r)];
  for (int c = 0; c < n; ++c) grad[p++] += grad_value * y[static_cast<std::size_t>(c)];
  grad[p++] += grad_value;

  for (int c = 0; c < n; ++c) {
    double s = grad_value * m.value_head.weight(0, c);
    for (int r = 0; r < kActionCount; ++r)
      s += grad_logits[static_cast<std::size_t>(r)] * m.policy_head.weight(r, c);
    grad_y[static_cast<std::size_t>(c)] = s;
  }

  // Quantum body.
  const StackGradients sg = stack_backward(m.body, fwd.body, grad_y, m.gradient_mode);
  p = static_cast<std::size_t>(m.input_map.param_count());
  for (std::size_t mb = 0; mb < m.body.blocks.size(); ++mb) {
    for (const auto& gt : sg.blocks[mb].grad_theta)
      for (double v : gt) grad[p++] += v;
    if (m.body.blocks[mb].train_weights)
      for (double v : sg.blocks[mb].grad_w) grad[p++] += v;
  }

  // Input map.
  p = 0;
  for (int r = 0; r < n; ++r) {
    const double gr = sg.grad_x[static_cast<std::size_t>(r)];
    for (int c = 0; c < m.input_map.in_dim(); ++c)
      grad[p++] += gr * fwd.obs[static_cast<std::size_t>(c)];
  }
  for (int r = 0; r < n; ++r) grad[p++] += sg.grad_x[static_cast<std::size_t>(r)];
}

inline std::array<double, kActionCount> softmax(std::span<const double> logits) {
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  std::array<double, kActionCount> probs{};
  double z = 0.0;
  for (int a = 0; a < kActionCount; ++a) {
    probs[static_cast<std::size_t>(a)] = std::exp(logits[static_cast<std::size_t>(a)] - mx);
    z += probs[static_cast<std::size_t>(a)];
  }
  for (double& v : probs) v /= z;
  return probs;
}

inline std::array<double, kActionCount> log_softmax(std::span<const double> logits) {
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double z = 0.0;
  for (double v : logits) z += std::exp(v - mx);
  const double log_z = std::log(z);
  std::array<double, kActionCount> out{};
  for (int a = 0; a < kActionCount; ++a)
    out[static_cast<std::size_t>(a)] = logits[static_cast<std::size_t>(a)] - mx - log_z;
  return out;
}

struct ActionSample {
  int action = 0;
  double logprob = 0.0;
};

inline ActionSample sample_action(std::span<const double> logits, Rng& rng) {
  for (double v : logits)
    if (!std::isfinite(v)) throw std::runtime_error("sample_action: non-finite logits");
  const auto probs = softmax(logits);
  const int action = rng.categorical(probs);
  return {action, log_softmax(logits)[static_cast<std::size_t>(action)]};
}

}  // namespace qdas
