#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <deque>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "qdas/env.hpp"
#include "qdas/metrics.hpp"
#include "qdas/model.hpp"

namespace qdas {

// Raised when a rollout produces a non-finite loss; the worker discards the
// rollout and keeps going.
struct numerical_fault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  std::string env_name = "Empty-5x5";
  std::string mode = "diffqas";  // "diffqas" or "baseline-K", K in 1..6
  int n_workers = 80;
  double lr = 1e-4;
  double beta1 = 0.92;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double gamma = 0.9;
  int rollout_len = 5;  // L: steps between gradient computations
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  long max_episodes = 0;
  std::uint64_t seed = 0;
  int n_qubits = 8;
  int n_layers = 2;
  int n_blocks = 1;  // mixture stack depth M
  int window = 5000;  // rolling-statistics window
  GradientMode gradient_mode = GradientMode::Adjoint;

  long max_updates = 0;             // stop after this many store updates (0 = off)
  double target_rolling_mean = 0.0; // stop once the full window reaches this (0 = off)

  void validate() const {
    if (n_workers < 1) throw std::invalid_argument("config: n_workers must be >= 1");
    if (lr <= 0 || adam_eps <= 0) throw std::invalid_argument("config: lr and adam_eps must be > 0");
    if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
      throw std::invalid_argument("config: Adam betas must lie in [0, 1)");
    if (gamma <= 0 || gamma > 1) throw std::invalid_argument("config: gamma must be in (0, 1]");
    if (rollout_len < 1) throw std::invalid_argument("config: rollout_len must be >= 1");
    if (value_coef < 0 || entropy_coef < 0)
      throw std::invalid_argument("config: loss coefficients must be >= 0");
    if (max_episodes < 0) throw std::invalid_argument("config: max_episodes must be >= 0");
    if (window < 1) throw std::invalid_argument("config: window must be >= 1");
    if (n_qubits < 1 || n_qubits > 16) throw std::invalid_argument("config: n_qubits out of range");
    if (n_blocks < 1) throw std::invalid_argument("config: n_blocks must be >= 1");
    baseline_index();  // validates the mode string
  }

  // 0 for the search mode, 1..6 for a fixed reference circuit.
  int baseline_index() const {
    if (mode == "diffqas") return 0;
    if (mode.rfind("baseline-", 0) == 0 && mode.size() == 10 && mode[9] >= '1' && mode[9] <= '6')
      return mode[9] - '0';
    throw std::invalid_argument("config: mode must be 'diffqas' or 'baseline-K' (K in 1..6)");
  }
};

// Uninitialized model with the configured architecture (parameters come
// from the store or an explicit init).
inline ActorCritic build_model(const TrainConfig& cfg) {
  ActorCritic m = cfg.baseline_index() == 0
                      ? ActorCritic::search_model(cfg.n_qubits, cfg.n_layers, cfg.n_blocks)
                      : ActorCritic::fixed_model(
                            baseline(cfg.baseline_index(), cfg.n_qubits, cfg.n_layers));
  m.gradient_mode = cfg.gradient_mode;
  return m;
}

inline ActorCritic initialized_model(const TrainConfig& cfg) {
  ActorCritic m = build_model(cfg);
  Rng rng(mix_seed(cfg.seed, 0x1717));
  m.init_params(rng);
  return m;
}

struct Transition {
  ModelForward forward;  // obs, cached body outputs, logits, value estimate
  int action = 0;
  double reward = 0.0;
  double logprob = 0.0;
};

// Up to L transitions between gradient computations; bootstrap_value is 0
// for terminal fragments, V(s_{t+L}) otherwise.
struct Rollout {
  std::vector<Transition> transitions;
  double bootstrap_value = 0.0;
};

// R_t computed backward: R <- bootstrap; R <- r_t + gamma R.
inline std::vector<double> n_step_returns(const Rollout& rollout, double gamma) {
  if (rollout.transitions.empty())
    throw std::invalid_argument("n_step_returns: empty rollout");
  std::vector<double> returns(rollout.transitions.size(), 0.0);
  double r = rollout.bootstrap_value;
  for (std::size_t t = rollout.transitions.size(); t-- > 0;) {
    r = rollout.transitions[t].reward + gamma * r;
    returns[t] = r;
  }
  return returns;
}

struct EpisodeRecord {
  long episode_index = 0;
  int worker_id = 0;
  double score = 0.0;
  long steps = 0;
};

// Many-producer / single-consumer channel for episode records.
class EpisodeQueue {
 public:
  void push(const EpisodeRecord& r) {
    {
      std::lock_guard lock(mu_);
      q_.push_back(r);
    }
    cv_.notify_one();
  }

  std::optional<EpisodeRecord> pop_wait(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [this] { return !q_.empty(); });
    if (q_.empty()) return std::nullopt;
    EpisodeRecord r = q_.front();
    q_.pop_front();
    return r;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<EpisodeRecord> q_;
};

inline std::uint64_t fnv1a_bytes(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Shared parameter and optimizer state. snapshot() and apply_gradients()
// are individually atomic (whole-update granularity); everything else in
// training is worker-private. A checksum over the parameter bytes is
// refreshed inside every update and re-verified by every snapshot, so a
// torn read cannot go unnoticed.
class GlobalStore {
 public:
  GlobalStore(std::vector<double> initial_params, const TrainConfig& cfg,
              EpisodeQueue* queue = nullptr)
      : cfg_(cfg), queue_(queue), params_(std::move(initial_params)),
        m_(params_.size(), 0.0), v_(params_.size(), 0.0) {
    checksum_ = compute_checksum(params_);
  }

  std::size_t size() const { return params_.size(); }

  // Copies the parameter vector and verifies its embedded checksum.
  void snapshot(std::vector<double>& dest) const {
    std::uint64_t expected;
    {
      std::lock_guard lock(mu_);
      dest = params_;
      expected = checksum_;
    }
    if (compute_checksum(dest) != expected)
      throw std::logic_error("GlobalStore: torn parameter snapshot");
  }

  std::vector<double> params_copy() const {
    std::vector<double> out;
    snapshot(out);
    return out;
  }

  // Shared-moment Adam with bias correction; one step counter for all
  // workers. Returns false when the update budget is exhausted.
  bool apply_gradients(std::span<const double> grad) {
    std::lock_guard lock(mu_);
    if (grad.size() != params_.size())
      throw std::invalid_argument("apply_gradients: gradient length mismatch");
    if (stop_) return false;
    if (cfg_.max_updates > 0 && step_count_ >= cfg_.max_updates) {
      stop_ = true;
      return false;
    }
    ++step_count_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
      params_[i] -= cfg_.lr * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + cfg_.adam_eps);
    }
    checksum_ = compute_checksum(params_);
    return true;
  }

  struct EpisodeDone {
    long index = 0;
    bool within_budget = false;   // the record was emitted
    bool budget_exhausted = false;
  };

  // Atomically assigns the completion index and emits the record while
  // still inside the critical section, so the channel sees strictly
  // increasing indices.
  EpisodeDone finish_episode(double score, long steps, int worker_id) {
    std::lock_guard lock(mu_);
    EpisodeDone done;
    done.index = ++episode_count_;
    done.within_budget = done.index <= cfg_.max_episodes;
    done.budget_exhausted = done.index >= cfg_.max_episodes;
    if (done.budget_exhausted) stop_ = true;
    if (done.within_budget && queue_)
      queue_->push({done.index, worker_id, score, steps});
    return done;
  }

  bool should_stop() const {
    std::lock_guard lock(mu_);
    return stop_ || episode_count_ >= cfg_.max_episodes;
  }

  void request_stop() {
    std::lock_guard lock(mu_);
    stop_ = true;
  }

  void abort(const std::string& message) {
    std::lock_guard lock(mu_);
    stop_ = true;
    if (abort_message_.empty()) abort_message_ = message;
  }

  std::string abort_message() const {
    std::lock_guard lock(mu_);
    return abort_message_;
  }

  long step_count() const {
    std::lock_guard lock(mu_);
    return step_count_;
  }

  long episode_count() const {
    std::lock_guard lock(mu_);
    return episode_count_;
  }

  static std::uint64_t compute_checksum(const std::vector<double>& params) {
    return fnv1a_bytes(params.data(), params.size() * sizeof(double));
  }

 private:
  mutable std::mutex mu_;
  TrainConfig cfg_;
  EpisodeQueue* queue_;
  std::vector<double> params_, m_, v_;
  std::uint64_t checksum_ = 0;
  long step_count_ = 0;
  long episode_count_ = 0;
  bool stop_ = false;
  std::string abort_message_;
};

// Advantage actor-critic loss over one rollout:
//   sum_t [ -log pi(a_t|s_t) A_t + c_v (R_t - V_t)^2 - c_e H(pi(.|s_t)) ]
// with A_t = R_t - V_t held constant in the policy term. Returns the flat
// gradient (model flattening order), structural-weight components included.
inline std::vector<double> compute_gradients(const ActorCritic& model, const Rollout& rollout,
                                             const TrainConfig& cfg) {
  const auto returns = n_step_returns(rollout, cfg.gamma);
  std::vector<double> grad(static_cast<std::size_t>(model.param_count()), 0.0);
  double loss = 0.0;
  for (std::size_t t = 0; t < rollout.transitions.size(); ++t) {
    const Transition& tr = rollout.transitions[t];
    const auto probs = softmax(tr.forward.logits);
    const auto logp = log_softmax(tr.forward.logits);
    double entropy = 0.0;
    for (int a = 0; a < kActionCount; ++a)
      entropy -= probs[static_cast<std::size_t>(a)] * logp[static_cast<std::size_t>(a)];

    const double advantage = returns[t] - tr.forward.value;
    loss += -logp[static_cast<std::size_t>(tr.action)] * advantage +
            cfg.value_coef * advantage * advantage - cfg.entropy_coef * entropy;

    std::array<double, kActionCount> grad_logits{};
    for (int a = 0; a < kActionCount; ++a) {
      const auto sa = static_cast<std::size_t>(a);
      grad_logits[sa] = advantage * (probs[sa] - (a == tr.action ? 1.0 : 0.0)) +
                        cfg.entropy_coef * probs[sa] * (logp[sa] + entropy);
    }
    const double grad_value = -2.0 * cfg.value_coef * advantage;
    model_backward(model, tr.forward, grad_logits, grad_value, grad);
  }
  if (!std::isfinite(loss))
    throw numerical_fault("compute_gradients: non-finite loss over rollout");
  return grad;
}

inline void apply_gradients(GlobalStore& store, std::span<const double> grad) {
  store.apply_gradients(grad);
}

// One asynchronous actor: snapshot the store, act for up to L steps on a
// private environment, push the rollout's gradients back, and report
// episode scores as they complete.
inline void worker_loop(int worker_id, GlobalStore& store, const TrainConfig& cfg) {
  Rng action_rng(mix_seed(cfg.seed, 0xAC7104, static_cast<std::uint64_t>(worker_id)));
  Rng env_seed_rng(mix_seed(cfg.seed, 0xE44, static_cast<std::uint64_t>(worker_id)));
  GridEnv env(cfg.env_name, env_seed_rng.next_u64());
  ActorCritic local = build_model(cfg);

  std::vector<double> params;
  std::vector<double> obs = env.observe();
  double episode_score = 0.0;
  long episode_steps = 0;

  while (!store.should_stop()) {
    store.snapshot(params);
    load_params(local, params);

    Rollout rollout;
    rollout.transitions.reserve(static_cast<std::size_t>(cfg.rollout_len));
    for (int i = 0; i < cfg.rollout_len && !env.done(); ++i) {
      ModelForward fwd = model_forward(local, obs);
      const ActionSample sample = sample_action(fwd.logits, action_rng);
      StepResult sr = env.step(sample.action);
      episode_score += sr.reward;
      ++episode_steps;
      rollout.transitions.push_back({std::move(fwd), sample.action, sr.reward, sample.logprob});
      obs = std::move(sr.observation);
    }
    if (rollout.transitions.empty()) break;
    rollout.bootstrap_value = env.done() ? 0.0 : model_forward(local, obs).value;

    try {
      const auto grad = compute_gradients(local, rollout, cfg);
      store.apply_gradients(grad);
    } catch (const numerical_fault& fault) {
      std::cerr << "[worker " << worker_id << "] " << fault.what()
                << " -- rollout discarded\n";
    }

    if (env.done()) {
      const auto done = store.finish_episode(episode_score, episode_steps, worker_id);
      episode_score = 0.0;
      episode_steps = 0;
      if (!done.within_budget || done.budget_exhausted) break;
      env.reset(env_seed_rng.next_u64());
      obs = env.observe();
    }
  }
}

struct StructuralWeightSnapshot {
  long episode_index = 0;
  int block = 0;
  int candidate = 0;  // enumeration index
  CircuitDescriptor descriptor;
  double weight = 0.0;
};

struct TrainHooks {
  std::function<void(const MetricsRow&)> on_episode;
  // Called every weight_log_interval episodes with one entry per
  // (block, candidate).
  std::function<void(const std::vector<StructuralWeightSnapshot>&)> on_weights;
  long weight_log_interval = 0;  // 0 = off
};

struct TrainResult {
  MetricsLog log;
  std::vector<double> final_params;
  long total_updates = 0;
  long total_episodes = 0;
  double wall_seconds = 0.0;
  bool reached_target = false;
};

// Byte offsets of each block's structural weights inside the flat vector.
inline std::vector<std::pair<std::size_t, std::size_t>> structural_weight_segments(
    const ActorCritic& m) {
  std::vector<std::pair<std::size_t, std::size_t>> segments;
  std::size_t off = static_cast<std::size_t>(m.input_map.param_count());
  for (const EnsembleBlock& b : m.body.blocks) {
    off += static_cast<std::size_t>(b.candidate_count() * b.params_per_candidate());
    if (b.train_weights) {
      segments.emplace_back(off, static_cast<std::size_t>(b.candidate_count()));
      off += static_cast<std::size_t>(b.candidate_count());
    }
  }
  return segments;
}

// Spawns the workers over one shared store and consumes episode records in
// completion order, computing rolling statistics and optional hooks. The
// caller's thread is the coordinator.
inline TrainResult train(const TrainConfig& cfg, const TrainHooks& hooks = {}) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  const ActorCritic reference = initialized_model(cfg);
  EpisodeQueue queue;
  GlobalStore store(flatten_params(reference), cfg, &queue);
  const auto weight_segments = structural_weight_segments(reference);

  std::atomic<int> active_workers{cfg.n_workers};
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(cfg.n_workers));
  for (int w = 0; w < cfg.n_workers; ++w) {
    workers.emplace_back([&, w] {
      try {
        worker_loop(w, store, cfg);
      } catch (const std::exception& e) {
        store.abort(std::string("worker ") + std::to_string(w) + ": " + e.what());
      }
      active_workers.fetch_sub(1);
    });
  }

  TrainResult result;
  RollingStats rolling(cfg.window);
  const auto emit_weights = [&](long episode_index) {
    if (!hooks.on_weights || weight_segments.empty()) return;
    const auto params = store.params_copy();
    std::vector<StructuralWeightSnapshot> rows;
    for (std::size_t b = 0; b < weight_segments.size(); ++b) {
      const auto [off, count] = weight_segments[b];
      const auto& descriptors = reference.body.blocks[b].descriptors;
      for (std::size_t j = 0; j < count; ++j)
        rows.push_back({episode_index, static_cast<int>(b), static_cast<int>(j),
                        descriptors[j], params[off + j]});
    }
    hooks.on_weights(rows);
  };

  while (true) {
    const auto record = queue.pop_wait(std::chrono::milliseconds(50));
    if (!record) {
      if (active_workers.load() == 0) break;
      continue;
    }
    rolling.push(record->score);
    MetricsRow row;
    row.episode_index = record->episode_index;
    row.worker_id = record->worker_id;
    row.score = record->score;
    row.steps = record->steps;
    row.rolling_mean = rolling.mean();
    row.rolling_std = rolling.stddev();
    row.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back(row);
    if (hooks.on_episode) hooks.on_episode(row);
    if (hooks.weight_log_interval > 0 && record->episode_index % hooks.weight_log_interval == 0)
      emit_weights(record->episode_index);
    if (cfg.target_rolling_mean > 0.0 && rolling.full() &&
        rolling.mean() >= cfg.target_rolling_mean) {
      result.reached_target = true;
      store.request_stop();
    }
  }

  for (auto& t : workers) t.join();
  // Drain anything that raced past the last pop.
  while (auto record = queue.pop_wait(std::chrono::milliseconds(0))) {
    rolling.push(record->score);
    MetricsRow row;
    row.episode_index = record->episode_index;
    row.worker_id = record->worker_id;
    row.score = record->score;
    row.steps = record->steps;
    row.rolling_mean = rolling.mean();
    row.rolling_std = rolling.stddev();
    row.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back(row);
    if (hooks.on_episode) hooks.on_episode(row);
    if (cfg.target_rolling_mean > 0.0 && rolling.full() &&
        rolling.mean() >= cfg.target_rolling_mean)
      result.reached_target = true;
  }

  const std::string failure = store.abort_message();
  if (!failure.empty()) throw std::runtime_error("training aborted: " + failure);

  result.final_params = store.params_copy();
  result.total_updates = store.step_count();
  result.total_episodes = store.episode_count();
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace qdas
