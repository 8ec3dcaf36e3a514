#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdas/a3c.hpp"
#include "qdas/checkpoint.hpp"
#include "qdas/ensemble.hpp"
#include "qdas/metrics.hpp"

namespace qdas {

// Everything a training run needs beyond the trainer itself: where to put
// files, how often to flush, how often to log structural weights.
struct RunConfig {
  TrainConfig train;
  std::string out_dir = "runs/latest";
  long flush_interval = 50;         // episodes between metric-file flushes
  long weight_log_interval = 1000;  // episodes between structural-weight rows

  bool operator==(const RunConfig&) const = default;
};

inline bool operator==(const TrainConfig& a, const TrainConfig& b) {
  return a.env_name == b.env_name && a.mode == b.mode && a.n_workers == b.n_workers &&
         a.lr == b.lr && a.beta1 == b.beta1 && a.beta2 == b.beta2 &&
         a.adam_eps == b.adam_eps && a.gamma == b.gamma && a.rollout_len == b.rollout_len &&
         a.value_coef == b.value_coef && a.entropy_coef == b.entropy_coef &&
         a.max_episodes == b.max_episodes && a.seed == b.seed && a.n_qubits == b.n_qubits &&
         a.n_layers == b.n_layers && a.n_blocks == b.n_blocks && a.window == b.window &&
         a.max_updates == b.max_updates && a.target_rolling_mean == b.target_rolling_mean;
}

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"env", c.env_name},
                     {"mode", c.mode},
                     {"workers", c.n_workers},
                     {"lr", c.lr},
                     {"beta1", c.beta1},
                     {"beta2", c.beta2},
                     {"adam_eps", c.adam_eps},
                     {"gamma", c.gamma},
                     {"rollout_len", c.rollout_len},
                     {"value_coef", c.value_coef},
                     {"entropy_coef", c.entropy_coef},
                     {"episodes", c.max_episodes},
                     {"seed", c.seed},
                     {"qubits", c.n_qubits},
                     {"layers", c.n_layers},
                     {"blocks", c.n_blocks},
                     {"window", c.window},
                     {"max_updates", c.max_updates},
                     {"target_score", c.target_rolling_mean}};
}

inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  j.at("env").get_to(c.env_name);
  j.at("mode").get_to(c.mode);
  j.at("workers").get_to(c.n_workers);
  j.at("lr").get_to(c.lr);
  j.at("beta1").get_to(c.beta1);
  j.at("beta2").get_to(c.beta2);
  j.at("adam_eps").get_to(c.adam_eps);
  j.at("gamma").get_to(c.gamma);
  j.at("rollout_len").get_to(c.rollout_len);
  j.at("value_coef").get_to(c.value_coef);
  j.at("entropy_coef").get_to(c.entropy_coef);
  j.at("episodes").get_to(c.max_episodes);
  j.at("seed").get_to(c.seed);
  j.at("qubits").get_to(c.n_qubits);
  j.at("layers").get_to(c.n_layers);
  j.at("blocks").get_to(c.n_blocks);
  j.at("window").get_to(c.window);
  j.at("max_updates").get_to(c.max_updates);
  j.at("target_score").get_to(c.target_rolling_mean);
}

inline void to_json(nlohmann::json& j, const RunConfig& c) {
  j = nlohmann::json{{"train", c.train},
                     {"out", c.out_dir},
                     {"flush_interval", c.flush_interval},
                     {"weight_log_interval", c.weight_log_interval}};
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
  j.at("train").get_to(c.train);
  j.at("out").get_to(c.out_dir);
  j.at("flush_interval").get_to(c.flush_interval);
  j.at("weight_log_interval").get_to(c.weight_log_interval);
}

// %.17g keeps doubles exact through a text round-trip, which the
// determinism checks diff byte-for-byte.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class MetricsCsvWriter {
 public:
  explicit MetricsCsvWriter(const std::string& path, long flush_interval = 50)
      : out_(path, std::ios::trunc), flush_interval_(flush_interval < 1 ? 1 : flush_interval) {
    if (!out_) throw std::runtime_error("MetricsCsvWriter: cannot open " + path);
    out_ << "episode_index,worker_id,score,steps,rolling_mean,rolling_std,wall_clock_seconds\n";
  }

  void write_row(const MetricsRow& row) {
    out_ << row.episode_index << ',' << row.worker_id << ',' << format_double(row.score) << ','
         << row.steps << ',' << format_double(row.rolling_mean) << ','
         << format_double(row.rolling_std) << ',';
    char wall[32];
    std::snprintf(wall, sizeof(wall), "%.6f", row.wall_clock_seconds);
    out_ << wall << '\n';
    if (++rows_since_flush_ >= flush_interval_) {
      out_.flush();
      rows_since_flush_ = 0;
    }
  }

  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
  long flush_interval_;
  long rows_since_flush_ = 0;
};

class WeightsCsvWriter {
 public:
  explicit WeightsCsvWriter(const std::string& path) : out_(path, std::ios::trunc) {
    if (!out_) throw std::runtime_error("WeightsCsvWriter: cannot open " + path);
    out_ << "episode_index,block,candidate,descriptor,weight\n";
  }

  void write_rows(const std::vector<StructuralWeightSnapshot>& rows) {
    for (const auto& r : rows)
      out_ << r.episode_index << ',' << r.block << ',' << r.candidate << ','
           << to_string(r.descriptor) << ',' << format_double(r.weight) << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

// Ranked candidate table for a trained (or fresh) checkpoint, one row per
// (block, candidate): block, rank, enumeration index, descriptor, weight.
inline void report_architecture(const Checkpoint& ckpt, std::ostream& out) {
  const ActorCritic model = ckpt.rebuild_model();
  out << "block,rank,candidate,descriptor,weight\n";
  for (std::size_t b = 0; b < model.body.blocks.size(); ++b) {
    const EnsembleBlock& block = model.body.blocks[b];
    const auto ranked = top_candidates(block, block.candidate_count());
    for (std::size_t r = 0; r < ranked.size(); ++r)
      out << b << ',' << r << ',' << ranked[r].index << ',' << to_string(ranked[r].descriptor)
          << ',' << format_double(ranked[r].weight) << '\n';
  }
}

// Full experiment: train, stream metrics and weight reports to the output
// directory, save the final checkpoint and a summary. Returns a process
// exit status; training faults leave partial metrics flushed behind.
inline int run(const RunConfig& cfg, std::ostream& log = std::cerr) {
  namespace fs = std::filesystem;
  try {
    cfg.train.validate();
    fs::create_directories(cfg.out_dir);
    MetricsCsvWriter metrics(cfg.out_dir + "/metrics.csv", cfg.flush_interval);
    WeightsCsvWriter weights(cfg.out_dir + "/weights.csv");

    TrainHooks hooks;
    hooks.on_episode = [&metrics](const MetricsRow& row) { metrics.write_row(row); };
    hooks.on_weights = [&weights](const std::vector<StructuralWeightSnapshot>& rows) {
      weights.write_rows(rows);
    };
    hooks.weight_log_interval = cfg.weight_log_interval;

    const TrainResult result = train(cfg.train, hooks);
    metrics.flush();

    save_checkpoint(cfg.out_dir + "/checkpoint.bin",
                    Checkpoint::from_training(cfg.train, result.final_params));

    nlohmann::json summary;
    summary["config"] = cfg;
    summary["episodes"] = result.total_episodes;
    summary["updates"] = result.total_updates;
    summary["wall_seconds"] = result.wall_seconds;
    summary["reached_target"] = result.reached_target;
    if (!result.log.empty()) {
      summary["final_rolling_mean"] = result.log.back().rolling_mean;
      summary["final_rolling_std"] = result.log.back().rolling_std;
      summary["final_score"] = result.log.back().score;
    }
    std::ofstream summary_out(cfg.out_dir + "/summary.json", std::ios::trunc);
    summary_out << summary.dump(2) << '\n';
    return 0;
  } catch (const std::exception& e) {
    log << "run failed: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace qdas
