#pragma once

#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "qdas/runner.hpp"

namespace qdas {

// All options carry QDAS_* environment-variable fallbacks; precedence is
// command line > config file > environment > defaults.
inline void attach_train_options(CLI::App* t, RunConfig& cfg) {
  t->add_option("--env", cfg.train.env_name, "Environment name (Empty-5x5, Empty-6x6, Empty-8x8, SimpleCrossing-S9N1/2/3)")
      ->required()
      ->envname("QDAS_ENV");
  t->add_option("--mode", cfg.train.mode, "diffqas or baseline-K (K in 1..6)")
      ->envname("QDAS_MODE")
      ->check([](const std::string& s) -> std::string {
        TrainConfig probe;
        probe.mode = s;
        try {
          probe.baseline_index();
          return {};
        } catch (const std::exception& e) {
          return e.what();
        }
      });
  t->add_option("--workers", cfg.train.n_workers, "Parallel worker count")->envname("QDAS_WORKERS");
  t->add_option("--episodes", cfg.train.max_episodes, "Episode budget")->envname("QDAS_EPISODES");
  t->add_option("--seed", cfg.train.seed, "Master seed")->envname("QDAS_SEED");
  t->add_option("--out", cfg.out_dir, "Output directory")->envname("QDAS_OUT");
  t->add_option("--lr", cfg.train.lr, "Adam learning rate")->envname("QDAS_LR");
  t->add_option("--gamma", cfg.train.gamma, "Discount factor")->envname("QDAS_GAMMA");
  t->add_option("--rollout-len", cfg.train.rollout_len, "Steps between gradient computations (L)")
      ->envname("QDAS_ROLLOUT_LEN");
  t->add_option("--blocks", cfg.train.n_blocks, "Mixture stack depth (M)")->envname("QDAS_BLOCKS");
  t->add_option("--value-coef", cfg.train.value_coef, "Value-loss coefficient")
      ->envname("QDAS_VALUE_COEF");
  t->add_option("--entropy-coef", cfg.train.entropy_coef, "Entropy-bonus coefficient")
      ->envname("QDAS_ENTROPY_COEF");
  t->add_option("--window", cfg.train.window, "Rolling-statistics window")->envname("QDAS_WINDOW");
  t->add_option("--qubits", cfg.train.n_qubits, "Qubit count")->envname("QDAS_QUBITS");
  t->add_option("--layers", cfg.train.n_layers, "Variational layers per circuit")
      ->envname("QDAS_LAYERS");
  t->add_option("--beta1", cfg.train.beta1, "Adam beta1")->envname("QDAS_BETA1");
  t->add_option("--beta2", cfg.train.beta2, "Adam beta2")->envname("QDAS_BETA2");
  t->add_option("--adam-eps", cfg.train.adam_eps, "Adam epsilon")->envname("QDAS_ADAM_EPS");
  t->add_option("--target-score", cfg.train.target_rolling_mean,
                "Stop once the full rolling window reaches this mean (0 = off)")
      ->envname("QDAS_TARGET_SCORE");
  t->add_option("--max-updates", cfg.train.max_updates, "Stop after this many store updates (0 = off)")
      ->envname("QDAS_MAX_UPDATES");
  t->add_option("--flush-interval", cfg.flush_interval, "Episodes between metric flushes")
      ->envname("QDAS_FLUSH_INTERVAL");
  t->add_option("--weight-interval", cfg.weight_log_interval,
                "Episodes between structural-weight report rows")
      ->envname("QDAS_WEIGHT_INTERVAL");
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Differentiable quantum architecture search on gridworld RL "
               "with asynchronous actor-critic training"};
  app.require_subcommand(1);
  // Config keys live in a [train] section; command-line flags override
  // config-file values, which override environment variables.
  app.set_config("--config", "", "Config file (INI/TOML) with a [train] section");

  RunConfig cfg;
  CLI::App* t = app.add_subcommand("train", "Train an agent and write metrics/checkpoint");
  t->fallthrough();
  attach_train_options(t, cfg);

  std::string checkpoint_path;
  CLI::App* r = app.add_subcommand("report", "Print the ranked candidate table of a checkpoint");
  r->fallthrough();
  r->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  if (t->parsed()) return run(cfg, err);
  if (r->parsed()) {
    try {
      report_architecture(load_checkpoint(checkpoint_path), out);
    } catch (const std::exception& e) {
      err << "report failed: " << e.what() << '\n';
      return 1;
    }
  }
  return 0;
}

}  // namespace qdas
