#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qdas/cli.hpp"

using namespace qdas;
namespace fs = std::filesystem;

namespace {

int cli(const std::vector<std::string>& args, std::string* out_text = nullptr,
        std::string* err_text = nullptr) {
  std::vector<const char*> argv;
  argv.push_back("qdas");
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("qdas_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

std::string strip_wall_clock(const std::string& line) {
  return line.substr(0, line.rfind(','));
}

nlohmann::json read_summary(const fs::path& dir) {
  std::ifstream in(dir / "summary.json");
  REQUIRE(in.good());
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("defaults follow the documented hyperparameters") {
  const auto dir = fresh_dir("defaults");
  REQUIRE(cli({"train", "--env", "Empty-5x5", "--episodes", "0", "--workers", "2",
               "--out", dir.string()}) == 0);
  const auto summary = read_summary(dir);
  const auto& train = summary["config"]["train"];
  CHECK(train["lr"].get<double>() == 1e-4);
  CHECK(train["beta1"].get<double>() == 0.92);
  CHECK(train["beta2"].get<double>() == 0.999);
  CHECK(train["gamma"].get<double>() == 0.9);
  CHECK(train["rollout_len"].get<int>() == 5);
  CHECK(train["window"].get<int>() == 5000);
  CHECK(train["mode"].get<std::string>() == "diffqas");
  CHECK(train["qubits"].get<int>() == 8);
  CHECK(summary["episodes"].get<long>() == 0);
}

TEST_CASE("worker default is 80 and --workers overrides it") {
  const auto dir = fresh_dir("workers");
  REQUIRE(cli({"train", "--env", "Empty-5x5", "--episodes", "0", "--out", dir.string()}) == 0);
  CHECK(read_summary(dir)["config"]["train"]["workers"].get<int>() == 80);

  REQUIRE(cli({"train", "--env", "Empty-5x5", "--episodes", "0", "--workers", "4",
               "--out", dir.string()}) == 0);
  CHECK(read_summary(dir)["config"]["train"]["workers"].get<int>() == 4);
}

TEST_CASE("usage errors") {
  std::string err;
  CHECK(cli({"train", "--episodes", "1"}, nullptr, &err) != 0);  // missing --env
  CHECK(cli({"train", "--env", "Empty-5x5", "--bogus-flag", "3"}, nullptr, &err) != 0);
  CHECK(cli({"train", "--env", "Empty-5x5", "--mode", "baseline-9"}, nullptr, &err) != 0);
  CHECK(cli({}, nullptr, &err) != 0);  // a subcommand is required
}

TEST_CASE("environment variables fill in unset flags") {
  const auto dir = fresh_dir("envvar");
  setenv("QDAS_WORKERS", "3", 1);
  REQUIRE(cli({"train", "--env", "Empty-5x5", "--episodes", "0", "--out", dir.string()}) == 0);
  unsetenv("QDAS_WORKERS");
  CHECK(read_summary(dir)["config"]["train"]["workers"].get<int>() == 3);
}

TEST_CASE("config file values load and flags override them") {
  const auto dir = fresh_dir("cfgfile");
  const fs::path cfg_path = dir / "run.toml";
  {
    std::ofstream cfg(cfg_path);
    cfg << "[train]\nenv=\"Empty-5x5\"\nworkers=5\nlr=0.002\nepisodes=0\n";
  }
  REQUIRE(cli({"train", "--config", cfg_path.string(), "--out", dir.string()}) == 0);
  auto summary = read_summary(dir);
  CHECK(summary["config"]["train"]["workers"].get<int>() == 5);
  CHECK(summary["config"]["train"]["lr"].get<double>() == 0.002);

  REQUIRE(cli({"train", "--config", cfg_path.string(), "--workers", "2", "--out",
               dir.string()}) == 0);
  CHECK(read_summary(dir)["config"]["train"]["workers"].get<int>() == 2);
}

TEST_CASE("a ten-episode single-worker run writes exactly ten data rows") {
  const auto dir = fresh_dir("rows");
  REQUIRE(cli({"train", "--env", "Empty-5x5", "--episodes", "10", "--workers", "1",
               "--qubits", "4", "--layers", "1", "--seed", "5", "--out", dir.string()}) == 0);
  const auto lines = read_lines(dir / "metrics.csv");
  REQUIRE(lines.size() == 11);  // header + 10
  CHECK(lines[0] ==
        "episode_index,worker_id,score,steps,rolling_mean,rolling_std,wall_clock_seconds");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_csv(lines[i]);
    REQUIRE(cells.size() == 7);
    CHECK(cells[0] == std::to_string(i));
  }
  CHECK(fs::exists(dir / "checkpoint.bin"));
  CHECK(fs::exists(dir / "weights.csv"));
}

TEST_CASE("identical seeded runs differ only in wall-clock columns") {
  const auto dir_a = fresh_dir("det_a");
  const auto dir_b = fresh_dir("det_b");
  const std::vector<std::string> base{"train", "--env", "Empty-5x5", "--episodes", "15",
                                      "--workers", "1", "--qubits", "4", "--layers", "1",
                                      "--seed", "21"};
  auto args_a = base;
  args_a.insert(args_a.end(), {"--out", dir_a.string()});
  auto args_b = base;
  args_b.insert(args_b.end(), {"--out", dir_b.string()});
  REQUIRE(cli(args_a) == 0);
  REQUIRE(cli(args_b) == 0);

  const auto lines_a = read_lines(dir_a / "metrics.csv");
  const auto lines_b = read_lines(dir_b / "metrics.csv");
  REQUIRE(lines_a.size() == lines_b.size());
  for (std::size_t i = 0; i < lines_a.size(); ++i)
    CHECK(strip_wall_clock(lines_a[i]) == strip_wall_clock(lines_b[i]));
}

TEST_CASE("rolling columns recompute from the score column") {
  const auto dir = fresh_dir("rolling");
  REQUIRE(cli({"train", "--env", "Empty-5x5", "--episodes", "25", "--workers", "2",
               "--qubits", "4", "--layers", "1", "--window", "7", "--seed", "9", "--out",
               dir.string()}) == 0);
  const auto lines = read_lines(dir / "metrics.csv");
  RollingStats stats(7);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_csv(lines[i]);
    stats.push(std::stod(cells[2]));
    CHECK(std::stod(cells[4]) == Catch::Approx(stats.mean()).margin(1e-9));
    CHECK(std::stod(cells[5]) == Catch::Approx(stats.stddev()).margin(1e-9));
  }
}

TEST_CASE("a constant-score sequence logs an all-zero rolling_std column") {
  const auto dir = fresh_dir("conststd");
  const fs::path path = dir / "metrics.csv";
  {
    MetricsCsvWriter writer(path.string(), 1);
    RollingStats stats(5);
    for (long i = 1; i <= 20; ++i) {
      stats.push(0.5);
      MetricsRow row;
      row.episode_index = i;
      row.worker_id = 0;
      row.score = 0.5;
      row.steps = 10;
      row.rolling_mean = stats.mean();
      row.rolling_std = stats.stddev();
      row.wall_clock_seconds = 0.0;
      writer.write_row(row);
    }
  }
  const auto lines = read_lines(path);
  for (std::size_t i = 1; i < lines.size(); ++i) CHECK(split_csv(lines[i])[5] == "0");
}

TEST_CASE("summary config echo reproduces the run configuration") {
  RunConfig cfg;
  cfg.train.env_name = "SimpleCrossing-S9N2";
  cfg.train.mode = "baseline-4";
  cfg.train.n_workers = 12;
  cfg.train.lr = 3e-4;
  cfg.train.max_episodes = 777;
  cfg.train.seed = 123456789;
  cfg.train.n_qubits = 6;
  cfg.train.window = 250;
  cfg.out_dir = "/tmp/someplace";
  cfg.weight_log_interval = 42;

  const nlohmann::json j = cfg;
  const RunConfig parsed = j.get<RunConfig>();
  CHECK(parsed == cfg);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  const auto dir = fresh_dir("ckpt");
  TrainConfig cfg;
  cfg.n_qubits = 4;
  cfg.n_layers = 1;
  cfg.seed = 99;
  Rng rng(4);
  ActorCritic m = build_model(cfg);
  m.init_params(rng);
  Checkpoint saved = Checkpoint::from_training(cfg, flatten_params(m));
  save_checkpoint((dir / "c.bin").string(), saved);
  const Checkpoint loaded = load_checkpoint((dir / "c.bin").string());
  CHECK(loaded.env_name == saved.env_name);
  CHECK(loaded.mode == saved.mode);
  CHECK(loaded.n_qubits == 4);
  CHECK(loaded.seed == 99);
  REQUIRE(loaded.params.size() == saved.params.size());
  CHECK(loaded.params == saved.params);

  CHECK_THROWS_AS(load_checkpoint((dir / "missing.bin").string()), std::runtime_error);
}

TEST_CASE("report lists a fresh ensemble uniformly in enumeration order") {
  const auto dir = fresh_dir("report_fresh");
  REQUIRE(cli({"train", "--env", "Empty-5x5", "--episodes", "0", "--workers", "1",
               "--qubits", "4", "--layers", "1", "--out", dir.string()}) == 0);
  std::string out;
  REQUIRE(cli({"report", "--checkpoint", (dir / "checkpoint.bin").string()}, &out) == 0);
  const auto lines = [&] {
    std::vector<std::string> ls;
    std::stringstream ss(out);
    std::string line;
    while (std::getline(ss, line)) ls.push_back(line);
    return ls;
  }();
  REQUIRE(lines.size() == 1 + 36);  // header + 36 x M, M = 1
  for (int j = 0; j < 36; ++j) {
    const auto cells = split_csv(lines[static_cast<std::size_t>(j) + 1]);
    REQUIRE(cells.size() == 5);
    CHECK(cells[0] == "0");
    CHECK(cells[1] == std::to_string(j));  // rank
    CHECK(cells[2] == std::to_string(j));  // enumeration index (uniform ties)
    CHECK(std::stod(cells[4]) == Catch::Approx(1.0 / 36.0).margin(1e-15));
  }
}

TEST_CASE("report emits 36 rows per mixture block") {
  const auto dir = fresh_dir("report_m2");
  REQUIRE(cli({"train", "--env", "Empty-5x5", "--episodes", "0", "--workers", "1",
               "--qubits", "4", "--layers", "1", "--blocks", "2", "--out",
               dir.string()}) == 0);
  std::string out;
  REQUIRE(cli({"report", "--checkpoint", (dir / "checkpoint.bin").string()}, &out) == 0);
  std::stringstream ss(out);
  std::string line;
  long rows = -1;  // skip the header
  while (std::getline(ss, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 72);
}

TEST_CASE("report puts a synthetic one-hot candidate first") {
  const auto dir = fresh_dir("report_onehot");
  TrainConfig cfg;
  cfg.n_qubits = 4;
  cfg.n_layers = 1;
  ActorCritic m = build_model(cfg);
  const auto segments = structural_weight_segments(m);
  REQUIRE(segments.size() == 1);
  std::vector<double> params(static_cast<std::size_t>(m.param_count()), 0.0);
  params[segments[0].first + 29] = 1.0;
  save_checkpoint((dir / "c.bin").string(), Checkpoint::from_training(cfg, params));

  std::string out;
  REQUIRE(cli({"report", "--checkpoint", (dir / "c.bin").string()}, &out) == 0);
  std::stringstream ss(out);
  std::string header, first;
  std::getline(ss, header);
  std::getline(ss, first);
  const auto cells = split_csv(first);
  CHECK(cells[2] == "29");
  CHECK(std::stod(cells[4]) == 1.0);
}

TEST_CASE("baseline mode trains a single fixed circuit") {
  const auto dir = fresh_dir("baseline3");
  REQUIRE(cli({"train", "--env", "Empty-5x5", "--mode", "baseline-3", "--episodes", "5",
               "--workers", "1", "--qubits", "4", "--layers", "1", "--seed", "2", "--out",
               dir.string()}) == 0);
  const auto summary = read_summary(dir);
  CHECK(summary["config"]["train"]["mode"].get<std::string>() == "baseline-3");

  std::string out;
  REQUIRE(cli({"report", "--checkpoint", (dir / "checkpoint.bin").string()}, &out) == 0);
  std::stringstream ss(out);
  std::string header, first;
  std::getline(ss, header);
  std::getline(ss, first);
  const auto cells = split_csv(first);
  // Table config 3 encodes and rotates around Z, Hadamard on, chain.
  CHECK(cells[3] == "H+|encZ|chain|varZ|L1|Q4");
  CHECK(std::stod(cells[4]) == 1.0);

  // One candidate per block: the report has a single data row.
  std::string extra;
  const bool has_more = static_cast<bool>(std::getline(ss, extra)) && !extra.empty();
  CHECK_FALSE(has_more);
}
