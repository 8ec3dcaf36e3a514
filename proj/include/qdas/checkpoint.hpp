#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdas/a3c.hpp"
#include "qdas/model.hpp"

namespace qdas {

// Versioned binary snapshot of a training run: enough architecture
// metadata to rebuild the model plus the flat parameter vector and the
// master RNG seed. Doubles are stored as raw little-endian IEEE-754 bits,
// so save/load round-trips bit-exactly.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::string env_name;
  std::string mode;
  int n_qubits = 8;
  int n_layers = 2;
  int n_blocks = 1;
  std::uint64_t seed = 0;
  std::vector<double> params;

  static Checkpoint from_training(const TrainConfig& cfg, std::vector<double> params) {
    Checkpoint c;
    c.env_name = cfg.env_name;
    c.mode = cfg.mode;
    c.n_qubits = cfg.n_qubits;
    c.n_layers = cfg.n_layers;
    c.n_blocks = cfg.n_blocks;
    c.seed = cfg.seed;
    c.params = std::move(params);
    return c;
  }

  TrainConfig architecture_config() const {
    TrainConfig cfg;
    cfg.env_name = env_name;
    cfg.mode = mode;
    cfg.n_qubits = n_qubits;
    cfg.n_layers = n_layers;
    cfg.n_blocks = n_blocks;
    cfg.seed = seed;
    return cfg;
  }

  ActorCritic rebuild_model() const {
    ActorCritic m = build_model(architecture_config());
    load_params(m, params);
    return m;
  }
};

namespace detail {

constexpr char kCheckpointMagic[8] = {'Q', 'D', 'A', 'S', 'C', 'K', 'P', 'T'};

inline void write_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::uint32_t read_u32(std::istream& in) {
  char bytes[4];
  in.read(bytes, 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
  return v;
}

inline std::uint64_t read_u64(std::istream& in) {
  char bytes[8];
  in.read(bytes, 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
  return v;
}

inline std::string read_string(std::istream& in) {
  const std::uint32_t len = read_u32(in);
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  return s;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const Checkpoint& c) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out.write(detail::kCheckpointMagic, 8);
  detail::write_u32(out, Checkpoint::kVersion);
  detail::write_string(out, c.env_name);
  detail::write_string(out, c.mode);
  detail::write_u32(out, static_cast<std::uint32_t>(c.n_qubits));
  detail::write_u32(out, static_cast<std::uint32_t>(c.n_layers));
  detail::write_u32(out, static_cast<std::uint32_t>(c.n_blocks));
  detail::write_u64(out, c.seed);
  detail::write_u64(out, static_cast<std::uint64_t>(c.params.size()));
  for (double v : c.params) detail::write_u64(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw std::runtime_error("save_checkpoint: write failed on " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, detail::kCheckpointMagic, 8) != 0)
    throw std::runtime_error("load_checkpoint: not a checkpoint file: " + path);
  const std::uint32_t version = detail::read_u32(in);
  if (version != Checkpoint::kVersion)
    throw std::runtime_error("load_checkpoint: unsupported version " + std::to_string(version));
  Checkpoint c;
  c.env_name = detail::read_string(in);
  c.mode = detail::read_string(in);
  c.n_qubits = static_cast<int>(detail::read_u32(in));
  c.n_layers = static_cast<int>(detail::read_u32(in));
  c.n_blocks = static_cast<int>(detail::read_u32(in));
  c.seed = detail::read_u64(in);
  const std::uint64_t count = detail::read_u64(in);
  c.params.resize(count);
  for (std::uint64_t i = 0; i < count; ++i)
    c.params[i] = std::bit_cast<double>(detail::read_u64(in));
  if (!in) throw std::runtime_error("load_checkpoint: truncated file: " + path);
  return c;
}

}  // namespace qdas
