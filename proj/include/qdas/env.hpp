#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdas/rng.hpp"

namespace qdas {

enum class CellType : std::uint8_t { Empty, Wall, Goal };

// Compass directions in screen coordinates (x right, y down).
// Turning right steps the index forward: E -> S -> W -> N.
enum class Direction : int { East = 0, South = 1, West = 2, North = 3 };

constexpr std::array<int, 4> kDirDx{1, 0, -1, 0};
constexpr std::array<int, 4> kDirDy{0, 1, 0, -1};

struct AgentPose {
  int x = 1;
  int y = 1;
  Direction dir = Direction::East;
  bool operator==(const AgentPose&) const = default;
};

struct Grid {
  int size = 0;
  std::vector<CellType> cells;  // row-major, cells[y * size + x]
  int goal_x = 0;
  int goal_y = 0;

  bool in_bounds(int x, int y) const { return x >= 0 && x < size && y >= 0 && y < size; }
  CellType at(int x, int y) const {
    return cells[static_cast<std::size_t>(y) * static_cast<std::size_t>(size) +
                 static_cast<std::size_t>(x)];
  }
  void set(int x, int y, CellType c) {
    cells[static_cast<std::size_t>(y) * static_cast<std::size_t>(size) +
          static_cast<std::size_t>(x)] = c;
  }
};

constexpr int kViewSize = 7;
constexpr int kObservationLength = kViewSize * kViewSize * 3;

// Cell-connectivity check (turns are free, so cell reachability implies
// pose reachability).
inline bool goal_reachable(const Grid& g, int sx, int sy) {
  std::vector<char> seen(g.cells.size(), 0);
  std::deque<std::pair<int, int>> queue{{sx, sy}};
  seen[static_cast<std::size_t>(sy * g.size + sx)] = 1;
  while (!queue.empty()) {
    const auto [x, y] = queue.front();
    queue.pop_front();
    if (x == g.goal_x && y == g.goal_y) return true;
    for (int d = 0; d < 4; ++d) {
      const int nx = x + kDirDx[static_cast<std::size_t>(d)];
      const int ny = y + kDirDy[static_cast<std::size_t>(d)];
      if (!g.in_bounds(nx, ny) || g.at(nx, ny) == CellType::Wall) continue;
      char& mark = seen[static_cast<std::size_t>(ny * g.size + nx)];
      if (!mark) {
        mark = 1;
        queue.emplace_back(nx, ny);
      }
    }
  }
  return false;
}

// Minimal number of {turn left, turn right, forward} actions from `start`
// to the goal cell, by breadth-first search over (x, y, dir) states.
inline int bfs_shortest_steps(const Grid& g, const AgentPose& start) {
  const auto state_id = [&g](int x, int y, int dir) {
    return (y * g.size + x) * 4 + dir;
  };
  std::vector<int> dist(static_cast<std::size_t>(g.size * g.size * 4), -1);
  std::deque<int> queue;
  const int s0 = state_id(start.x, start.y, static_cast<int>(start.dir));
  dist[static_cast<std::size_t>(s0)] = 0;
  queue.push_back(s0);
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    const int dir = s % 4;
    const int x = (s / 4) % g.size;
    const int y = (s / 4) / g.size;
    if (x == g.goal_x && y == g.goal_y) return dist[static_cast<std::size_t>(s)];
    const int d = dist[static_cast<std::size_t>(s)];
    const auto push = [&](int ns) {
      if (dist[static_cast<std::size_t>(ns)] < 0) {
        dist[static_cast<std::size_t>(ns)] = d + 1;
        queue.push_back(ns);
      }
    };
    push(state_id(x, y, (dir + 3) % 4));
    push(state_id(x, y, (dir + 1) % 4));
    const int fx = x + kDirDx[static_cast<std::size_t>(dir)];
    const int fy = y + kDirDy[static_cast<std::size_t>(dir)];
    if (g.in_bounds(fx, fy) && g.at(fx, fy) != CellType::Wall)
      push(state_id(fx, fy, dir));
  }
  return -1;
}

// Recovers one optimal action sequence (the scripted oracle agent).
inline std::vector<int> bfs_optimal_actions(const Grid& g, const AgentPose& start) {
  const auto state_id = [&g](int x, int y, int dir) {
    return (y * g.size + x) * 4 + dir;
  };
  const int n_states = g.size * g.size * 4;
  std::vector<int> parent(static_cast<std::size_t>(n_states), -1);
  std::vector<int> via_action(static_cast<std::size_t>(n_states), -1);
  std::vector<char> seen(static_cast<std::size_t>(n_states), 0);
  std::deque<int> queue;
  const int s0 = state_id(start.x, start.y, static_cast<int>(start.dir));
  seen[static_cast<std::size_t>(s0)] = 1;
  queue.push_back(s0);
  int goal_state = -1;
  while (!queue.empty() && goal_state < 0) {
    const int s = queue.front();
    queue.pop_front();
    const int dir = s % 4;
    const int x = (s / 4) % g.size;
    const int y = (s / 4) / g.size;
    if (x == g.goal_x && y == g.goal_y) {
      goal_state = s;
      break;
    }
    const auto push = [&](int ns, int action) {
      if (!seen[static_cast<std::size_t>(ns)]) {
        seen[static_cast<std::size_t>(ns)] = 1;
        parent[static_cast<std::size_t>(ns)] = s;
        via_action[static_cast<std::size_t>(ns)] = action;
        queue.push_back(ns);
      }
    };
    push(state_id(x, y, (dir + 3) % 4), 0);
    push(state_id(x, y, (dir + 1) % 4), 1);
    const int fx = x + kDirDx[static_cast<std::size_t>(dir)];
    const int fy = y + kDirDy[static_cast<std::size_t>(dir)];
    if (g.in_bounds(fx, fy) && g.at(fx, fy) != CellType::Wall)
      push(state_id(fx, fy, dir), 2);
  }
  if (goal_state < 0) throw std::runtime_error("bfs_optimal_actions: goal unreachable");
  std::vector<int> actions;
  for (int s = goal_state; s != s0; s = parent[static_cast<std::size_t>(s)])
    actions.push_back(via_action[static_cast<std::size_t>(s)]);
  std::reverse(actions.begin(), actions.end());
  return actions;
}

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
};

// Seeded gridworld with an egocentric 7x7x3 observation, six actions (only
// turn left / turn right / forward have effects), and a sparse terminal
// reward 1 - 0.9 * steps / max_steps with max_steps = 4 n^2.
//
// Environments:
//   Empty-5x5, Empty-6x6, Empty-8x8: bordered empty grid, goal at
//     (n-2, n-2), agent at (1, 1) facing East.
//   SimpleCrossing-S9N{1,2,3}: 9x9 bordered grid crossed by k full-span
//     "river" walls with one gap each; coordinates drawn without
//     replacement from {2, 4, 6}, orientations alternating vertical,
//     horizontal, vertical; gap positions uniform over the river's
//     interior cells. Construction retries with an advanced sub-seed until
//     the goal is reachable.
class GridEnv {
 public:
  GridEnv(std::string name, std::uint64_t seed) : name_(std::move(name)) {
    reset(seed);
  }

  void reset(std::uint64_t seed) {
    seed_ = seed;
    const std::string key = canonical_name(name_);
    if (key == "Empty-5x5") build_empty(5);
    else if (key == "Empty-6x6") build_empty(6);
    else if (key == "Empty-8x8") build_empty(8);
    else if (key == "SimpleCrossing-S9N1") build_crossing(1);
    else if (key == "SimpleCrossing-S9N2") build_crossing(2);
    else if (key == "SimpleCrossing-S9N3") build_crossing(3);
    else throw std::invalid_argument("unknown environment name: " + name_);
    pose_ = AgentPose{1, 1, Direction::East};
    steps_ = 0;
    max_steps_ = 4 * grid_.size * grid_.size;
    done_ = false;
  }

  StepResult step(int action) {
    if (done_) throw std::logic_error("step: episode already finished");
    if (action < 0 || action > 5)
      throw std::invalid_argument("step: action must be in 0..5");

    const int dir = static_cast<int>(pose_.dir);
    if (action == 0) {
      pose_.dir = static_cast<Direction>((dir + 3) % 4);  // counter-clockwise
    } else if (action == 1) {
      pose_.dir = static_cast<Direction>((dir + 1) % 4);  // clockwise
    } else if (action == 2) {
      const int fx = pose_.x + kDirDx[static_cast<std::size_t>(dir)];
      const int fy = pose_.y + kDirDy[static_cast<std::size_t>(dir)];
      if (grid_.in_bounds(fx, fy) && grid_.at(fx, fy) != CellType::Wall) {
        pose_.x = fx;
        pose_.y = fy;
      }
    }
    // Actions 3..5 (pick up, drop, toggle) change nothing here but still
    // consume a step; the agent has to learn that.
    ++steps_;

    StepResult result;
    if (grid_.at(pose_.x, pose_.y) == CellType::Goal) {
      done_ = true;
      result.reward = 1.0 - 0.9 * (static_cast<double>(steps_) / static_cast<double>(max_steps_));
    } else if (steps_ >= max_steps_) {
      done_ = true;
      result.reward = 0.0;
    }
    result.done = done_;
    result.observation = observe();
    return result;
  }

  // 7x7 window in front of the agent, rotated so "up" is the facing
  // direction, agent at bottom-center (row 6, column 3). Window cell
  // (r, c) maps to world position
  //   pos + (6 - r) * forward + (c - 3) * right,  right = clockwise(forward).
  // Flattened row-major as (r, c, channel). Out-of-grid cells encode as
  // (0,0,0); in-grid cells as object/color/state triples:
  //   empty (1,0,0), wall (2,5,0), goal (8,1,0). No occlusion.
  std::vector<double> observe() const {
    std::vector<double> obs(kObservationLength, 0.0);
    const int dir = static_cast<int>(pose_.dir);
    const int fdx = kDirDx[static_cast<std::size_t>(dir)];
    const int fdy = kDirDy[static_cast<std::size_t>(dir)];
    const int rdx = kDirDx[static_cast<std::size_t>((dir + 1) % 4)];
    const int rdy = kDirDy[static_cast<std::size_t>((dir + 1) % 4)];
    for (int r = 0; r < kViewSize; ++r) {
      for (int c = 0; c < kViewSize; ++c) {
        const int forward = kViewSize - 1 - r;
        const int lateral = c - kViewSize / 2;
        const int wx = pose_.x + forward * fdx + lateral * rdx;
        const int wy = pose_.y + forward * fdy + lateral * rdy;
        if (!grid_.in_bounds(wx, wy)) continue;
        const std::size_t base = static_cast<std::size_t>((r * kViewSize + c) * 3);
        switch (grid_.at(wx, wy)) {
          case CellType::Empty: obs[base] = 1.0; break;
          case CellType::Wall: obs[base] = 2.0; obs[base + 1] = 5.0; break;
          case CellType::Goal: obs[base] = 8.0; obs[base + 1] = 1.0; break;
        }
      }
    }
    return obs;
  }

  const Grid& grid() const { return grid_; }
  const AgentPose& pose() const { return pose_; }
  const std::string& name() const { return name_; }
  std::uint64_t seed() const { return seed_; }
  int steps() const { return steps_; }
  int max_steps() const { return max_steps_; }
  bool done() const { return done_; }

  static std::string canonical_name(const std::string& raw) {
    std::string s = raw;
    if (s.rfind("MiniGrid-", 0) == 0) s = s.substr(9);
    if (s.size() > 3 && s.compare(s.size() - 3, 3, "-v0") == 0) s = s.substr(0, s.size() - 3);
    // The package spells it SimpleCrossingS9N1; accept that too.
    const auto p = s.find("CrossingS9");
    if (p != std::string::npos && (p == 0 || s[p - 1] != '-'))
      s.insert(p + std::string("Crossing").size(), "-");
    return s;
  }

  static const std::vector<std::string>& known_names() {
    static const std::vector<std::string> names{
        "Empty-5x5", "Empty-6x6", "Empty-8x8",
        "SimpleCrossing-S9N1", "SimpleCrossing-S9N2", "SimpleCrossing-S9N3"};
    return names;
  }

 private:
  void build_empty(int n) {
    grid_ = make_bordered(n);
    grid_.goal_x = n - 2;
    grid_.goal_y = n - 2;
    grid_.set(grid_.goal_x, grid_.goal_y, CellType::Goal);
  }

  void build_crossing(int k) {
    const int n = 9;
    for (std::uint64_t attempt = 0;; ++attempt) {
      Rng rng(mix_seed(seed_, attempt));
      Grid g = make_bordered(n);
      g.goal_x = n - 2;
      g.goal_y = n - 2;

      const auto coords = rng.sample_distinct({2, 4, 6}, k);
      for (int i = 0; i < k; ++i) {
        const bool vertical = i % 2 == 0;
        const int line = coords[static_cast<std::size_t>(i)];
        const int gap = rng.uniform_int(1, n - 2);
        for (int j = 1; j <= n - 2; ++j) {
          if (j == gap) continue;
          if (vertical) g.set(line, j, CellType::Wall);
          else g.set(j, line, CellType::Wall);
        }
      }
      g.set(g.goal_x, g.goal_y, CellType::Goal);
      if (goal_reachable(g, 1, 1)) {
        grid_ = std::move(g);
        return;
      }
    }
  }

  static Grid make_bordered(int n) {
    Grid g;
    g.size = n;
    g.cells.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), CellType::Empty);
    for (int i = 0; i < n; ++i) {
      g.set(i, 0, CellType::Wall);
      g.set(i, n - 1, CellType::Wall);
      g.set(0, i, CellType::Wall);
      g.set(n - 1, i, CellType::Wall);
    }
    return g;
  }

  std::string name_;
  std::uint64_t seed_ = 0;
  Grid grid_;
  AgentPose pose_;
  int steps_ = 0;
  int max_steps_ = 0;
  bool done_ = false;
};

inline GridEnv make_env(const std::string& name, std::uint64_t seed) {
  return GridEnv(name, seed);
}

}  // namespace qdas
