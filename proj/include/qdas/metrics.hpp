#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <vector>

namespace qdas {

struct MetricsRow {
  long episode_index = 0;  // strictly increasing, assigned at completion
  int worker_id = 0;
  double score = 0.0;
  long steps = 0;
  double rolling_mean = 0.0;
  double rolling_std = 0.0;
  double wall_clock_seconds = 0.0;
};

using MetricsLog = std::vector<MetricsRow>;

// Rolling mean / population standard deviation over the last `window`
// scores (or all scores while fewer have arrived). Recomputed two-pass per
// query; windows here are small enough that stability beats speed.
class RollingStats {
 public:
  explicit RollingStats(int window) : window_(window < 1 ? 1 : window) {}

  void push(double score) {
    buf_.push_back(score);
    if (static_cast<int>(buf_.size()) > window_) buf_.pop_front();
  }

  std::size_t count() const { return buf_.size(); }
  bool full() const { return static_cast<int>(buf_.size()) == window_; }

  double mean() const {
    if (buf_.empty()) return 0.0;
    double s = 0.0;
    for (double v : buf_) s += v;
    return s / static_cast<double>(buf_.size());
  }

  double stddev() const {
    if (buf_.empty()) return 0.0;
    const double m = mean();
    double s = 0.0;
    for (double v : buf_) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(buf_.size()));
  }

 private:
  int window_;
  std::deque<double> buf_;
};

}  // namespace qdas
