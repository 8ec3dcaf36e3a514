#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace qdas {

// Minimal row-major dense matrix. All linear algebra in this project is
// small (147x8 at most), so this stays hand-rolled.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int r, int c) { return data_[idx(r, c)]; }
  double operator()(int r, int c) const { return data_[idx(r, c)]; }

  std::span<double> row(int r) { return {data_.data() + idx(r, 0), static_cast<std::size_t>(cols_)}; }
  std::span<const double> row(int r) const {
    return {data_.data() + idx(r, 0), static_cast<std::size_t>(cols_)};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  // y = M x
  std::vector<double> mul(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != cols_)
      throw std::invalid_argument("Mat::mul: dimension mismatch");
    std::vector<double> y(static_cast<std::size_t>(rows_), 0.0);
    for (int r = 0; r < rows_; ++r) {
      double s = 0.0;
      const double* m = data_.data() + idx(r, 0);
      for (int c = 0; c < cols_; ++c) s += m[c] * x[static_cast<std::size_t>(c)];
      y[static_cast<std::size_t>(r)] = s;
    }
    return y;
  }

  // y = M^T x
  std::vector<double> mul_transposed(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != rows_)
      throw std::invalid_argument("Mat::mul_transposed: dimension mismatch");
    std::vector<double> y(static_cast<std::size_t>(cols_), 0.0);
    for (int r = 0; r < rows_; ++r) {
      const double xr = x[static_cast<std::size_t>(r)];
      const double* m = data_.data() + idx(r, 0);
      for (int c = 0; c < cols_; ++c) y[static_cast<std::size_t>(c)] += m[c] * xr;
    }
    return y;
  }

 private:
  std::size_t idx(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

}  // namespace qdas
