#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "ccp/errors.hpp"

namespace ccp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_unbounded(double r) { return std::isinf(r) && r > 0.0; }

/// Dense row-major matrix of doubles. Deliberately minimal: the library only
/// needs storage, element access and a few whole-matrix queries.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), v_(rows * cols, fill) {}
  Mat(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), v_(std::move(values)) {
    if (v_.size() != rows_ * cols_)
      throw ShapeMismatch("matrix storage does not match rows*cols");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return v_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return v_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return v_[r * cols_ + c]; }

  const std::vector<double>& data() const { return v_; }
  std::vector<double>& data() { return v_; }

  std::vector<double> row(std::size_t r) const {
    return std::vector<double>(v_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                               v_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
  }

  std::vector<double> col(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  bool all_finite() const {
    for (double x : v_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  friend bool operator==(const Mat& a, const Mat& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.v_ == b.v_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> v_;
};

/// Euclidean distance between row r of `a` and row r of `b`.
inline double row_distance(const Mat& a, std::size_t ra, const Mat& b, std::size_t rb) {
  double acc = 0.0;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    const double diff = a(ra, c) - b(rb, c);
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

}  // namespace ccp
