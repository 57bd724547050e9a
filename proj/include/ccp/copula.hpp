#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "ccp/conformal.hpp"
#include "ccp/errors.hpp"
#include "ccp/matrix.hpp"

namespace ccp {

/// Cumulative-probability vectors of the copula-calibration scores: row i is
/// (F_1(s^i_1), ..., F_k(s^i_k)) with the CDFs fitted on the first
/// calibration half.
struct UMatrix {
  Mat u;

  std::size_t m() const { return u.rows(); }
  std::size_t k() const { return u.cols(); }
};

inline UMatrix compute_u(const std::vector<EmpiricalCdf>& cdfs, const ScoreMatrix& scores2) {
  if (cdfs.size() != scores2.k())
    throw ShapeMismatch("compute_u: number of CDFs does not match score columns");
  UMatrix out;
  out.u = Mat(scores2.n(), scores2.k());
  for (std::size_t i = 0; i < scores2.n(); ++i)
    for (std::size_t j = 0; j < scores2.k(); ++j) out.u(i, j) = cdfs[j].eval(scores2.s(i, j));
  return out;
}

/// Rank-based joint CDF estimator with an implicit augmentation point that is
/// never dominated: C(u) = #{ i : u^i_j < u_j for all j } / (m + 1). Strict
/// inequality throughout, so the estimator's range is [0, m/(m+1)].
class EmpiricalCopula {
 public:
  EmpiricalCopula() = default;
  explicit EmpiricalCopula(UMatrix points) : points_(std::move(points)) {}

  std::size_t m() const { return points_.m(); }
  std::size_t k() const { return points_.k(); }
  const UMatrix& points() const { return points_; }

  /// Number of stored points strictly dominated coordinate-wise by u.
  std::size_t dominated_count(const std::vector<double>& u) const {
    std::size_t count = 0;
    for (std::size_t i = 0; i < m(); ++i) {
      bool dominated = true;
      for (std::size_t j = 0; j < k(); ++j) {
        if (!(points_.u(i, j) < u[j])) {
          dominated = false;
          break;
        }
      }
      if (dominated) ++count;
    }
    return count;
  }

  double eval(const std::vector<double>& u) const {
    if (u.size() != k()) throw ShapeMismatch("copula evaluation dimension mismatch");
    for (double v : u)
      if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput("copula argument outside [0,1]");
    return static_cast<double>(dominated_count(u)) / static_cast<double>(m() + 1);
  }

 private:
  UMatrix points_;
};

inline double copula_eval(const EmpiricalCopula& c, const std::vector<double>& u) {
  return c.eval(u);
}

/// Coordinate-wise partial order on R^k.
inline bool partial_order_leq(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ShapeMismatch("partial order needs equal lengths");
  for (std::size_t j = 0; j < a.size(); ++j)
    if (!(a[j] <= b[j])) return false;
  return true;
}

/// Universal copula envelopes: (max(1-k+sum u_j, 0), min_j u_j).
inline std::pair<double, double> frechet_bounds(const std::vector<double>& u) {
  if (u.empty()) throw InvalidInput("frechet_bounds of empty vector");
  double sum = 0.0, mn = 1.0;
  for (double v : u) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput("frechet_bounds argument outside [0,1]");
    sum += v;
    mn = std::min(mn, v);
  }
  const double lower = std::max(1.0 - static_cast<double>(u.size()) + sum, 0.0);
  return {lower, mn};
}

/// Independence reference: product of coordinates.
inline double product_copula(const std::vector<double>& u) {
  if (u.empty()) throw InvalidInput("product_copula of empty vector");
  double p = 1.0;
  for (double v : u) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput("product_copula argument outside [0,1]");
    p *= v;
  }
  return p;
}

}  // namespace ccp
