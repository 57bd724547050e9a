#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ccp/conformal.hpp"
#include "ccp/copula.hpp"
#include "ccp/errors.hpp"

namespace ccp {

struct SgdConfig {
  std::size_t steps = 500;
  double learning_rate = 0.05;
  double temperature = 0.02;  // sigmoid sharpness is 1/temperature
  std::uint64_t seed = 0;

  void validate() const {
    if (steps < 1) throw InvalidParam("sgd steps must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw InvalidParam("sgd learning_rate must be finite and > 0");
    if (!(temperature > 0.0) || !std::isfinite(temperature))
      throw InvalidParam("sgd temperature must be finite and > 0");
  }
};

namespace detail {

// Points strictly dominated by the given levels, where a masked (unbounded)
// coordinate accepts everything. The augmentation point is dominated only
// when every coordinate is unbounded, which is why all-infinite thresholds
// are always feasible.
inline std::size_t feasible_count(const EmpiricalCopula& c, const std::vector<double>& levels,
                                  const std::vector<bool>& unbounded) {
  const std::size_t m = c.m();
  const std::size_t k = c.k();
  std::size_t count = 0;
  for (std::size_t i = 0; i < m; ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < k; ++j) {
      if (unbounded[j]) continue;
      if (!(c.points().u(i, j) < levels[j])) {
        ok = false;
        break;
      }
    }
    if (ok) ++count;
  }
  bool all_unbounded = true;
  for (std::size_t j = 0; j < k; ++j)
    if (!unbounded[j]) all_unbounded = false;
  if (all_unbounded) ++count;
  return count;
}

inline std::size_t needed_count(double alpha, std::size_t m) {
  return rank_ceil(1.0 - alpha, m + 1);
}

inline std::size_t shared_cal_size(const std::vector<EmpiricalCdf>& cdfs) {
  if (cdfs.empty()) throw InvalidInput("no per-step CDFs supplied");
  const std::size_t n1 = cdfs.front().n();
  for (const auto& f : cdfs)
    if (f.n() != n1) throw ShapeMismatch("per-step CDFs were fit on different sample counts");
  return n1;
}

}  // namespace detail

/// Exact counting check of the joint coverage constraint for a candidate
/// threshold vector; no smoothing.
inline bool verify_feasible(const EmpiricalCopula& c, const std::vector<EmpiricalCdf>& cdfs,
                            const ThresholdVector& tv, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidLevel("alpha must lie in (0,1)");
  if (tv.k() != c.k() || cdfs.size() != c.k())
    throw ShapeMismatch("verify_feasible: dimension mismatch");
  std::vector<double> levels(tv.k(), 1.0);
  std::vector<bool> unbounded(tv.k(), false);
  for (std::size_t j = 0; j < tv.k(); ++j) {
    if (is_unbounded(tv.s_star[j]))
      unbounded[j] = true;
    else
      levels[j] = cdfs[j].eval(tv.s_star[j]);
  }
  return detail::feasible_count(c, levels, unbounded) >= detail::needed_count(alpha, c.m());
}

/// Shared-level search: the smallest level t* on the calibration rank grid
/// with C(t*, ..., t*) >= 1 - alpha, found by bisection over the grid (the
/// copula is coordinate-wise monotone, so the feasible set is an up-set).
/// All thresholds become +inf when even t = 1 fails.
inline ThresholdVector dichotomy_search(const EmpiricalCopula& c,
                                        const std::vector<EmpiricalCdf>& cdfs, double alpha,
                                        double tol = 1e-9) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidLevel("alpha must lie in (0,1)");
  if (!(tol > 0.0)) throw InvalidLevel("tol must be > 0");
  const std::size_t k = c.k();
  if (cdfs.size() != k) throw ShapeMismatch("dichotomy_search: dimension mismatch");
  const std::size_t n1 = detail::shared_cal_size(cdfs);
  const std::size_t needed = detail::needed_count(alpha, c.m());
  const std::vector<bool> no_mask(k, false);

  auto count_at = [&](std::size_t idx) {
    const std::vector<double> levels(k, static_cast<double>(idx) / static_cast<double>(n1));
    return detail::feasible_count(c, levels, no_mask);
  };

  ThresholdVector tv;
  tv.method = CalibrationMethod::kDichotomy;
  if (count_at(n1) < needed) {
    tv.s_star.assign(k, kInf);
    tv.alpha_j.assign(k, 0.0);
    return tv;
  }
  std::size_t lo = detail::rank_ceil(1.0 - alpha, n1);  // smallest grid level >= 1 - alpha
  std::size_t hi = n1;
  if (count_at(lo) >= needed) {
    hi = lo;
  } else {
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (count_at(mid) >= needed)
        hi = mid;
      else
        lo = mid;
    }
  }
  const double t_star = static_cast<double>(hi) / static_cast<double>(n1);
  tv.s_star.resize(k);
  for (std::size_t j = 0; j < k; ++j) tv.s_star[j] = cdfs[j].inverse(t_star);
  tv.alpha_j = detail::alpha_from_thresholds(cdfs, tv.s_star);
  return tv;
}

namespace detail {

struct LevelState {
  // Grid index per coordinate (level = idx / n1) plus an unbounded flag.
  std::vector<std::size_t> idx;
  std::vector<bool> unbounded;

  std::vector<double> levels(std::size_t n1) const {
    std::vector<double> out(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j)
      out[j] = static_cast<double>(idx[j]) / static_cast<double>(n1);
    return out;
  }
};

// Raises levels one rank step at a time until the exact constraint holds,
// preferring the raise with the smallest increase of sum_j r_j^dim (the
// per-step ball measures share one dimensional constant, so comparing powers
// of the radii is enough). Coordinates exhaust the finite grid before being
// promoted to unbounded; with every coordinate unbounded the constraint holds
// trivially, so the loop is bounded by k*(n1+2) raises.
inline void repair_to_feasible(const EmpiricalCopula& c, const std::vector<EmpiricalCdf>& cdfs,
                               std::size_t n1, std::size_t needed, std::size_t dim,
                               LevelState& st) {
  const std::size_t k = st.idx.size();
  auto radius_at = [&](std::size_t j, std::size_t idx) {
    return cdfs[j].inverse(static_cast<double>(idx) / static_cast<double>(n1));
  };
  while (feasible_count(c, st.levels(n1), st.unbounded) < needed) {
    std::size_t best = k;
    double best_cost = kInf;
    for (std::size_t j = 0; j < k; ++j) {
      if (st.unbounded[j] || st.idx[j] >= n1) continue;
      const double r0 = radius_at(j, st.idx[j]);
      const double r1 = radius_at(j, st.idx[j] + 1);
      const double cost = std::pow(r1, static_cast<double>(dim)) -
                          std::pow(r0, static_cast<double>(dim));
      if (cost < best_cost) {
        best_cost = cost;
        best = j;
      }
    }
    if (best < k) {
      ++st.idx[best];
      continue;
    }
    // Finite grid exhausted: promote the first bounded coordinate.
    bool promoted = false;
    for (std::size_t j = 0; j < k; ++j) {
      if (!st.unbounded[j]) {
        st.unbounded[j] = true;
        promoted = true;
        break;
      }
    }
    if (!promoted) break;  // all unbounded; feasible_count covers this
  }
}

// Lowers every bounded level onto the support of its dominated set: the
// final level of coordinate j becomes one rank step above the largest
// dominated u-value in that coordinate. The dominated set is unchanged, so
// feasibility is preserved; this removes the slack the grid projection and
// repair leave above the points that actually carry the constraint.
inline void snap_to_support(const EmpiricalCopula& c, std::size_t n1, LevelState& st) {
  const std::size_t k = st.idx.size();
  const std::size_t m = c.m();
  const auto levels = st.levels(n1);
  std::vector<std::size_t> top(k, 0);
  bool any = false;
  for (std::size_t i = 0; i < m; ++i) {
    bool dominated = true;
    for (std::size_t j = 0; j < k; ++j) {
      if (st.unbounded[j]) continue;
      if (!(c.points().u(i, j) < levels[j])) {
        dominated = false;
        break;
      }
    }
    if (!dominated) continue;
    any = true;
    for (std::size_t j = 0; j < k; ++j) {
      // u-values sit exactly on the rank grid of the CDF sample.
      const auto rank = static_cast<std::size_t>(
          std::llround(c.points().u(i, j) * static_cast<double>(n1)));
      top[j] = std::max(top[j], rank + 1);
    }
  }
  if (!any) return;
  for (std::size_t j = 0; j < k; ++j)
    if (!st.unbounded[j]) st.idx[j] = std::min(st.idx[j], top[j]);
}

}  // namespace detail

/// Per-step level search via a smoothed surrogate. The indicator counting of
/// the empirical copula has a zero gradient almost everywhere, so descent
/// directions come from a relaxation where each indicator becomes a sigmoid
/// of sharpness 1/temperature, while the residual being driven to zero is the
/// exact count (the relaxed count is biased low for long horizons, which
/// would otherwise push every level to the clamp). Adam on full-batch
/// gradients, so the run is deterministic. The optimized levels are then
/// projected up to the calibration rank grid and repaired by the exact
/// verifier, so the returned thresholds always satisfy the un-smoothed
/// constraint.
inline ThresholdVector sgd_search(const EmpiricalCopula& c,
                                  const std::vector<EmpiricalCdf>& cdfs, double alpha,
                                  const SgdConfig& cfg, std::size_t dim) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidLevel("alpha must lie in (0,1)");
  cfg.validate();
  if (dim < 1) throw InvalidParam("sgd_search: dim must be >= 1");
  const std::size_t k = c.k();
  if (cdfs.size() != k) throw ShapeMismatch("sgd_search: dimension mismatch");
  const std::size_t n1 = detail::shared_cal_size(cdfs);
  const std::size_t m = c.m();
  const double target = 1.0 - alpha;
  const double tau = cfg.temperature;

  std::vector<double> t(k, 1.0 - alpha / static_cast<double>(k));
  std::vector<double> adam_m(k, 0.0), adam_v(k, 0.0);
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  std::vector<double> sig(k), prefix(k + 1), suffix(k + 1), grad(k);
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    std::size_t exact = 0;
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      bool dominated = true;
      for (std::size_t j = 0; j < k; ++j) {
        const double u = c.points().u(i, j);
        if (!(u < t[j])) dominated = false;
        const double z = (t[j] - u) / tau;
        sig[j] = 1.0 / (1.0 + std::exp(-z));
      }
      if (dominated) ++exact;
      prefix[0] = 1.0;
      for (std::size_t j = 0; j < k; ++j) prefix[j + 1] = prefix[j] * sig[j];
      suffix[k] = 1.0;
      for (std::size_t j = k; j > 0; --j) suffix[j - 1] = suffix[j] * sig[j - 1];
      for (std::size_t j = 0; j < k; ++j) {
        const double others = prefix[j] * suffix[j + 1];
        grad[j] += others * sig[j] * (1.0 - sig[j]) / tau;
      }
    }
    const double denom = static_cast<double>(m + 1);
    const double cov = static_cast<double>(exact) / denom;
    const double scale = 2.0 * (cov - target) / denom;
    // Linear decay to a tenth of the initial rate: once the constraint
    // surface is reached the residual keeps changing sign, and a fixed step
    // size would let the levels random-walk apart along the surface.
    const double lr = cfg.learning_rate *
                      (1.0 - 0.9 * static_cast<double>(step - 1) /
                                 static_cast<double>(cfg.steps));
    for (std::size_t j = 0; j < k; ++j) {
      const double g = scale * grad[j];
      adam_m[j] = beta1 * adam_m[j] + (1.0 - beta1) * g;
      adam_v[j] = beta2 * adam_v[j] + (1.0 - beta2) * g * g;
      const double mhat = adam_m[j] / (1.0 - std::pow(beta1, static_cast<double>(step)));
      const double vhat = adam_v[j] / (1.0 - std::pow(beta2, static_cast<double>(step)));
      t[j] -= lr * mhat / (std::sqrt(vhat) + eps);
      t[j] = std::clamp(t[j], 0.0, 1.0);
    }
  }

  detail::LevelState st;
  st.idx.resize(k);
  st.unbounded.assign(k, false);
  for (std::size_t j = 0; j < k; ++j) {
    const double q = t[j] * static_cast<double>(n1);
    auto idx = static_cast<long long>(std::ceil(q - 1e-9));
    st.idx[j] = static_cast<std::size_t>(std::clamp<long long>(idx, 0, static_cast<long long>(n1)));
  }
  const std::size_t needed = detail::needed_count(alpha, m);
  detail::repair_to_feasible(c, cdfs, n1, needed, dim, st);
  detail::snap_to_support(c, n1, st);

  ThresholdVector tv;
  tv.method = CalibrationMethod::kSgd;
  tv.s_star.resize(k);
  for (std::size_t j = 0; j < k; ++j)
    tv.s_star[j] = st.unbounded[j]
                       ? kInf
                       : cdfs[j].inverse(static_cast<double>(st.idx[j]) / static_cast<double>(n1));
  tv.alpha_j = detail::alpha_from_thresholds(cdfs, tv.s_star);
  return tv;
}

}  // namespace ccp
