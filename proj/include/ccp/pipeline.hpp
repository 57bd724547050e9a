#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ccp/conformal.hpp"
#include "ccp/copula.hpp"
#include "ccp/dataset.hpp"
#include "ccp/errors.hpp"
#include "ccp/forecaster.hpp"
#include "ccp/search.hpp"

namespace ccp {

struct ModelMeta {
  std::size_t n_train = 0;
  std::size_t n_cal1 = 0;
  std::size_t n_cal2 = 0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
};

/// Frozen calibration output: thresholds plus everything needed to emit and
/// extend confidence regions. Immutable after calibrate().
struct CalibratedModel {
  ThresholdVector thresholds;
  std::vector<EmpiricalCdf> cdfs;
  std::optional<EmpiricalCopula> copula;  // present for dichotomy/sgd methods
  double alpha = 0.1;
  ForecasterPtr forecaster;
  ModelMeta meta;

  std::size_t horizon() const { return thresholds.k(); }
};

/// Per-step balls around the point forecast: step j covers
/// { y : ||y - centers[j]|| < radii[j] }.
struct ConfidenceRegion {
  Mat centers;                // k x d
  std::vector<double> radii;  // length k, +inf marks an unbounded step

  std::size_t steps() const { return radii.size(); }
  bool any_unbounded() const {
    for (double r : radii)
      if (is_unbounded(r)) return true;
    return false;
  }
};

/// End-to-end calibration: split, train, score, then find thresholds with the
/// requested method. Copula methods fit per-step CDFs on the first
/// calibration half and calibrate the copula on the second; the baselines use
/// the whole calibration set for plain ICP.
inline CalibratedModel calibrate(const Dataset& ds, const SplitSpec& spec,
                                 const ForecasterSpec& fspec, double alpha,
                                 CalibrationMethod method, const SgdConfig& sgd = {}) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidLevel("alpha must lie in (0,1)");
  SplitResult parts;
  try {
    parts = split(ds, spec);
  } catch (const EmptySubset& e) {
    throw InsufficientCalibration(e.what());
  }

  CalibratedModel model;
  model.alpha = alpha;
  model.meta = {parts.train.size(), parts.cal1.size(), parts.cal2.size(), parts.test.size(),
                spec.seed};
  model.forecaster = fit(fspec, parts.train);

  if (method == CalibrationMethod::kBonferroni || method == CalibrationMethod::kL2Concat) {
    const Dataset cal = concat(parts.cal1, parts.cal2);
    const ScoreMatrix scores = nonconformity(model.forecaster, cal);
    model.cdfs = fit_step_cdfs(scores);
    if (method == CalibrationMethod::kBonferroni) {
      model.thresholds = bonferroni_calibrate(scores, alpha);
    } else {
      const double radius = l2_concat_calibrate(concat_scores(model.forecaster, cal), alpha);
      model.thresholds.method = CalibrationMethod::kL2Concat;
      model.thresholds.s_star.assign(ds.meta.k, radius);
      model.thresholds.alpha_j = detail::alpha_from_thresholds(model.cdfs, model.thresholds.s_star);
    }
  } else {
    const ScoreMatrix s1 = nonconformity(model.forecaster, parts.cal1);
    model.cdfs = fit_step_cdfs(s1);
    const ScoreMatrix s2 = nonconformity(model.forecaster, parts.cal2);
    model.copula = EmpiricalCopula(compute_u(model.cdfs, s2));
    model.thresholds = method == CalibrationMethod::kDichotomy
                           ? dichotomy_search(*model.copula, model.cdfs, alpha)
                           : sgd_search(*model.copula, model.cdfs, alpha, sgd, ds.meta.d);
  }
  return model;
}

inline ConfidenceRegion predict_regions(const CalibratedModel& m, const Mat& x) {
  ConfidenceRegion region;
  region.centers = m.forecaster->predict(x);
  region.radii = m.thresholds.s_star;
  return region;
}

/// Rolls a fixed-horizon forecaster out to `kp` steps by feeding point
/// predictions back into the input window; each extra step takes the last row
/// of the re-predicted horizon.
inline Mat roll_forecast(const ForecasterPtr& f, const Mat& x, std::size_t kp) {
  const std::size_t t = f->input_steps();
  const std::size_t k = f->horizon();
  const std::size_t d = f->dim();
  if (kp < k) throw InvalidParam("roll_forecast: kp must be >= forecaster horizon");

  std::vector<std::vector<double>> history;  // observed inputs then predictions
  history.reserve(t + kp);
  for (std::size_t r = 0; r < t; ++r) history.push_back(x.row(r));
  const Mat first = f->predict(x);
  for (std::size_t r = 0; r < k; ++r) history.push_back(first.row(r));
  for (std::size_t extra = 1; extra + k <= kp; ++extra) {
    Mat window(t, d);
    for (std::size_t r = 0; r < t; ++r)
      for (std::size_t c = 0; c < d; ++c) window(r, c) = history[extra + r][c];
    const Mat pred = f->predict(window);
    history.push_back(pred.row(k - 1));
  }
  Mat out(kp, d);
  for (std::size_t r = 0; r < kp; ++r)
    for (std::size_t c = 0; c < d; ++c) out(r, c) = history[t + r][c];
  return out;
}

/// Autoregressive extension under a stationarity assumption: the calibrated
/// copula is reused for every sliding window of k steps. For each step past
/// the horizon, the previous k-1 levels stay fixed and the level of the new
/// step is the smallest grid value keeping the window constraint satisfied;
/// its radius comes from the last step's CDF.
inline ConfidenceRegion ar_predict_fixed(const CalibratedModel& m, const Mat& x,
                                         std::size_t kp) {
  const std::size_t k = m.horizon();
  if (kp < k) throw InvalidParam("ar_predict_fixed: kp must be >= calibrated horizon");
  if (!m.copula)
    throw InvalidParam("ar_predict_fixed requires a copula-calibrated model");

  ConfidenceRegion region;
  region.centers = roll_forecast(m.forecaster, x, kp);
  region.radii = m.thresholds.s_star;
  if (kp == k) return region;

  const EmpiricalCopula& c = *m.copula;
  const std::size_t n1 = detail::shared_cal_size(m.cdfs);
  const std::size_t needed = detail::needed_count(m.alpha, c.m());
  std::vector<double> levels(k, 1.0);
  std::vector<bool> mask(k, false);
  for (std::size_t j = 0; j < k; ++j) {
    if (is_unbounded(m.thresholds.s_star[j]))
      mask[j] = true;
    else
      levels[j] = m.cdfs[j].eval(m.thresholds.s_star[j]);
  }

  for (std::size_t step = k; step < kp; ++step) {
    // Slide the window: drop the oldest level, search the newest.
    for (std::size_t j = 0; j + 1 < k; ++j) {
      levels[j] = levels[j + 1];
      mask[j] = mask[j + 1];
    }
    mask[k - 1] = false;
    auto feasible_at = [&](std::size_t idx) {
      levels[k - 1] = static_cast<double>(idx) / static_cast<double>(n1);
      return detail::feasible_count(c, levels, mask) >= needed;
    };
    if (!feasible_at(n1)) {
      mask[k - 1] = true;
      levels[k - 1] = 1.0;
      region.radii.push_back(kInf);
      continue;
    }
    std::size_t lo = 0, hi = n1;
    if (!feasible_at(0)) {
      while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (feasible_at(mid))
          hi = mid;
        else
          lo = mid;
      }
    } else {
      hi = 0;
    }
    const double u_new = static_cast<double>(hi) / static_cast<double>(n1);
    levels[k - 1] = u_new;
    region.radii.push_back(m.cdfs[k - 1].inverse(u_new));
  }
  return region;
}

struct ArWindowCalibration {
  std::size_t start = 0;  // first target step covered by this window
  ThresholdVector thresholds;
};

/// Sliding-window calibration for autoregressive prediction without the
/// stationarity assumption: one copula per window of k steps, each calibrated
/// independently on the rolled-forecast scores of that window.
struct ArReestimated {
  ForecasterPtr forecaster;
  std::vector<ArWindowCalibration> windows;
  double alpha = 0.1;
  std::size_t k = 0;
  std::size_t kp = 0;

  /// Step j < k takes window 0's threshold j; every later step takes the
  /// final threshold of the window that ends there.
  ConfidenceRegion predict(const Mat& x) const {
    ConfidenceRegion region;
    region.centers = roll_forecast(forecaster, x, kp);
    region.radii.resize(kp);
    for (std::size_t j = 0; j < kp; ++j) {
      if (j < k)
        region.radii[j] = windows.front().thresholds.s_star[j];
      else
        region.radii[j] = windows[j - k + 1].thresholds.s_star[k - 1];
    }
    return region;
  }
};

/// Requires calibration targets that span the full kp steps.
inline ArReestimated ar_reestimate_calibrate(const Dataset& ds, const SplitSpec& spec,
                                             const ForecasterSpec& fspec, double alpha,
                                             CalibrationMethod method, std::size_t k,
                                             std::size_t kp, const SgdConfig& sgd = {}) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidLevel("alpha must lie in (0,1)");
  if (k < 1 || kp < k) throw InvalidParam("ar_reestimate_calibrate: need 1 <= k <= kp");
  if (method != CalibrationMethod::kDichotomy && method != CalibrationMethod::kSgd)
    throw InvalidParam("ar_reestimate_calibrate requires a copula search method");
  if (ds.meta.k < kp)
    throw InsufficientCalibration("calibration targets cover " + std::to_string(ds.meta.k) +
                                  " steps, need " + std::to_string(kp));
  SplitResult parts;
  try {
    parts = split(ds, spec);
  } catch (const EmptySubset& e) {
    throw InsufficientCalibration(e.what());
  }
  ArReestimated out;
  out.alpha = alpha;
  out.k = k;
  out.kp = kp;
  out.forecaster = fit(fspec, with_horizon(parts.train, k));

  auto rolled_scores = [&](const Dataset& subset) {
    Mat s(subset.size(), kp);
    for (std::size_t i = 0; i < subset.size(); ++i) {
      const Mat pred = roll_forecast(out.forecaster, subset.samples[i].x, kp);
      for (std::size_t j = 0; j < kp; ++j)
        s(i, j) = row_distance(subset.samples[i].y, j, pred, j);
    }
    return s;
  };
  const Mat s1 = rolled_scores(parts.cal1);
  const Mat s2 = rolled_scores(parts.cal2);

  out.windows.reserve(kp - k + 1);
  for (std::size_t w = 0; w + k <= kp; ++w) {
    std::vector<EmpiricalCdf> cdfs;
    cdfs.reserve(k);
    for (std::size_t j = 0; j < k; ++j) cdfs.emplace_back(s1.col(w + j));
    ScoreMatrix window_scores;
    window_scores.s = Mat(s2.rows(), k);
    for (std::size_t i = 0; i < s2.rows(); ++i)
      for (std::size_t j = 0; j < k; ++j) window_scores.s(i, j) = s2(i, w + j);
    const EmpiricalCopula c(compute_u(cdfs, window_scores));
    ThresholdVector tv = method == CalibrationMethod::kDichotomy
                             ? dichotomy_search(c, cdfs, alpha)
                             : sgd_search(c, cdfs, alpha, sgd, ds.meta.d);
    out.windows.push_back({w, std::move(tv)});
  }
  return out;
}

struct ArReestimateResult {
  ConfidenceRegion region;
  std::vector<ArWindowCalibration> windows;
};

inline ArReestimateResult ar_predict_reestimate(const Dataset& ds, const SplitSpec& spec,
                                                const ForecasterSpec& fspec, double alpha,
                                                CalibrationMethod method, std::size_t k,
                                                std::size_t kp, const Mat& x,
                                                const SgdConfig& sgd = {}) {
  const ArReestimated cal = ar_reestimate_calibrate(ds, spec, fspec, alpha, method, k, kp, sgd);
  return {cal.predict(x), cal.windows};
}

}  // namespace ccp
