#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ccp/dataset.hpp"
#include "ccp/errors.hpp"
#include "ccp/forecaster.hpp"
#include "ccp/matrix.hpp"

namespace ccp {

/// Per-sample, per-step nonconformity scores: row i holds the scores of
/// sample i across the k horizon steps.
struct ScoreMatrix {
  Mat s;
  std::string source;

  std::size_t n() const { return s.rows(); }
  std::size_t k() const { return s.cols(); }
};

namespace detail {
// Smallest integer r with r >= level*m, guarded against the floating product
// landing epsilon above an exact integer.
inline std::size_t rank_ceil(double level, std::size_t m) {
  const double q = level * static_cast<double>(m);
  auto r = static_cast<long long>(std::ceil(q - 1e-9));
  if (r < 1) r = 1;
  return static_cast<std::size_t>(r);
}
}  // namespace detail

inline ScoreMatrix scores_from_predictions(const std::vector<Mat>& predictions,
                                           const Dataset& ds) {
  if (predictions.size() != ds.size())
    throw ShapeMismatch("scores_from_predictions: prediction count != sample count");
  ScoreMatrix out;
  out.s = Mat(ds.size(), ds.meta.k);
  out.source = ds.meta.source;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& pred = predictions[i];
    if (pred.rows() != ds.meta.k || pred.cols() != ds.meta.d)
      throw ShapeMismatch("scores_from_predictions: prediction shape mismatch");
    for (std::size_t j = 0; j < ds.meta.k; ++j)
      out.s(i, j) = row_distance(ds.samples[i].y, j, pred, j);
  }
  return out;
}

/// Per-step Euclidean disagreement between targets and forecasts.
inline ScoreMatrix nonconformity(const ForecasterPtr& f, const Dataset& ds) {
  ds.validate();
  if (f->horizon() != ds.meta.k || f->dim() != ds.meta.d || f->input_steps() != ds.meta.t)
    throw ShapeMismatch("nonconformity: forecaster shape does not match dataset");
  std::vector<Mat> preds;
  preds.reserve(ds.size());
  for (const auto& sample : ds.samples) preds.push_back(f->predict(sample.x));
  return scores_from_predictions(preds, ds);
}

/// Conformal quantile: the smallest s* such that at least `level` of the
/// (optionally infinity-augmented) score multiset is <= s*. Equals the r-th
/// smallest element with r = ceil(level * m); returns +inf when r points at
/// the augmentation element.
inline double quantile(double level, const std::vector<double>& scores, bool augment_inf) {
  if (!(level > 0.0 && level <= 1.0)) throw InvalidLevel("quantile level must lie in (0,1]");
  if (scores.empty()) throw InvalidInput("quantile of empty score list");
  for (double v : scores)
    if (std::isnan(v)) throw NonFinite("quantile: NaN score");
  const std::size_t m = scores.size() + (augment_inf ? 1 : 0);
  const std::size_t r = detail::rank_ceil(level, m);
  if (r > scores.size()) return kInf;
  std::vector<double> sorted(scores);
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(r - 1),
                   sorted.end());
  return sorted[r - 1];
}

/// Step function F(s) = (1/n) * #{ s_i <= s } over one step's calibration
/// scores, with the matching generalized inverse.
class EmpiricalCdf {
 public:
  EmpiricalCdf() = default;
  explicit EmpiricalCdf(std::vector<double> scores) : sorted_(std::move(scores)) {
    if (sorted_.empty()) throw InvalidInput("empirical CDF needs at least one score");
    for (double v : sorted_)
      if (!std::isfinite(v)) throw NonFinite("empirical CDF: non-finite score");
    std::sort(sorted_.begin(), sorted_.end());
  }

  std::size_t n() const { return sorted_.size(); }
  const std::vector<double>& sorted_scores() const { return sorted_; }

  double eval(double s) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), s);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
  }

  /// Smallest score s with eval(s) >= p; p = 0 maps to the smallest score.
  double inverse(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidLevel("cdf inverse needs p in [0,1]");
    std::size_t r = p == 0.0 ? 1 : detail::rank_ceil(p, sorted_.size());
    if (r > sorted_.size()) r = sorted_.size();
    return sorted_[r - 1];
  }

 private:
  std::vector<double> sorted_;
};

inline EmpiricalCdf cdf_fit(std::vector<double> scores_j) { return EmpiricalCdf(std::move(scores_j)); }
inline double cdf_eval(const EmpiricalCdf& f, double s) { return f.eval(s); }
inline double cdf_inverse(const EmpiricalCdf& f, double p) { return f.inverse(p); }

inline std::vector<EmpiricalCdf> fit_step_cdfs(const ScoreMatrix& scores) {
  std::vector<EmpiricalCdf> cdfs;
  cdfs.reserve(scores.k());
  for (std::size_t j = 0; j < scores.k(); ++j) cdfs.emplace_back(scores.s.col(j));
  return cdfs;
}

enum class CalibrationMethod { kDichotomy, kSgd, kBonferroni, kL2Concat };

inline CalibrationMethod method_from_string(const std::string& s) {
  if (s == "dichotomy") return CalibrationMethod::kDichotomy;
  if (s == "sgd") return CalibrationMethod::kSgd;
  if (s == "bonferroni") return CalibrationMethod::kBonferroni;
  if (s == "l2concat") return CalibrationMethod::kL2Concat;
  throw InvalidParam("unknown calibration method '" + s + "'");
}

inline std::string to_string(CalibrationMethod m) {
  switch (m) {
    case CalibrationMethod::kDichotomy: return "dichotomy";
    case CalibrationMethod::kSgd: return "sgd";
    case CalibrationMethod::kBonferroni: return "bonferroni";
    case CalibrationMethod::kL2Concat: return "l2concat";
  }
  return "?";
}

/// Frozen per-step score thresholds plus the per-step miscoverage each one
/// implies under the fitted CDFs.
struct ThresholdVector {
  std::vector<double> s_star;   // entries >= 0, +inf marks an unbounded step
  std::vector<double> alpha_j;  // alpha_j[j] = 1 - F_j(s_star[j])
  CalibrationMethod method = CalibrationMethod::kDichotomy;

  std::size_t k() const { return s_star.size(); }
  bool any_unbounded() const {
    for (double r : s_star)
      if (is_unbounded(r)) return true;
    return false;
  }
};

namespace detail {
inline std::vector<double> alpha_from_thresholds(const std::vector<EmpiricalCdf>& cdfs,
                                                 const std::vector<double>& s_star) {
  std::vector<double> a(s_star.size());
  for (std::size_t j = 0; j < s_star.size(); ++j)
    a[j] = is_unbounded(s_star[j]) ? 0.0 : 1.0 - cdfs[j].eval(s_star[j]);
  return a;
}
}  // namespace detail

/// Union-bound baseline: per-step augmented quantile at level 1 - alpha/k.
inline ThresholdVector bonferroni_calibrate(const ScoreMatrix& scores, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidLevel("alpha must lie in (0,1)");
  const auto k = scores.k();
  ThresholdVector tv;
  tv.method = CalibrationMethod::kBonferroni;
  tv.s_star.resize(k);
  const double level = 1.0 - alpha / static_cast<double>(k);
  std::vector<EmpiricalCdf> cdfs = fit_step_cdfs(scores);
  for (std::size_t j = 0; j < k; ++j) tv.s_star[j] = quantile(level, scores.s.col(j), true);
  tv.alpha_j = detail::alpha_from_thresholds(cdfs, tv.s_star);
  return tv;
}

/// Full-horizon residual norms, one per sample: || y_{1:k} - yhat_{1:k} ||
/// over the flattened k*d horizon.
inline std::vector<double> concat_scores(const ForecasterPtr& f, const Dataset& ds) {
  ds.validate();
  if (f->horizon() != ds.meta.k || f->dim() != ds.meta.d || f->input_steps() != ds.meta.t)
    throw ShapeMismatch("concat_scores: forecaster shape does not match dataset");
  std::vector<double> out;
  out.reserve(ds.size());
  for (const auto& sample : ds.samples) {
    const Mat pred = f->predict(sample.x);
    double acc = 0.0;
    for (std::size_t idx = 0; idx < pred.data().size(); ++idx) {
      const double diff = sample.y.data()[idx] - pred.data()[idx];
      acc += diff * diff;
    }
    out.push_back(std::sqrt(acc));
  }
  return out;
}

/// Single ICP radius on the concatenated-norm score. The per-step rendering
/// uses this radius at every step: the largest deviation one step can take
/// while the full-horizon norm stays within bound.
inline double l2_concat_calibrate(const std::vector<double>& scores_concat, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidLevel("alpha must lie in (0,1)");
  return quantile(1.0 - alpha, scores_concat, true);
}

}  // namespace ccp
