#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "ccp/dataset.hpp"
#include "ccp/errors.hpp"
#include "ccp/generators.hpp"
#include "ccp/pipeline.hpp"

namespace ccp {

/// Validity and efficiency summary of a batch of predictions.
struct EvalReport {
  double joint_coverage = 0.0;
  std::vector<double> per_step_coverage;
  double mean_region_measure = 0.0;  // mean over samples of the summed per-step ball measures
  std::vector<double> per_step_measure;
  double unbounded_fraction = 0.0;
  double alpha = 0.0;
  std::string method;
  std::size_t n_test = 0;
};

/// Lebesgue measure of the d-ball of radius r.
inline double ball_measure(double r, std::size_t d) {
  if (d < 1) throw InvalidParam("ball_measure: d must be >= 1");
  if (std::isnan(r) || r < 0.0) throw InvalidParam("ball_measure: radius must be >= 0");
  if (is_unbounded(r)) return kInf;
  const double dd = static_cast<double>(d);
  return std::pow(M_PI, dd / 2.0) / std::tgamma(dd / 2.0 + 1.0) * std::pow(r, dd);
}

/// Joint and per-step coverage of the truths by the regions; a step is
/// covered only when the truth lies strictly inside its ball.
inline std::pair<double, std::vector<double>> coverage(
    const std::vector<ConfidenceRegion>& regions, const std::vector<Mat>& truths) {
  if (regions.empty() || regions.size() != truths.size())
    throw ShapeMismatch("coverage: regions and truths must be equally sized and non-empty");
  const std::size_t k = regions.front().steps();
  std::vector<double> per_step(k, 0.0);
  double joint = 0.0;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& region = regions[i];
    const auto& y = truths[i];
    if (region.steps() != k || y.rows() != k || y.cols() != region.centers.cols())
      throw ShapeMismatch("coverage: shape mismatch at sample " + std::to_string(i));
    bool all = true;
    for (std::size_t j = 0; j < k; ++j) {
      const bool inside = row_distance(y, j, region.centers, j) < region.radii[j];
      if (inside)
        per_step[j] += 1.0;
      else
        all = false;
    }
    if (all) joint += 1.0;
  }
  const auto n = static_cast<double>(regions.size());
  for (double& v : per_step) v /= n;
  return {joint / n, per_step};
}

inline EvalReport evaluate_regions(const std::vector<ConfidenceRegion>& regions,
                                   const std::vector<Mat>& truths, std::size_t d, double alpha,
                                   const std::string& method) {
  EvalReport report;
  auto [joint, per_step] = coverage(regions, truths);
  report.joint_coverage = joint;
  report.per_step_coverage = std::move(per_step);
  report.alpha = alpha;
  report.method = method;
  report.n_test = regions.size();

  const std::size_t k = regions.front().steps();
  report.per_step_measure.assign(k, 0.0);
  double total = 0.0;
  std::size_t n_unbounded = 0;
  for (const auto& region : regions) {
    double sample_total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double v = ball_measure(region.radii[j], d);
      report.per_step_measure[j] += v / static_cast<double>(regions.size());
      sample_total += v;
    }
    total += sample_total;
    if (region.any_unbounded()) ++n_unbounded;
  }
  report.mean_region_measure = total / static_cast<double>(regions.size());
  report.unbounded_fraction =
      static_cast<double>(n_unbounded) / static_cast<double>(regions.size());
  return report;
}

struct RunResult {
  CalibratedModel model;
  std::vector<std::string> test_ids;
  std::vector<ConfidenceRegion> regions;
  EvalReport report;
};

/// Calibrates on ds per the split spec and evaluates on the held-out test
/// part of the same deterministic split.
inline RunResult run_experiment(const Dataset& ds, const SplitSpec& spec,
                                const ForecasterSpec& fspec, double alpha,
                                CalibrationMethod method, const SgdConfig& sgd = {}) {
  RunResult out;
  out.model = calibrate(ds, spec, fspec, alpha, method, sgd);
  const SplitResult parts = split(ds, spec);
  std::vector<Mat> truths;
  truths.reserve(parts.test.size());
  for (const auto& sample : parts.test.samples) {
    out.test_ids.push_back(sample.series_id);
    out.regions.push_back(predict_regions(out.model, sample.x));
    truths.push_back(sample.y);
  }
  out.report =
      evaluate_regions(out.regions, truths, ds.meta.d, alpha, to_string(method));
  return out;
}

struct SweepRow {
  std::string method;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  double joint_coverage = 0.0;
  double mean_measure = 0.0;
  double unbounded_fraction = 0.0;
  std::size_t k = 0;
  std::size_t n_test = 0;
};

/// One row per (method, alpha, seed): re-split with the given seed, calibrate
/// and evaluate. Within a seed every method and level sees the same split.
inline std::vector<SweepRow> calibration_sweep(const Dataset& ds, const SplitSpec& base_spec,
                                               const ForecasterSpec& fspec,
                                               const std::vector<CalibrationMethod>& methods,
                                               const std::vector<double>& alphas,
                                               const std::vector<std::uint64_t>& seeds,
                                               const SgdConfig& sgd = {}) {
  if (methods.empty() || alphas.empty() || seeds.empty())
    throw InvalidParam("calibration_sweep needs non-empty methods, alphas and seeds");
  for (double a : alphas)
    if (!(a > 0.0 && a < 1.0)) throw InvalidLevel("sweep alpha must lie in (0,1)");
  std::vector<SweepRow> rows;
  rows.reserve(methods.size() * alphas.size() * seeds.size());
  for (const auto method : methods) {
    for (const double alpha : alphas) {
      for (const auto seed : seeds) {
        SplitSpec spec = base_spec;
        spec.seed = seed;
        const RunResult r = run_experiment(ds, spec, fspec, alpha, method, sgd);
        rows.push_back({to_string(method), alpha, seed, r.report.joint_coverage,
                        r.report.mean_region_measure, r.report.unbounded_fraction, ds.meta.k,
                        r.report.n_test});
      }
    }
  }
  return rows;
}

struct OscillatorParams {
  std::size_t n = 2000;
  std::size_t t = 10;
  std::size_t d = 2;
  double sigma = 0.05;
  double rho = 0.5;
};

/// Copula-vs-union-bound comparison over growing horizons on freshly
/// generated oscillator data; the per-k area ratio is recoverable from the
/// paired rows.
inline std::vector<SweepRow> horizon_sweep(const OscillatorParams& params,
                                           const std::vector<std::size_t>& ks,
                                           const SplitSpec& base_spec,
                                           const ForecasterSpec& fspec, double alpha,
                                           const std::vector<std::uint64_t>& seeds,
                                           const SgdConfig& sgd = {}) {
  if (ks.empty() || seeds.empty()) throw InvalidParam("horizon_sweep needs ks and seeds");
  for (std::size_t i = 1; i < ks.size(); ++i)
    if (ks[i] <= ks[i - 1]) throw InvalidParam("horizon_sweep ks must be increasing");
  std::vector<SweepRow> rows;
  const CalibrationMethod methods[] = {CalibrationMethod::kDichotomy,
                                       CalibrationMethod::kBonferroni};
  for (const std::size_t k : ks) {
    for (const auto method : methods) {
      for (const auto seed : seeds) {
        const Dataset ds =
            gen_oscillator(params.n, params.t, k, params.d, params.sigma, params.rho, seed);
        SplitSpec spec = base_spec;
        spec.seed = seed;
        const RunResult r = run_experiment(ds, spec, fspec, alpha, method, sgd);
        rows.push_back({to_string(method), alpha, seed, r.report.joint_coverage,
                        r.report.mean_region_measure, r.report.unbounded_fraction, k,
                        r.report.n_test});
      }
    }
  }
  return rows;
}

inline void write_metrics_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "method,alpha,seed,joint_coverage,mean_measure,unbounded_fraction,k,n_test\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (const auto& row : rows) {
    out << row.method << ",";
    put(row.alpha);
    out << "," << row.seed << ",";
    put(row.joint_coverage);
    out << ",";
    put(row.mean_measure);
    out << ",";
    put(row.unbounded_fraction);
    out << "," << row.k << "," << row.n_test << "\n";
  }
}

inline void write_metrics_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_metrics_csv(rows, out);
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace ccp
