#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ccp/errors.hpp"
#include "ccp/matrix.hpp"
#include "ccp/rng.hpp"

namespace ccp {

/// One exchangeable unit: an input window x (t x d) and a target horizon
/// y (k x d).
struct TimeSeriesSample {
  std::string series_id;
  Mat x;
  Mat y;
};

struct DatasetMeta {
  std::size_t t = 0;
  std::size_t k = 0;
  std::size_t d = 0;
  std::string source;   // generator name or file path
  std::uint64_t seed = 0;
};

/// Ordered collection of samples with homogeneous shapes. Immutable by
/// convention after construction; samples carry no ordering semantics.
struct Dataset {
  std::vector<TimeSeriesSample> samples;
  DatasetMeta meta;

  std::size_t size() const { return samples.size(); }

  void validate() const {
    if (samples.empty()) throw EmptySubset("dataset has no samples");
    if (meta.t < 1 || meta.k < 1 || meta.d < 1)
      throw InvalidParam("dataset meta requires t,k,d >= 1");
    for (const auto& s : samples) {
      if (s.x.rows() != meta.t || s.x.cols() != meta.d || s.y.rows() != meta.k ||
          s.y.cols() != meta.d)
        throw ShapeMismatch("sample '" + s.series_id + "' does not match dataset meta");
      if (!s.x.all_finite() || !s.y.all_finite())
        throw NonFinite("sample '" + s.series_id + "' contains NaN/Inf");
    }
  }
};

struct SplitSpec {
  double train_fraction = 0.45;
  double cal_fraction = 0.45;
  double test_fraction = 0.10;
  double cal_split_fraction = 0.5;  // share of the calibration set used for CDF fitting
  std::uint64_t seed = 0;

  void validate() const {
    auto in_unit = [](double f) { return f > 0.0 && f < 1.0; };
    if (!in_unit(train_fraction) || !in_unit(cal_fraction) || !in_unit(test_fraction) ||
        !in_unit(cal_split_fraction))
      throw InvalidParam("split fractions must lie in (0,1)");
    const double sum = train_fraction + cal_fraction + test_fraction;
    if (std::abs(sum - 1.0) > 1e-9)
      throw InvalidParam("train+cal+test fractions must sum to 1");
  }
};

struct SplitResult {
  Dataset train;
  Dataset cal1;
  Dataset cal2;
  Dataset test;
};

namespace detail {
inline Dataset take(const Dataset& ds, const std::vector<std::size_t>& order,
                    std::size_t begin, std::size_t end) {
  Dataset out;
  out.meta = ds.meta;
  out.samples.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) out.samples.push_back(ds.samples[order[i]]);
  return out;
}
}  // namespace detail

/// Deterministic four-way partition. Sizes: train = floor(n*train_fraction),
/// cal = floor(n*cal_fraction), test = remainder; the CDF half of the
/// calibration set gets ceil(cal * cal_split_fraction).
inline SplitResult split(const Dataset& ds, const SplitSpec& spec) {
  spec.validate();
  ds.validate();
  const std::size_t n = ds.size();
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.train_fraction));
  const auto n_cal = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.cal_fraction));
  const std::size_t n_test = n - n_train - n_cal;
  const auto n_cal1 =
      static_cast<std::size_t>(std::ceil(static_cast<double>(n_cal) * spec.cal_split_fraction));
  const std::size_t n_cal2 = n_cal - n_cal1;
  if (n_train == 0 || n_cal1 == 0 || n_cal2 == 0 || n_test == 0)
    throw EmptySubset("split of " + std::to_string(n) + " samples produces sizes (" +
                      std::to_string(n_train) + "," + std::to_string(n_cal1) + "," +
                      std::to_string(n_cal2) + "," + std::to_string(n_test) + ")");

  const auto order = detail::permutation(n, spec.seed);
  SplitResult out;
  out.train = detail::take(ds, order, 0, n_train);
  out.cal1 = detail::take(ds, order, n_train, n_train + n_cal1);
  out.cal2 = detail::take(ds, order, n_train + n_cal1, n_train + n_cal);
  out.test = detail::take(ds, order, n_train + n_cal, n);
  return out;
}

inline Dataset concat(const Dataset& a, const Dataset& b) {
  if (a.meta.t != b.meta.t || a.meta.k != b.meta.k || a.meta.d != b.meta.d)
    throw ShapeMismatch("cannot concatenate datasets with different shapes");
  Dataset out = a;
  out.samples.insert(out.samples.end(), b.samples.begin(), b.samples.end());
  return out;
}

/// Same samples with targets truncated to the first `k` horizon steps.
inline Dataset with_horizon(const Dataset& ds, std::size_t k) {
  if (k < 1 || k > ds.meta.k)
    throw InvalidParam("with_horizon: k must lie in [1, " + std::to_string(ds.meta.k) + "]");
  Dataset out;
  out.meta = ds.meta;
  out.meta.k = k;
  out.samples.reserve(ds.size());
  for (const auto& s : ds.samples) {
    Mat y(k, ds.meta.d);
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t c = 0; c < ds.meta.d; ++c) y(j, c) = s.y(j, c);
    out.samples.push_back({s.series_id, s.x, std::move(y)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV ingestion. Long format: series_id,step_index,dim_0,...,dim_{d-1} with
// exactly t+k contiguous steps per series.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw ParseError("trailing characters in value '" + s + "' at line " + std::to_string(line_no));
    return v;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("cannot parse value '" + s + "' at line " + std::to_string(line_no));
  }
}

}  // namespace detail

inline Dataset load_csv(const std::string& path, std::size_t t, std::size_t k) {
  if (t < 1 || k < 1) throw InvalidParam("load_csv requires t >= 1 and k >= 1");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file '" + path + "'");
  const auto header = detail::split_fields(line);
  if (header.size() < 3 || header[0] != "series_id" || header[1] != "step_index")
    throw ParseError("expected header series_id,step_index,dim_0,... in '" + path + "'");
  const std::size_t d = header.size() - 2;
  for (std::size_t c = 0; c < d; ++c)
    if (header[2 + c] != "dim_" + std::to_string(c))
      throw ParseError("unexpected header column '" + header[2 + c] + "'");

  // series id -> (step -> values), insertion-ordered
  std::vector<std::string> id_order;
  std::map<std::string, std::map<long, std::vector<double>>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() != 2 + d)
      throw ParseError("expected " + std::to_string(2 + d) + " fields at line " +
                       std::to_string(line_no));
    const std::string& id = fields[0];
    const long step = static_cast<long>(detail::parse_double(fields[1], line_no));
    std::vector<double> vals(d);
    for (std::size_t c = 0; c < d; ++c) {
      vals[c] = detail::parse_double(fields[2 + c], line_no);
      if (!std::isfinite(vals[c]))
        throw NonFinite("non-finite value in series '" + id + "' at line " +
                        std::to_string(line_no));
    }
    if (rows.find(id) == rows.end()) id_order.push_back(id);
    auto& series = rows[id];
    if (!series.emplace(step, std::move(vals)).second)
      throw ParseError("duplicate step " + std::to_string(step) + " in series '" + id + "'");
  }

  Dataset ds;
  ds.meta = {t, k, d, path, 0};
  ds.samples.reserve(id_order.size());
  for (const auto& id : id_order) {
    const auto& series = rows[id];
    if (series.size() != t + k)
      throw RaggedSeries("series '" + id + "' has " + std::to_string(series.size()) +
                         " rows, expected " + std::to_string(t + k));
    Mat x(t, d), y(k, d);
    long expected = 0;
    for (const auto& [step, vals] : series) {
      if (step != expected)
        throw RaggedSeries("series '" + id + "' is missing step " + std::to_string(expected));
      for (std::size_t c = 0; c < d; ++c) {
        if (static_cast<std::size_t>(step) < t)
          x(static_cast<std::size_t>(step), c) = vals[c];
        else
          y(static_cast<std::size_t>(step) - t, c) = vals[c];
      }
      ++expected;
    }
    ds.samples.push_back({id, std::move(x), std::move(y)});
  }
  ds.validate();
  return ds;
}

/// Writes the long-format CSV accepted by load_csv. Values use 17 significant
/// digits so a round trip is lossless.
inline void save_csv(const Dataset& ds, std::ostream& out) {
  out << "series_id,step_index";
  for (std::size_t c = 0; c < ds.meta.d; ++c) out << ",dim_" << c;
  out << "\n";
  char buf[64];
  for (const auto& s : ds.samples) {
    for (std::size_t step = 0; step < ds.meta.t + ds.meta.k; ++step) {
      out << s.series_id << "," << step;
      for (std::size_t c = 0; c < ds.meta.d; ++c) {
        const double v = step < ds.meta.t ? s.x(step, c) : s.y(step - ds.meta.t, c);
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << "," << buf;
      }
      out << "\n";
    }
  }
}

inline void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  save_csv(ds, out);
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace ccp
