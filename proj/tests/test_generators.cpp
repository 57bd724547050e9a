#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "ccp/conformal.hpp"
#include "ccp/copula.hpp"
#include "ccp/forecaster.hpp"
#include "ccp/generators.hpp"

using namespace ccp;

namespace {

// Continues the noiseless oscillation from the last two observed steps using
// the generator's linear recurrence; exact for sigma = 0 inputs.
class RecurrenceOracle final : public Forecaster {
 public:
  RecurrenceOracle(std::size_t t, std::size_t k, std::size_t d) : Forecaster(t, k, d) {}

 protected:
  Mat predict_impl(const Mat& x) const override {
    const double a = 2.0 * std::exp(-kOscillatorDamping) * std::cos(kOscillatorOmega);
    const double b = -std::exp(-2.0 * kOscillatorDamping);
    Mat out(horizon(), dim());
    for (std::size_t c = 0; c < dim(); ++c) {
      double prev = x(x.rows() - 2, c);
      double cur = x(x.rows() - 1, c);
      for (std::size_t j = 0; j < horizon(); ++j) {
        const double next = a * cur + b * prev;
        out(j, c) = next;
        prev = cur;
        cur = next;
      }
    }
    return out;
  }
};

// Looks the clean horizon up by the (noiseless) input window; inputs carry no
// noise, so this is the oracle-mean forecaster for any sigma/rho.
class LookupOracle final : public Forecaster {
 public:
  LookupOracle(const Dataset& clean)
      : Forecaster(clean.meta.t, clean.meta.k, clean.meta.d) {
    for (const auto& s : clean.samples) table_[s.x.data()] = s.y;
  }

 protected:
  Mat predict_impl(const Mat& x) const override {
    const auto it = table_.find(x.data());
    REQUIRE(it != table_.end());
    return it->second;
  }

 private:
  std::map<std::vector<double>, Mat> table_;
};

class ZeroForecaster final : public Forecaster {
 public:
  ZeroForecaster(std::size_t t, std::size_t k, std::size_t d) : Forecaster(t, k, d) {}

 protected:
  Mat predict_impl(const Mat&) const override { return Mat(horizon(), dim()); }
};

double ks_statistic_vs_standard_normal(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const auto n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-xs[i] / std::sqrt(2.0));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - cdf));
    d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
  }
  return d;
}

}  // namespace

TEST_CASE("oscillator rejects bad parameters") {
  CHECK_THROWS_AS(gen_oscillator(0, 3, 2, 1, 0.1, 0.0, 1), InvalidParam);
  CHECK_THROWS_AS(gen_oscillator(5, 3, 2, 1, -0.1, 0.0, 1), InvalidParam);
  CHECK_THROWS_AS(gen_oscillator(5, 3, 2, 1, 0.1, 2.0, 1), InvalidParam);
}

TEST_CASE("oscillator is deterministic per seed") {
  const auto a = gen_oscillator(200, 5, 4, 2, 0.3, 0.7, 42);
  const auto b = gen_oscillator(200, 5, 4, 2, 0.3, 0.7, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.samples[i].x == b.samples[i].x);
    CHECK(a.samples[i].y == b.samples[i].y);
  }
  const auto c = gen_oscillator(200, 5, 4, 2, 0.3, 0.7, 43);
  CHECK_FALSE(a.samples[0].y == c.samples[0].y);
}

TEST_CASE("noiseless oscillator is exactly forecastable") {
  const auto ds = gen_oscillator(50, 6, 5, 3, 0.0, 0.0, 7);
  const auto oracle = std::make_shared<RecurrenceOracle>(6, 5, 3);
  const auto scores = nonconformity(oracle, ds);
  for (std::size_t i = 0; i < scores.n(); ++i)
    for (std::size_t j = 0; j < scores.k(); ++j) CHECK(scores.s(i, j) < 1e-9);
}

TEST_CASE("rho=1 gives one shared noise draw per series") {
  const auto noisy = gen_oscillator(100, 4, 6, 2, 0.1, 1.0, 5);
  const auto clean = gen_oscillator(100, 4, 6, 2, 0.0, 0.0, 5);
  const auto oracle = std::make_shared<LookupOracle>(clean);
  const auto scores = nonconformity(oracle, noisy);
  for (std::size_t i = 0; i < scores.n(); ++i)
    for (std::size_t j = 1; j < scores.k(); ++j)
      CHECK(std::abs(scores.s(i, j) - scores.s(i, 0)) < 1e-9);
}

TEST_CASE("rho interpolates cross-step noise correlation") {
  const auto noisy = gen_oscillator(4000, 4, 2, 1, 0.2, 0.5, 5);
  const auto clean = gen_oscillator(4000, 4, 2, 1, 0.0, 0.5, 5);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    const double e0 = noisy.samples[i].y(0, 0) - clean.samples[i].y(0, 0);
    const double e1 = noisy.samples[i].y(1, 0) - clean.samples[i].y(1, 0);
    sxy += e0 * e1;
    sxx += e0 * e0;
    syy += e1 * e1;
  }
  const double corr = sxy / std::sqrt(sxx * syy);
  CHECK(std::abs(corr - 0.5) < 0.05);
}

TEST_CASE("toy generator marginals are standard normal at every step") {
  const std::size_t n = 5000;
  for (const auto regime : {ToyRegime::kStationary, ToyRegime::kSwitching}) {
    const auto ds = gen_toy_ar(n, regime, 31);
    for (std::size_t j = 0; j < 3; ++j) {
      std::vector<double> col(n);
      double mean = 0;
      for (std::size_t i = 0; i < n; ++i) mean += (col[i] = ds.samples[i].y(j, 0)) / n;
      double var = 0;
      for (double v : col) var += (v - mean) * (v - mean) / (n - 1);
      CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
      CHECK(std::abs(var - 1.0) < 5.0 / std::sqrt(static_cast<double>(n)));
      // Kolmogorov-Smirnov against N(0,1) at significance 0.01
      CHECK(ks_statistic_vs_standard_normal(col) <
            1.628 / std::sqrt(static_cast<double>(n)));
    }
  }
}

TEST_CASE("stationary regime shares one copula across consecutive pairs") {
  const std::size_t n = 5000;
  const auto ds = gen_toy_ar(n, ToyRegime::kStationary, 13);
  const auto zero = std::make_shared<ZeroForecaster>(1, 3, 1);
  const auto scores = nonconformity(zero, ds);
  const auto cdfs = fit_step_cdfs(scores);
  auto pair_copula = [&](std::size_t a, std::size_t b) {
    UMatrix u;
    u.u = Mat(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
      u.u(i, 0) = cdfs[a].eval(scores.s(i, a));
      u.u(i, 1) = cdfs[b].eval(scores.s(i, b));
    }
    return EmpiricalCopula(std::move(u));
  };
  const auto c01 = pair_copula(0, 1);
  const auto c12 = pair_copula(1, 2);
  double sup = 0.0;
  for (double ua = 0.05; ua < 1.0; ua += 0.05)
    for (double ub = 0.05; ub < 1.0; ub += 0.05) {
      const std::vector<double> u{ua, ub};
      sup = std::max(sup, std::abs(c01.eval(u) - c12.eval(u)));
    }
  CHECK(sup < 2.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("switching regime makes the first two steps comonotone") {
  const auto ds = gen_toy_ar(500, ToyRegime::kSwitching, 17);
  const auto zero = std::make_shared<ZeroForecaster>(1, 3, 1);
  const auto scores = nonconformity(zero, ds);
  for (std::size_t i = 0; i < scores.n(); ++i)
    CHECK(scores.s(i, 0) == scores.s(i, 1));  // identical scores, identical ranks
  // and the (1,2) pair does not share the (0,1) copula: the rank shift moves
  // the top tail of step 1 out of step 2's top tail
  const auto cdfs = fit_step_cdfs(scores);
  std::size_t both_high = 0, step1_high = 0;
  for (std::size_t i = 0; i < scores.n(); ++i) {
    const bool hi1 = cdfs[1].eval(scores.s(i, 1)) > 0.97;
    const bool hi2 = cdfs[2].eval(scores.s(i, 2)) > 0.97;
    step1_high += hi1;
    both_high += hi1 && hi2;
  }
  CHECK(both_high < step1_high / 2);
}
