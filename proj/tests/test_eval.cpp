#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "ccp/eval.hpp"
#include "ccp/generators.hpp"
#include "ccp/rng.hpp"

using namespace ccp;

namespace {

ConfidenceRegion region_with(double radius, std::size_t k, std::size_t d) {
  ConfidenceRegion r;
  r.centers = Mat(k, d);
  r.radii.assign(k, radius);
  return r;
}

}  // namespace

TEST_CASE("coverage counts joint and per-step hits") {
  SECTION("infinite radii cover everything") {
    std::vector<ConfidenceRegion> regions(4, region_with(kInf, 2, 1));
    std::vector<Mat> truths(4, Mat(2, 1, 100.0));
    auto [joint, per_step] = coverage(regions, truths);
    CHECK(joint == 1.0);
    CHECK(per_step == std::vector<double>{1.0, 1.0});
  }

  SECTION("zero radii cover nothing") {
    std::vector<ConfidenceRegion> regions(3, region_with(0.0, 2, 1));
    std::vector<Mat> truths(3, Mat(2, 1, 0.0));  // distance 0 == radius 0: miss
    auto [joint, per_step] = coverage(regions, truths);
    CHECK(joint == 0.0);
    CHECK(per_step == std::vector<double>{0.0, 0.0});
  }

  SECTION("one miss at the second step") {
    std::vector<ConfidenceRegion> regions(3, region_with(1.0, 2, 1));
    std::vector<Mat> truths(3, Mat(2, 1, 0.5));
    truths[2](1, 0) = 3.0;  // sample 2 misses step 1
    auto [joint, per_step] = coverage(regions, truths);
    CHECK(joint == Catch::Approx(2.0 / 3.0));
    CHECK(per_step[0] == 1.0);
    CHECK(per_step[1] == Catch::Approx(2.0 / 3.0));
  }
}

TEST_CASE("ball measure closed forms") {
  CHECK(ball_measure(1.0, 2) == Catch::Approx(M_PI));
  CHECK(ball_measure(1.0, 3) == Catch::Approx(4.0 * M_PI / 3.0));
  CHECK(ball_measure(2.0, 2) == Catch::Approx(4.0 * M_PI));
  CHECK(ball_measure(1.0, 1) == Catch::Approx(2.0));
  CHECK(is_unbounded(ball_measure(kInf, 2)));
  CHECK_THROWS_AS(ball_measure(-1.0, 2), InvalidParam);
  CHECK_THROWS_AS(ball_measure(1.0, 0), InvalidParam);
}

TEST_CASE("ball measure agrees with rejection sampling") {
  detail::Rng rng(2024, 0, 0);
  for (const std::size_t d : {std::size_t{2}, std::size_t{3}}) {
    for (const double r : {0.5, 1.0, 2.0}) {
      const std::size_t trials = 200000;
      std::size_t inside = 0;
      for (std::size_t t = 0; t < trials; ++t) {
        double acc = 0;
        for (std::size_t c = 0; c < d; ++c) {
          const double x = rng.uniform(-r, r);
          acc += x * x;
        }
        inside += acc < r * r;
      }
      const double cube = std::pow(2.0 * r, static_cast<double>(d));
      const double mc = cube * static_cast<double>(inside) / static_cast<double>(trials);
      CHECK(std::abs(mc - ball_measure(r, d)) / ball_measure(r, d) < 0.02);
    }
  }
}

TEST_CASE("coverage equals a brute-force recount on pipeline output") {
  const auto ds = gen_oscillator(300, 4, 3, 2, 0.1, 0.4, 3);
  SplitSpec spec;
  const auto run = run_experiment(ds, spec, ForecasterSpec{}, 0.1,
                                  CalibrationMethod::kDichotomy);
  const auto parts = split(ds, spec);
  std::size_t joint = 0;
  for (std::size_t i = 0; i < parts.test.size(); ++i) {
    bool all = true;
    for (std::size_t j = 0; j < 3; ++j) {
      double acc = 0;
      for (std::size_t c = 0; c < 2; ++c) {
        const double diff = parts.test.samples[i].y(j, c) - run.regions[i].centers(j, c);
        acc += diff * diff;
      }
      if (!(std::sqrt(acc) < run.regions[i].radii[j])) all = false;
    }
    joint += all;
  }
  CHECK(run.report.joint_coverage ==
        Catch::Approx(static_cast<double>(joint) / static_cast<double>(parts.test.size())));
  CHECK(run.report.n_test == parts.test.size());
}

TEST_CASE("calibration sweep is monotone in the confidence level") {
  const auto ds = gen_oscillator(800, 5, 4, 2, 0.1, 0.6, 7);
  SplitSpec spec;
  const std::vector<double> alphas{0.5, 0.4, 0.3, 0.2, 0.1, 0.05};
  const auto rows = calibration_sweep(ds, spec, ForecasterSpec{},
                                      {CalibrationMethod::kDichotomy,
                                       CalibrationMethod::kBonferroni,
                                       CalibrationMethod::kL2Concat},
                                      alphas, {1, 2});
  CHECK(rows.size() == 3 * 6 * 2);
  std::map<std::pair<std::string, std::uint64_t>, std::pair<double, double>> prev;
  for (const auto& row : rows) {
    const auto key = std::make_pair(row.method, row.seed);
    const auto it = prev.find(key);
    if (it != prev.end()) {
      // alphas decrease along the sweep: coverage and measure must not drop
      CHECK(row.joint_coverage >= it->second.first - 1e-12);
      CHECK(row.mean_measure >= it->second.second - 1e-12);
    }
    prev[key] = {row.joint_coverage, row.mean_measure};
  }
}

TEST_CASE("union-bound measure dominates the copula measure at every level") {
  const auto ds = gen_oscillator(1000, 5, 6, 2, 0.1, 0.8, 5);
  SplitSpec spec;
  const std::vector<double> alphas{0.4, 0.2, 0.1};
  const auto rows = calibration_sweep(ds, spec, ForecasterSpec{},
                                      {CalibrationMethod::kDichotomy,
                                       CalibrationMethod::kBonferroni},
                                      alphas, {3});
  std::map<double, double> dich, bon;
  for (const auto& row : rows)
    (row.method == "dichotomy" ? dich : bon)[row.alpha] = row.mean_measure;
  for (const double a : alphas) {
    // allow one rank step of slack on the copula side
    const auto model = calibrate(ds, SplitSpec{0.45, 0.45, 0.10, 0.5, 3}, ForecasterSpec{}, a,
                                 CalibrationMethod::kDichotomy);
    double bumped = 0;
    const double grid = 1.0 / static_cast<double>(model.cdfs[0].n());
    for (std::size_t j = 0; j < 6; ++j) {
      const double lvl = model.cdfs[j].eval(model.thresholds.s_star[j]);
      bumped += ball_measure(model.cdfs[j].inverse(std::min(1.0, lvl + grid)), 2) -
                ball_measure(model.thresholds.s_star[j], 2);
    }
    CHECK(dich[a] <= bon[a] + bumped + 1e-9);
  }
}

TEST_CASE("horizon sweep reports growing savings for dependent noise") {
  OscillatorParams params;
  params.n = 1200;
  params.sigma = 0.1;
  params.rho = 1.0;
  SplitSpec spec;
  const auto rows = horizon_sweep(params, {1, 5}, spec, ForecasterSpec{}, 0.1, {1});
  REQUIRE(rows.size() == 4);
  std::map<std::pair<std::string, std::size_t>, double> meas;
  for (const auto& row : rows) meas[{row.method, row.k}] = row.mean_measure;
  // k=1: no correction needed, methods within one rank step of each other
  CHECK(meas[{"dichotomy", 1}] <= meas[{"bonferroni", 1}] * 1.25);
  CHECK(meas[{"dichotomy", 1}] >= meas[{"bonferroni", 1}] * 0.75);
  // savings grow with the horizon
  const double r1 = meas[{"dichotomy", 1}] / meas[{"bonferroni", 1}];
  const double r5 = meas[{"dichotomy", 5}] / meas[{"bonferroni", 5}];
  CHECK(r5 <= r1);
}

TEST_CASE("metrics csv round-trips at full precision") {
  std::vector<SweepRow> rows;
  rows.push_back({"dichotomy", 0.1, 7, 0.912345678901234567, 1.0 / 3.0, 0.0, 10, 200});
  rows.push_back({"l2concat", 0.05, 8, 1.0, kInf, 1.0, 5, 100});
  std::ostringstream out;
  write_metrics_csv(rows, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "method,alpha,seed,joint_coverage,mean_measure,unbounded_fraction,k,n_test");
  std::getline(in, line);
  std::stringstream row1(line);
  std::string field;
  std::getline(row1, field, ',');
  CHECK(field == "dichotomy");
  std::getline(row1, field, ',');
  CHECK(std::stod(field) == 0.1);
  std::getline(row1, field, ',');
  std::getline(row1, field, ',');
  CHECK(std::stod(field) == 0.912345678901234567);
  std::getline(row1, field, ',');
  CHECK(std::stod(field) == 1.0 / 3.0);
  std::getline(in, line);
  CHECK(line.find("inf") != std::string::npos);
}
