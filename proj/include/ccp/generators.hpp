#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "ccp/dataset.hpp"
#include "ccp/errors.hpp"
#include "ccp/matrix.hpp"
#include "ccp/rng.hpp"

namespace ccp {

// Oscillator dynamics shared by every series of a generated dataset. With
// fixed damping and frequency each dimension obeys the two-term linear
// recurrence z[tau+1] = 2*exp(-damping)*cos(omega)*z[tau] - exp(-2*damping)*z[tau-1],
// so an exact linear forecaster exists for the noiseless signal.
inline constexpr double kOscillatorDamping = 0.02;
inline constexpr double kOscillatorOmega = 0.35;

// Lag-1 correlation of the stationary toy regime. Kept close to one so that
// the uncertainty of consecutive steps is strongly coupled, which is the
// setting where reusing a calibrated copula across sliding windows is sound.
inline constexpr double kToyArStationaryRho = 0.999;

// Rank-space shift between the last two steps of the switching toy regime.
inline constexpr double kToyArShift = 0.05;

/// Damped-oscillation series with additive Gaussian noise on the target
/// horizon. `rho` interpolates the noise between independent per step
/// (rho=0) and one shared draw per series (rho=1, comonotone across steps).
/// Inputs are noiseless, so the clean continuation is the oracle forecast.
inline Dataset gen_oscillator(std::size_t n, std::size_t t, std::size_t k, std::size_t d,
                              double sigma, double rho, std::uint64_t seed) {
  if (n < 1) throw InvalidParam("gen_oscillator: n must be >= 1");
  if (t < 1 || k < 1 || d < 1) throw InvalidParam("gen_oscillator: t,k,d must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw InvalidParam("gen_oscillator: sigma must be >= 0");
  if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidParam("gen_oscillator: rho must lie in [0,1]");

  Dataset ds;
  ds.meta = {t, k, d, "oscillator", seed};
  ds.samples.reserve(n);
  const double w_shared = std::sqrt(rho);
  const double w_step = std::sqrt(1.0 - rho);
  for (std::size_t i = 0; i < n; ++i) {
    detail::Rng base(seed, i, 0);   // per-series shape parameters
    detail::Rng noise(seed, i, 1);  // target noise, independent stream
    std::vector<double> amp(d), phase(d);
    for (std::size_t c = 0; c < d; ++c) {
      amp[c] = base.uniform(0.5, 1.5);
      phase[c] = base.uniform(0.0, 2.0 * M_PI);
    }
    Mat x(t, d), y(k, d);
    for (std::size_t step = 0; step < t + k; ++step) {
      const double tau = static_cast<double>(step);
      for (std::size_t c = 0; c < d; ++c) {
        const double v = amp[c] * std::exp(-kOscillatorDamping * tau) *
                         std::cos(kOscillatorOmega * tau + phase[c]);
        if (step < t)
          x(step, c) = v;
        else
          y(step - t, c) = v;
      }
    }
    std::vector<double> shared(d);
    for (std::size_t c = 0; c < d; ++c) shared[c] = noise.gaussian();
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t c = 0; c < d; ++c)
        y(j, c) += sigma * (w_shared * shared[c] + w_step * noise.gaussian());
    ds.samples.push_back({"osc_" + std::to_string(i), std::move(x), std::move(y)});
  }
  return ds;
}

enum class ToyRegime { kSwitching, kStationary };

inline ToyRegime toy_regime_from_string(const std::string& s) {
  if (s == "switching") return ToyRegime::kSwitching;
  if (s == "stationary") return ToyRegime::kStationary;
  throw InvalidParam("unknown toy_ar regime '" + s + "'");
}

namespace detail {
// CDF of |N(0,1)| and its inverse.
inline double half_normal_cdf(double s) { return std::erf(s / std::sqrt(2.0)); }
inline double half_normal_quantile(double u) { return normal_quantile(0.5 * (1.0 + u)); }
}  // namespace detail

/// Three-step toy series (t=1, k=3, d=1) with standard normal marginals at
/// every step and a controlled inter-step dependence structure.
///
/// stationary: a Gaussian AR(1) chain with lag-1 correlation
///   kToyArStationaryRho, so every consecutive pair of steps shares one
///   copula.
/// switching:  steps 0 and 1 are identical (comonotone), while the rank of
///   step 2's magnitude is the rank of step 1's magnitude shifted by
///   kToyArShift (mod 1). The (1,2) copula therefore differs from the (0,1)
///   copula by a fixed amount, which a calibration carried over from the
///   first window cannot see.
inline Dataset gen_toy_ar(std::size_t n, ToyRegime regime, std::uint64_t seed) {
  if (n < 1) throw InvalidParam("gen_toy_ar: n must be >= 1");
  Dataset ds;
  ds.meta = {1, 3, 1,
             regime == ToyRegime::kSwitching ? "toy_ar_switching" : "toy_ar_stationary", seed};
  ds.samples.reserve(n);
  const double rho = kToyArStationaryRho;
  const double rho_c = std::sqrt(1.0 - rho * rho);
  for (std::size_t i = 0; i < n; ++i) {
    detail::Rng rng(seed, i, 2);
    Mat x(1, 1), y(3, 1);
    x(0, 0) = rng.gaussian();
    if (regime == ToyRegime::kStationary) {
      y(0, 0) = rng.gaussian();
      y(1, 0) = rho * y(0, 0) + rho_c * rng.gaussian();
      y(2, 0) = rho * y(1, 0) + rho_c * rng.gaussian();
    } else {
      const double z = rng.gaussian();
      y(0, 0) = z;
      y(1, 0) = z;
      double u = detail::half_normal_cdf(std::abs(z)) + kToyArShift;
      if (u >= 1.0) u -= 1.0;
      const double mag = detail::half_normal_quantile(u);
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      y(2, 0) = sign * mag;
    }
    ds.samples.push_back({"toy_" + std::to_string(i), std::move(x), std::move(y)});
  }
  return ds;
}

}  // namespace ccp
