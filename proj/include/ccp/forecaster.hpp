#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <string>

#include "ccp/dataset.hpp"
#include "ccp/errors.hpp"
#include "ccp/matrix.hpp"

namespace ccp {

enum class ForecasterKind { kPersistence, kLinearAr };

inline ForecasterKind forecaster_kind_from_string(const std::string& s) {
  if (s == "persistence") return ForecasterKind::kPersistence;
  if (s == "linear_ar") return ForecasterKind::kLinearAr;
  throw InvalidParam("unknown forecaster kind '" + s + "'");
}

inline std::string to_string(ForecasterKind k) {
  return k == ForecasterKind::kPersistence ? "persistence" : "linear_ar";
}

struct ForecasterSpec {
  ForecasterKind kind = ForecasterKind::kLinearAr;
  double ridge_lambda = 1e-3;

  void validate() const {
    if (!std::isfinite(ridge_lambda) || ridge_lambda < 0.0)
      throw InvalidParam("ridge_lambda must be finite and >= 0");
  }
};

/// Point-forecaster contract: fit once, then predict is pure. The calibration
/// machinery depends only on this interface.
class Forecaster {
 public:
  virtual ~Forecaster() = default;

  Mat predict(const Mat& x) const {
    if (x.rows() != t_ || x.cols() != d_)
      throw ShapeMismatch("predict: expected " + std::to_string(t_) + "x" + std::to_string(d_) +
                          " input, got " + std::to_string(x.rows()) + "x" +
                          std::to_string(x.cols()));
    if (!x.all_finite()) throw NonFinite("predict: input contains NaN/Inf");
    return predict_impl(x);
  }

  std::size_t input_steps() const { return t_; }
  std::size_t horizon() const { return k_; }
  std::size_t dim() const { return d_; }

 protected:
  Forecaster(std::size_t t, std::size_t k, std::size_t d) : t_(t), k_(k), d_(d) {}
  virtual Mat predict_impl(const Mat& x) const = 0;

 private:
  std::size_t t_, k_, d_;
};

using ForecasterPtr = std::shared_ptr<const Forecaster>;

/// Repeats the last observed step across the whole horizon.
class PersistenceForecaster final : public Forecaster {
 public:
  PersistenceForecaster(std::size_t t, std::size_t k, std::size_t d) : Forecaster(t, k, d) {}

 protected:
  Mat predict_impl(const Mat& x) const override {
    Mat out(horizon(), dim());
    for (std::size_t j = 0; j < horizon(); ++j)
      for (std::size_t c = 0; c < dim(); ++c) out(j, c) = x(x.rows() - 1, c);
    return out;
  }
};

/// Ridge regression from the flattened input window (t*d features plus an
/// unpenalized intercept) to the flattened horizon (k*d targets). With
/// lambda -> inf the coefficients vanish and predictions collapse to the
/// per-target training mean.
class LinearForecaster final : public Forecaster {
 public:
  LinearForecaster(const Dataset& train, double lambda)
      : Forecaster(train.meta.t, train.meta.k, train.meta.d) {
    const std::size_t n = train.size();
    const std::size_t p = train.meta.t * train.meta.d;
    const std::size_t q = train.meta.k * train.meta.d;
    Eigen::MatrixXd X(n, p), Y(n, q);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = train.samples[i];
      for (std::size_t a = 0; a < p; ++a) X(i, a) = s.x.data()[a];
      for (std::size_t b = 0; b < q; ++b) Y(i, b) = s.y.data()[b];
    }
    x_mean_ = X.colwise().mean();
    y_mean_ = Y.colwise().mean();
    X.rowwise() -= x_mean_.transpose();
    Y.rowwise() -= y_mean_.transpose();

    Eigen::MatrixXd gram = X.transpose() * X;
    gram.diagonal().array() += lambda;
    if (lambda == 0.0) {
      Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
      if (!lu.isInvertible())
        throw SingularSystem("design matrix is rank deficient and ridge_lambda is 0");
      coef_ = lu.solve(X.transpose() * Y);
    } else {
      coef_ = gram.ldlt().solve(X.transpose() * Y);
    }
  }

 protected:
  Mat predict_impl(const Mat& x) const override {
    const std::size_t p = input_steps() * dim();
    Eigen::RowVectorXd feat(p);
    for (std::size_t a = 0; a < p; ++a) feat(static_cast<Eigen::Index>(a)) = x.data()[a];
    Eigen::RowVectorXd pred = (feat - x_mean_.transpose()) * coef_;
    pred += y_mean_.transpose();
    Mat out(horizon(), dim());
    for (std::size_t b = 0; b < static_cast<std::size_t>(pred.size()); ++b)
      out.data()[b] = pred(static_cast<Eigen::Index>(b));
    if (!out.all_finite()) throw NonFinite("linear forecaster produced non-finite output");
    return out;
  }

 private:
  Eigen::VectorXd x_mean_;
  Eigen::VectorXd y_mean_;
  Eigen::MatrixXd coef_;  // p x q
};

inline ForecasterPtr fit(const ForecasterSpec& spec, const Dataset& train) {
  spec.validate();
  train.validate();
  if (spec.kind == ForecasterKind::kPersistence)
    return std::make_shared<PersistenceForecaster>(train.meta.t, train.meta.k, train.meta.d);
  return std::make_shared<LinearForecaster>(train, spec.ridge_lambda);
}

}  // namespace ccp
