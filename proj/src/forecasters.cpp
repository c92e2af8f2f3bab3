#include "paxts/forecasters.hpp"

#include "paxts/error.hpp"

#include <fmt/format.h>

namespace paxts {

Forecaster::Forecaster(std::string name, ForecastShape shape, Concurrency concurrency)
    : name_(std::move(name)), shape_(shape), concurrency_(concurrency) {
  if (shape_.lookback < 1 || shape_.horizon < 1 || shape_.channels < 1) {
    throw ArgumentError(fmt::format("forecaster '{}' needs positive lookback, horizon and channels", name_));
  }
}

Matrix Forecaster::predict(const Matrix& x) {
  auto out = predict_batch(std::span<const Matrix>(&x, 1));
  return std::move(out.front());
}

std::vector<Matrix> Forecaster::predict_batch(std::span<const Matrix> inputs) {
  const auto d = static_cast<Eigen::Index>(shape_.channels);
  const auto b = static_cast<Eigen::Index>(shape_.lookback);
  const auto h = static_cast<Eigen::Index>(shape_.horizon);
  for (const auto& x : inputs) {
    if (x.rows() != d || x.cols() != b) {
      throw ShapeError(fmt::format("{}: expected input {}x{}, got {}x{}", name_, d, b, x.rows(), x.cols()));
    }
    if (!x.allFinite()) throw DataError(fmt::format("{}: input window has non-finite entries", name_));
  }
  calls_.fetch_add(inputs.size(), std::memory_order_relaxed);
  auto outputs = forecast(inputs);
  if (outputs.size() != inputs.size()) {
    throw ShapeError(fmt::format("{}: {} inputs produced {} forecasts", name_, inputs.size(), outputs.size()));
  }
  for (const auto& y : outputs) {
    if (y.rows() != d || y.cols() != h) {
      throw ShapeError(fmt::format("{}: expected forecast {}x{}, got {}x{}", name_, d, h, y.rows(), y.cols()));
    }
    if (!y.allFinite()) throw NumericalError(fmt::format("{}: forecast has non-finite entries", name_));
  }
  return outputs;
}

NaiveForecaster::NaiveForecaster(ForecastShape shape)
    : Forecaster("naive", shape, Concurrency::ConcurrentSafe) {}

std::vector<Matrix> NaiveForecaster::forecast(std::span<const Matrix> inputs) {
  std::vector<Matrix> out;
  out.reserve(inputs.size());
  const auto h = static_cast<Eigen::Index>(horizon());
  for (const auto& x : inputs) out.push_back(x.col(x.cols() - 1).replicate(1, h));
  return out;
}

SeasonalNaiveForecaster::SeasonalNaiveForecaster(ForecastShape shape, std::size_t period)
    : Forecaster(fmt::format("seasonal-naive:{}", period), shape, Concurrency::ConcurrentSafe),
      period_(period) {
  if (period_ < 1 || period_ > shape.lookback) {
    throw ArgumentError(fmt::format("seasonal period {} outside 1..{}", period_, shape.lookback));
  }
}

std::vector<Matrix> SeasonalNaiveForecaster::forecast(std::span<const Matrix> inputs) {
  std::vector<Matrix> out;
  out.reserve(inputs.size());
  const auto b = lookback();
  const auto h = static_cast<Eigen::Index>(horizon());
  for (const auto& x : inputs) {
    Matrix y(x.rows(), h);
    for (Eigen::Index n = 0; n < h; ++n) {
      const auto src = b - period_ + static_cast<std::size_t>(n) % period_;
      y.col(n) = x.col(static_cast<Eigen::Index>(src));
    }
    out.push_back(std::move(y));
  }
  return out;
}

LinearARForecaster::LinearARForecaster(ForecastShape shape, std::vector<Matrix> coefficients,
                                       double lambda, bool rank_deficient)
    : Forecaster(fmt::format("linear:{}", lambda), shape, Concurrency::ConcurrentSafe),
      coefficients_(std::move(coefficients)),
      lambda_(lambda),
      rank_deficient_(rank_deficient) {
  if (coefficients_.size() != shape.channels) {
    throw ArgumentError("linear AR needs one coefficient matrix per channel");
  }
  for (const auto& w : coefficients_) {
    if (w.rows() != static_cast<Eigen::Index>(shape.lookback + 1) ||
        w.cols() != static_cast<Eigen::Index>(shape.horizon)) {
      throw ShapeError("linear AR coefficient matrix must be (b+1)xh");
    }
    if (!w.allFinite()) throw NumericalError("linear AR coefficients are not finite");
  }
}

std::vector<Matrix> LinearARForecaster::forecast(std::span<const Matrix> inputs) {
  std::vector<Matrix> out;
  out.reserve(inputs.size());
  const auto b = static_cast<Eigen::Index>(lookback());
  for (const auto& x : inputs) {
    Matrix y(x.rows(), static_cast<Eigen::Index>(horizon()));
    for (Eigen::Index c = 0; c < x.rows(); ++c) {
      const auto& w = coefficients_[static_cast<std::size_t>(c)];
      y.row(c) = x.row(c) * w.topRows(b) + w.row(b);
    }
    out.push_back(std::move(y));
  }
  return out;
}

LinearARForecaster fit_linear_ar(const Series& train, std::size_t lookback, std::size_t horizon,
                                 double lambda) {
  if (!(lambda >= 0)) throw ArgumentError(fmt::format("ridge strength must be >= 0, got {}", lambda));
  if (lookback < 1 || horizon < 1) throw ArgumentError("lookback and horizon must be positive");
  if (train.length() < lookback + horizon) {
    throw DataError(fmt::format("training series of length {} is too short for lookback {} + horizon {}",
                                train.length(), lookback, horizon));
  }
  const auto b = static_cast<Eigen::Index>(lookback);
  const auto h = static_cast<Eigen::Index>(horizon);
  const auto rows = static_cast<Eigen::Index>(train.length() - lookback - horizon + 1);
  const auto& v = train.values();

  std::vector<Matrix> coefficients;
  bool rank_deficient = false;
  for (Eigen::Index c = 0; c < v.rows(); ++c) {
    Matrix design(rows, b + 1);
    Matrix target(rows, h);
    for (Eigen::Index r = 0; r < rows; ++r) {
      design.row(r).head(b) = v.row(c).segment(r, b);
      design(r, b) = 1.0;
      target.row(r) = v.row(c).segment(r + b, h);
    }

    Matrix gram = design.transpose() * design;
    const Matrix rhs = design.transpose() * target;
    Matrix weights;
    if (lambda > 0) {
      // Intercept is not penalized.
      gram.diagonal().head(b).array() += lambda;
      Eigen::LDLT<Matrix> ldlt(gram);
      if (ldlt.info() != Eigen::Success) {
        throw NumericalError(fmt::format("linear AR: factorization failed on channel {}", c));
      }
      weights = ldlt.solve(rhs);
    } else {
      Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
      if (cod.rank() < b + 1) rank_deficient = true;
      weights = cod.solve(target);
    }
    const double scale = std::max(rhs.norm(), 1e-300);
    const double residual = (gram * weights - rhs).norm() / scale;
    if (!weights.allFinite() || residual > 1e-8) {
      throw NumericalError(fmt::format(
          "linear AR: singular normal equations on channel {} (relative residual {:.3g}); raise lambda",
          c, residual));
    }
    coefficients.push_back(std::move(weights));
  }
  return LinearARForecaster(ForecastShape{lookback, horizon, train.channels()}, std::move(coefficients),
                            lambda, rank_deficient);
}

FunctionForecaster::FunctionForecaster(std::string name, ForecastShape shape, Fn fn,
                                       Concurrency concurrency)
    : Forecaster(std::move(name), shape, concurrency), fn_(std::move(fn)) {}

std::vector<Matrix> FunctionForecaster::forecast(std::span<const Matrix> inputs) {
  std::vector<Matrix> out;
  out.reserve(inputs.size());
  for (const auto& x : inputs) out.push_back(fn_(x));
  return out;
}

}  // namespace paxts
