#pragma once

#include "paxts/series.hpp"

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace paxts {

enum class Concurrency { ConcurrentSafe, SerializedOnly };

struct ForecastShape {
  std::size_t lookback = 0;
  std::size_t horizon = 0;
  std::size_t channels = 1;
};

/// Black-box forecaster mapping a d×b input to a d×h forecast.
///
/// predict/predict_batch validate shapes on both sides and count every
/// forecasted window. Implementations must be deterministic.
class Forecaster {
 public:
  Forecaster(std::string name, ForecastShape shape, Concurrency concurrency);
  virtual ~Forecaster() = default;

  Forecaster(const Forecaster&) = delete;
  Forecaster& operator=(const Forecaster&) = delete;

  const std::string& name() const { return name_; }
  const ForecastShape& shape() const { return shape_; }
  std::size_t lookback() const { return shape_.lookback; }
  std::size_t horizon() const { return shape_.horizon; }
  std::size_t channels() const { return shape_.channels; }
  Concurrency concurrency() const { return concurrency_; }

  Matrix predict(const Matrix& x);
  std::vector<Matrix> predict_batch(std::span<const Matrix> inputs);

  /// Number of windows forecast since construction.
  std::uint64_t call_count() const { return calls_.load(std::memory_order_relaxed); }

 protected:
  virtual std::vector<Matrix> forecast(std::span<const Matrix> inputs) = 0;

 private:
  std::string name_;
  ForecastShape shape_;
  Concurrency concurrency_;
  std::atomic<std::uint64_t> calls_{0};
};

/// Repeats the last observed value of every channel.
class NaiveForecaster final : public Forecaster {
 public:
  explicit NaiveForecaster(ForecastShape shape);

 protected:
  std::vector<Matrix> forecast(std::span<const Matrix> inputs) override;
};

/// Repeats the last full period: step n reads x_{b-k+((n-1) mod k)+1}.
class SeasonalNaiveForecaster final : public Forecaster {
 public:
  SeasonalNaiveForecaster(ForecastShape shape, std::size_t period);
  std::size_t period() const { return period_; }

 protected:
  std::vector<Matrix> forecast(std::span<const Matrix> inputs) override;

 private:
  std::size_t period_;
};

/// Per-channel direct multi-output linear autoregression with intercept.
class LinearARForecaster final : public Forecaster {
 public:
  /// coefficients[c] is (b+1)×h: lag weights in rows 0..b-1, intercept in row b.
  LinearARForecaster(ForecastShape shape, std::vector<Matrix> coefficients, double lambda,
                     bool rank_deficient = false);

  const Matrix& coefficients(std::size_t channel) const { return coefficients_.at(channel); }
  double lambda() const { return lambda_; }
  /// Set when lambda = 0 and the lag matrix was rank deficient (minimum-norm solution).
  bool rank_deficient() const { return rank_deficient_; }

 protected:
  std::vector<Matrix> forecast(std::span<const Matrix> inputs) override;

 private:
  std::vector<Matrix> coefficients_;
  double lambda_;
  bool rank_deficient_;
};

inline constexpr double kDefaultRidge = 1e-6;

/// Ridge least squares on every stride-1 training window. lambda = 0 uses the
/// minimum-norm least-squares solution.
LinearARForecaster fit_linear_ar(const Series& train, std::size_t lookback, std::size_t horizon,
                                 double lambda = kDefaultRidge);

/// Adapts a callable; used for constructed toy models.
class FunctionForecaster final : public Forecaster {
 public:
  using Fn = std::function<Matrix(const Matrix&)>;
  FunctionForecaster(std::string name, ForecastShape shape, Fn fn,
                     Concurrency concurrency = Concurrency::ConcurrentSafe);

 protected:
  std::vector<Matrix> forecast(std::span<const Matrix> inputs) override;

 private:
  Fn fn_;
};

}  // namespace paxts
