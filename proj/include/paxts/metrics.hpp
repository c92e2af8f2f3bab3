#pragma once

#include "paxts/series.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <span>
#include <string>

namespace paxts {

double mae(const Matrix& y, const Matrix& yhat);
double mse(const Matrix& y, const Matrix& yhat);

/// Percent, 200/N * sum |y - yhat| / (|y| + |yhat|); 0/0 terms contribute 0.
double smape(const Matrix& y, const Matrix& yhat);

/// In-sample seasonal-naive MAE of the training series, pooled over channels.
/// Empty when the training series is constant at lag `season`.
std::optional<double> mase_scale(const Series& train, std::size_t season = 1);

std::optional<double> mase(const Matrix& y, const Matrix& yhat, const Series& train, std::size_t season = 1);

/// Accuracy of one forecaster over a set of windows (errors pooled over
/// windows and channels). Undefined ratios are empty.
struct MetricReport {
  std::string model_name;
  double mae = 0.0;
  double mse = 0.0;
  double smape = 0.0;
  std::optional<double> mase;
  std::optional<double> owa;
  std::optional<double> e_norm;
  std::string reference_name;
  std::size_t windows = 0;
};

MetricReport evaluate(std::string model_name, std::span<const Matrix> truth, std::span<const Matrix> forecasts,
                      const Series& train, std::size_t season = 1);

/// 1/2 (sMAPE/sMAPE_ref + MASE/MASE_ref).
std::optional<double> owa(const MetricReport& model, const MetricReport& reference);

/// 1/2 (MAE/MAE_naive + MSE/MSE_naive).
std::optional<double> e_norm(const MetricReport& model, const MetricReport& naive);

/// Fills owa, e_norm and reference_name from the naive reference report.
void attach_reference(MetricReport& model, const MetricReport& naive);

nlohmann::ordered_json to_json(const MetricReport& report);

}  // namespace paxts
