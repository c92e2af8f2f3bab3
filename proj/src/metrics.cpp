#include "paxts/metrics.hpp"

#include "paxts/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace paxts {

namespace {

void check_shapes(const Matrix& y, const Matrix& yhat) {
  if (y.rows() != yhat.rows() || y.cols() != yhat.cols()) {
    throw ShapeError(fmt::format("metric shape mismatch: {}x{} vs {}x{}", y.rows(), y.cols(), yhat.rows(),
                                 yhat.cols()));
  }
  if (y.size() == 0) throw ShapeError("metric of empty forecasts");
}

Matrix concat(std::span<const Matrix> parts) {
  Eigen::Index cols = 0;
  for (const auto& m : parts) cols += m.cols();
  Matrix out(parts.front().rows(), cols);
  Eigen::Index at = 0;
  for (const auto& m : parts) {
    if (m.rows() != out.rows()) throw ShapeError("forecast channel count differs between windows");
    out.middleCols(at, m.cols()) = m;
    at += m.cols();
  }
  return out;
}

}  // namespace

double mae(const Matrix& y, const Matrix& yhat) {
  check_shapes(y, yhat);
  return (y - yhat).cwiseAbs().mean();
}

double mse(const Matrix& y, const Matrix& yhat) {
  check_shapes(y, yhat);
  return (y - yhat).array().square().mean();
}

double smape(const Matrix& y, const Matrix& yhat) {
  check_shapes(y, yhat);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double denom = std::abs(y(i)) + std::abs(yhat(i));
    if (denom > 0) sum += std::abs(y(i) - yhat(i)) / denom;
  }
  return 200.0 * sum / static_cast<double>(y.size());
}

std::optional<double> mase_scale(const Series& train, std::size_t season) {
  if (season < 1) throw ArgumentError("MASE season must be >= 1");
  if (train.length() <= season) {
    throw DataError(fmt::format("MASE needs more than {} training points, got {}", season, train.length()));
  }
  const auto& v = train.values();
  const auto m = static_cast<Eigen::Index>(season);
  const auto diffs = (v.rightCols(v.cols() - m) - v.leftCols(v.cols() - m)).cwiseAbs();
  const double scale = diffs.mean();
  if (!(scale > 0)) return std::nullopt;
  return scale;
}

std::optional<double> mase(const Matrix& y, const Matrix& yhat, const Series& train, std::size_t season) {
  const auto scale = mase_scale(train, season);
  const double error = mae(y, yhat);
  if (!scale) return std::nullopt;
  return error / *scale;
}

MetricReport evaluate(std::string model_name, std::span<const Matrix> truth, std::span<const Matrix> forecasts,
                      const Series& train, std::size_t season) {
  if (truth.size() != forecasts.size()) throw ShapeError("truth and forecast window counts differ");
  if (truth.empty()) throw ArgumentError("metrics need at least one window");
  const Matrix y = concat(truth);
  const Matrix yhat = concat(forecasts);
  MetricReport report;
  report.model_name = std::move(model_name);
  report.mae = mae(y, yhat);
  report.mse = mse(y, yhat);
  report.smape = smape(y, yhat);
  report.mase = mase(y, yhat, train, season);
  report.windows = truth.size();
  return report;
}

std::optional<double> owa(const MetricReport& model, const MetricReport& reference) {
  if (!model.mase || !reference.mase) return std::nullopt;
  if (!(reference.smape > 0) || !(*reference.mase > 0)) return std::nullopt;
  return 0.5 * (model.smape / reference.smape + *model.mase / *reference.mase);
}

std::optional<double> e_norm(const MetricReport& model, const MetricReport& naive) {
  if (!(naive.mae > 0) || !(naive.mse > 0)) return std::nullopt;
  return 0.5 * (model.mae / naive.mae + model.mse / naive.mse);
}

void attach_reference(MetricReport& model, const MetricReport& naive) {
  model.owa = owa(model, naive);
  model.e_norm = e_norm(model, naive);
  model.reference_name = naive.model_name;
}

nlohmann::ordered_json to_json(const MetricReport& report) {
  const auto opt = [](const std::optional<double>& v) -> nlohmann::ordered_json {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json j;
  j["model"] = report.model_name;
  j["mae"] = report.mae;
  j["mse"] = report.mse;
  j["smape"] = report.smape;
  j["mase"] = opt(report.mase);
  j["owa"] = opt(report.owa);
  j["e_norm"] = opt(report.e_norm);
  j["reference_name"] = report.reference_name;
  j["windows"] = report.windows;
  return j;
}

}  // namespace paxts
