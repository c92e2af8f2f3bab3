#include "paxts/cli.hpp"

#include "paxts/bridge.hpp"
#include "paxts/engine.hpp"
#include "paxts/error.hpp"
#include "paxts/metrics.hpp"
#include "paxts/patterns.hpp"
#include "paxts/report.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

namespace paxts::cli {

namespace {

using json = nlohmann::ordered_json;

struct Options {
  std::string data;
  std::vector<std::string> models;
  std::size_t lookback = 20;
  std::size_t horizon = 20;
  std::size_t stride = 1;
  std::vector<double> split{0.7, 0.1, 0.2};
  std::vector<double> scales{-0.1, -0.05, -0.01, 0.01, 0.05, 0.1};
  std::size_t width = 2;
  double softness = 1.0;
  std::size_t seasonality = 1;
  std::string trend_anchor = "left";
  std::vector<std::string> properties;
  std::optional<std::size_t> from_channel;
  std::optional<std::size_t> to_channel;
  std::string format = "json";
  std::string out;
  std::size_t jobs = 1;
  std::optional<std::size_t> window_index;
  bool aggregate = false;
  std::string perturb;
  std::size_t t_stride = 1;
  std::size_t mase_season = 1;
  long timeout_ms = 30000;
};

double parse_real(std::string_view text, std::string_view what) {
  std::string_view body = text;
  if (body.starts_with('+')) body.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (body.empty() || ec != std::errc{} || ptr != body.data() + body.size() || !std::isfinite(value)) {
    throw ArgumentError(fmt::format("bad number '{}' in {}", text, what));
  }
  return value;
}

std::size_t parse_count(std::string_view text, std::string_view what) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ArgumentError(fmt::format("bad integer '{}' in {}", text, what));
  }
  return value;
}

std::vector<std::string_view> split_on(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto at = text.find(sep, start);
    parts.push_back(text.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return parts;
}

AnalysisConfig analysis_config(const Options& o) {
  AnalysisConfig config;
  config.scales = o.scales;
  config.width = o.width;
  config.softness = o.softness;
  config.seasonality = o.seasonality;
  config.trend_anchor = parse_trend_anchor(o.trend_anchor);
  config.t_stride = o.t_stride;
  config.jobs = o.jobs;
  config.validate();
  return config;
}

json config_json(const Options& o, const AnalysisConfig& config) {
  json j;
  j["lookback"] = o.lookback;
  j["horizon"] = o.horizon;
  j["stride"] = o.stride;
  j["split"] = o.split;
  j["scales"] = config.scales;
  j["width"] = config.width;
  j["softness"] = config.softness;
  j["seasonality"] = config.seasonality;
  j["trend_anchor"] = std::string(to_string(config.trend_anchor));
  return j;
}

// Standardized splits and the test windows the analysis runs on.
struct Dataset {
  Series train;
  Series test;
  std::vector<std::string> channel_names;
  std::vector<Window> windows;
  std::optional<std::size_t> window_index;
};

Dataset load_dataset(const Options& o) {
  if (o.data.empty()) throw ArgumentError("--data is required");
  if (o.lookback < 1 || o.horizon < 1) throw ArgumentError("--lookback and --horizon must be >= 1");
  if (o.stride < 1) throw ArgumentError("--stride must be >= 1");
  const auto& ratios = o.split;
  if (ratios.size() != 3) throw ArgumentError("--split needs three ratios a,b,c");
  const SplitSpec spec{ratios[0], ratios[1], ratios[2]};

  const Series raw = load_csv(o.data);
  auto parts = split(raw, spec);
  if (!parts.test) throw DataError("test split is empty; analysis runs on the test split");
  const auto stats = ScalingStats::fit(parts.train);

  Dataset ds{standardize(parts.train, stats), standardize(*parts.test, stats), raw.channel_names(), {}, std::nullopt};
  if (ds.test.length() < o.lookback + o.horizon) {
    throw DataError(fmt::format("test split has {} steps, fewer than lookback {} + horizon {}", ds.test.length(),
                                o.lookback, o.horizon));
  }
  ds.windows = make_windows(ds.test, o.lookback, o.horizon, o.stride);
  if (o.window_index) {
    if (o.aggregate) throw ArgumentError("--window-index and --aggregate are mutually exclusive");
    if (*o.window_index >= ds.windows.size()) {
      throw ArgumentError(fmt::format("--window-index {} out of range; the test split has {} windows",
                                      *o.window_index, ds.windows.size()));
    }
    ds.windows = {ds.windows[*o.window_index]};
    ds.window_index = o.window_index;
  }
  return ds;
}

std::unique_ptr<Forecaster> make_model(const std::string& spec, const Options& o, const Dataset& ds) {
  const ForecastShape shape{o.lookback, o.horizon, ds.train.channels()};
  const std::string_view s = spec;
  if (s == "builtin:naive") return std::make_unique<NaiveForecaster>(shape);
  if (s.starts_with("builtin:seasonal-naive:")) {
    const auto k = parse_count(s.substr(23), "seasonal-naive period");
    return std::make_unique<SeasonalNaiveForecaster>(shape, k);
  }
  if (s == "builtin:linear" || s.starts_with("builtin:linear:")) {
    const double lambda = s.size() > 14 ? parse_real(s.substr(15), "linear ridge strength") : kDefaultRidge;
    const auto fitted = fit_linear_ar(ds.train, o.lookback, o.horizon, lambda);
    std::vector<Matrix> coefficients;
    for (std::size_t c = 0; c < shape.channels; ++c) coefficients.push_back(fitted.coefficients(c));
    return std::make_unique<LinearARForecaster>(shape, std::move(coefficients), lambda, fitted.rank_deficient());
  }
  if (s.starts_with("extern:")) {
    return std::make_unique<ExternalForecaster>(split_command_line(std::string(s.substr(7))), shape,
                                                std::chrono::milliseconds(o.timeout_ms));
  }
  throw ArgumentError(fmt::format(
      "unknown model '{}'; expected builtin:naive, builtin:seasonal-naive:<k>, builtin:linear[:lambda] or "
      "extern:<command>",
      spec));
}

std::string single_model(const Options& o) {
  if (o.models.empty()) throw ArgumentError("--model is required");
  if (o.models.size() > 1) throw ArgumentError("this command takes exactly one --model");
  return o.models.front();
}

ChannelPair channel_pair(const Options& o, std::size_t channels) {
  if (o.to_channel && !o.from_channel) throw ArgumentError("--to-channel requires --from-channel");
  ChannelPair pair{o.from_channel.value_or(0), o.to_channel.value_or(o.from_channel.value_or(0))};
  if (pair.source >= channels || pair.target >= channels) {
    throw ArgumentError(fmt::format("channel out of range; the dataset has {} channels", channels));
  }
  return pair;
}

void check_format(const Options& o, std::initializer_list<std::string_view> allowed) {
  for (const auto f : allowed) {
    if (o.format == f) return;
  }
  std::string list;
  for (const auto f : allowed) list += (list.empty() ? "" : ", ") + std::string(f);
  throw ArgumentError(fmt::format("--format {} not supported here; use one of: {}", o.format, list));
}

void emit(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(o.out, std::ios::binary);
  if (!file) throw DataError(fmt::format("cannot open output file {}", o.out));
  file << text;
  if (!file.flush()) throw DataError(fmt::format("cannot write output file {}", o.out));
}

void warn_skipped(std::size_t skipped, std::size_t total, std::ostream& err) {
  if (skipped == 0) return;
  json w;
  w["warning"] = "degenerate_windows_skipped";
  w["skipped"] = skipped;
  w["windows"] = total;
  err << w.dump() << '\n';
}

json header(const char* command, const std::string& model, const Options& o, const AnalysisConfig& config,
            const Dataset& ds) {
  json j;
  j["command"] = command;
  j["model"] = model;
  j["config"] = config_json(o, config);
  if (ds.window_index) {
    j["window_index"] = *ds.window_index;
  } else {
    j["window_index"] = nullptr;
  }
  return j;
}

int explain_step(const Options& o, std::ostream& out, std::ostream& err) {
  check_format(o, {"json", "csv", "svg"});
  const auto config = analysis_config(o);
  if (o.properties.size() > 1) throw ArgumentError("explain-step takes one --property");
  auto prop = parse_property(o.properties.empty() ? "mean" : o.properties.front());
  const auto ds = load_dataset(o);
  const auto pair = channel_pair(o, ds.train.channels());
  if (!prop.target_channel && ds.train.channels() > 1) prop.target_channel = pair.target;
  if (prop.kind == PropertyKind::TrendSlope) prop.seasonality = config.seasonality;
  const auto spec = single_model(o);
  auto model = make_model(spec, o, ds);

  const auto result = timestep_importance(*model, ds.windows, prop, config, pair.source);
  warn_skipped(result.skipped_count, ds.windows.size(), err);
  const Vector values = result.values.col(0);
  const auto title = fmt::format("{} time step importance, property {}", spec, to_token(prop));

  if (o.format == "csv") {
    emit(o, matrix_to_csv(result.values, result.row_labels, {to_token(prop)}), out);
  } else if (o.format == "svg") {
    emit(o, svg_stemplot(values, result.row_labels, title), out);
  } else {
    auto j = header("explain-step", spec, o, config, ds);
    j["property"] = to_token(prop);
    j["source_channel"] = pair.source;
    j["labels"] = result.row_labels;
    j["values"] = std::vector<double>(values.data(), values.data() + values.size());
    j["sample_count"] = result.sample_count;
    j["skipped_count"] = result.skipped_count;
    emit(o, dump_json(j), out);
  }
  return kOk;
}

int explain_matrix(const Options& o, std::ostream& out, std::ostream& err) {
  check_format(o, {"json", "csv", "svg"});
  const auto config = analysis_config(o);
  const auto ds = load_dataset(o);
  const auto pair = channel_pair(o, ds.train.channels());
  const auto spec = single_model(o);
  auto model = make_model(spec, o, ds);

  const auto result = dependency_matrix(*model, ds.windows, config, pair);
  warn_skipped(result.skipped_count, ds.windows.size(), err);

  if (o.format == "csv") {
    emit(o, matrix_to_csv(result.values, result.row_labels, result.col_labels), out);
  } else if (o.format == "svg") {
    emit(o,
         svg_heatmap(result.values, result.row_labels, result.col_labels,
                     fmt::format("{} dependency matrix, channel {} to {}", spec, pair.source, pair.target)),
         out);
  } else {
    auto j = header("explain-matrix", spec, o, config, ds);
    j["source_channel"] = pair.source;
    j["target_channel"] = pair.target;
    j["rows"] = result.row_labels;
    j["cols"] = result.col_labels;
    j["values"] = matrix_to_json(result.values);
    j["sample_count"] = result.sample_count;
    j["skipped_count"] = result.skipped_count;
    j["pattern"] = to_json(classify(result, config.seasonality, config.width));
    emit(o, dump_json(j), out);
  }
  return kOk;
}

int explain_summary(const Options& o, std::ostream& out, std::ostream& err) {
  check_format(o, {"json", "csv", "svg"});
  const auto config = analysis_config(o);
  const auto ds = load_dataset(o);
  const auto pair = channel_pair(o, ds.train.channels());
  std::vector<Property> outputs;
  for (const auto& token : o.properties) outputs.push_back(parse_property(token));
  if (outputs.empty()) outputs = default_output_properties();
  for (auto& p : outputs) {
    if (p.kind == PropertyKind::TrendSlope) p.seasonality = config.seasonality;
  }
  const auto spec = single_model(o);
  auto model = make_model(spec, o, ds);

  const auto inputs = default_input_statistics();
  const auto result = summary_matrix(*model, ds.windows, inputs, outputs, config, pair);
  warn_skipped(result.skipped_count, ds.windows.size(), err);

  if (o.format == "csv") {
    emit(o, matrix_to_csv(result.values, result.row_labels, result.col_labels), out);
  } else if (o.format == "svg") {
    emit(o, svg_heatmap(result.values, result.row_labels, result.col_labels, spec + " input/output statistics"),
         out);
  } else {
    auto j = header("explain-summary", spec, o, config, ds);
    j["source_channel"] = pair.source;
    j["target_channel"] = pair.target;
    j["rows"] = result.row_labels;
    j["cols"] = result.col_labels;
    j["values"] = matrix_to_json(result.values);
    j["sample_count"] = result.sample_count;
    j["skipped_count"] = result.skipped_count;
    emit(o, dump_json(j), out);
  }
  return kOk;
}

int explain_channels(const Options& o, std::ostream& out, std::ostream& err) {
  check_format(o, {"json", "csv", "svg"});
  const auto config = analysis_config(o);
  const auto ds = load_dataset(o);
  if (ds.train.channels() < 2) {
    throw ArgumentError("explain-channels needs a multivariate dataset (at least 2 channels)");
  }
  const auto spec = single_model(o);
  auto model = make_model(spec, o, ds);

  const auto result = cross_channel(*model, ds.windows, config, ds.channel_names);
  warn_skipped(result.skipped_count, ds.windows.size(), err);

  if (o.format == "csv") {
    emit(o, matrix_to_csv(result.values, result.channel_names, result.channel_names), out);
  } else if (o.format == "svg") {
    emit(o, svg_channel_graph(result.values, result.channel_names, spec + " cross-channel dependence"), out);
  } else {
    auto j = header("explain-channels", spec, o, config, ds);
    j["t_stride"] = config.t_stride;
    j["channels"] = result.channel_names;
    j["values"] = matrix_to_json(result.values);
    j["sample_count"] = result.sample_count;
    j["skipped_count"] = result.skipped_count;
    emit(o, dump_json(j), out);
  }
  return kOk;
}

std::string cell(const std::optional<double>& v) { return v ? fmt::format("{:.4f}", *v) : "n/a"; }

int bench(const Options& o, std::ostream& out, std::ostream& err) {
  check_format(o, {"json", "csv", "text"});
  if (o.models.empty()) throw ArgumentError("bench needs at least one --model");
  const auto config = analysis_config(o);
  const auto ds = load_dataset(o);
  const auto pair = channel_pair(o, ds.train.channels());

  std::vector<Matrix> truth;
  std::vector<Matrix> inputs;
  for (const auto& w : ds.windows) {
    truth.push_back(*w.y);
    inputs.push_back(w.x);
  }
  const std::string reference_name = "builtin:naive";
  NaiveForecaster naive({o.lookback, o.horizon, ds.train.channels()});
  const auto naive_report = evaluate(reference_name, truth, naive.predict_batch(inputs), ds.train, o.mase_season);

  struct Row {
    MetricReport report;
    PatternLabel label;
  };
  std::vector<Row> rows;
  for (const auto& spec : o.models) {
    auto model = make_model(spec, o, ds);
    auto report = evaluate(spec, truth, model->predict_batch(inputs), ds.train, o.mase_season);
    attach_reference(report, naive_report);
    const auto matrix = dependency_matrix(*model, ds.windows, config, pair);
    warn_skipped(matrix.skipped_count, ds.windows.size(), err);
    rows.push_back(
        {std::move(report), classify(matrix, config.seasonality, config.width)});
  }

  if (o.format == "text" || o.format == "csv") {
    const bool csv = o.format == "csv";
    std::size_t name_width = 5;
    for (const auto& r : rows) name_width = std::max(name_width, r.report.model_name.size());
    std::string text;
    if (csv) {
      text = "model,mae,mse,smape,mase,owa,e_norm,pattern\n";
    } else {
      text = fmt::format("{:<{}}  {:>10}  {:>10}  {:>10}  {:>8}  {:>8}  {:>8}  {}\n", "model", name_width, "MAE",
                         "MSE", "sMAPE", "MASE", "OWA", "e_norm", "pattern");
    }
    for (const auto& r : rows) {
      const auto& m = r.report;
      const auto label = std::string(to_string(r.label.cls));
      if (csv) {
        const auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
        text += fmt::format("{},{},{},{},{},{},{},{}\n", m.model_name, format_number(m.mae), format_number(m.mse),
                            format_number(m.smape), opt(m.mase), opt(m.owa), opt(m.e_norm), label);
      } else {
        text += fmt::format("{:<{}}  {:>10.4f}  {:>10.4f}  {:>10.4f}  {:>8}  {:>8}  {:>8}  {}\n", m.model_name,
                            name_width, m.mae, m.mse, m.smape, cell(m.mase), cell(m.owa), cell(m.e_norm), label);
      }
    }
    emit(o, text, out);
  } else {
    json j;
    j["command"] = "bench";
    j["config"] = config_json(o, config);
    j["reference"] = reference_name;
    j["mase_season"] = o.mase_season;
    j["windows"] = ds.windows.size();
    auto list = json::array();
    for (const auto& r : rows) {
      auto entry = to_json(r.report);
      entry["pattern"] = to_json(r.label);
      list.push_back(std::move(entry));
    }
    j["models"] = std::move(list);
    emit(o, dump_json(j), out);
  }
  return kOk;
}

// family:alpha or index:t:alpha; min/max perturb the extreme point of the source channel.
PerturbationSpec parse_perturb(const std::string& token, const Matrix& x, std::size_t channel,
                               const AnalysisConfig& config) {
  const auto parts = split_on(token, ':');
  const auto bad = [&]() {
    return ArgumentError(fmt::format(
        "bad --perturb token '{}'; expected min:<a>, max:<a>, mean:<a>, var:<a>, trend:<a> or index:<t>:<a>", token));
  };
  if (parts.size() < 2) throw bad();
  const auto family = parts[0];
  if (family == "index") {
    if (parts.size() != 3) throw bad();
    return PerturbationSpec::index(parse_count(parts[1], "--perturb"), parse_real(parts[2], "--perturb"),
                                   config.width, config.softness, config.epsilon, channel);
  }
  if (parts.size() != 2) throw bad();
  const double alpha = parse_real(parts[1], "--perturb");
  if (family == "min" || family == "max") {
    const auto row = x.row(static_cast<Eigen::Index>(channel));
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < row.size(); ++i) {
      if (family == "min" ? row(i) < row(best) : row(i) > row(best)) best = i;
    }
    return PerturbationSpec::index(static_cast<std::size_t>(best) + 1, alpha, config.width, config.softness,
                                   config.epsilon, channel);
  }
  if (family == "mean") return PerturbationSpec::mean(alpha, channel);
  if (family == "var" || family == "variance") return PerturbationSpec::variance(alpha, channel);
  if (family == "trend") return PerturbationSpec::trend(alpha, config.seasonality, config.trend_anchor, channel);
  throw bad();
}

int forecast(const Options& o, std::ostream& out, std::ostream&) {
  check_format(o, {"json", "csv"});
  const auto config = analysis_config(o);
  const auto ds = load_dataset(o);
  const auto pair = channel_pair(o, ds.train.channels());
  const auto spec = single_model(o);
  if (!o.perturb.empty()) parse_perturb(o.perturb, ds.windows.front().x, pair.source, config);  // validate early
  auto model = make_model(spec, o, ds);

  std::vector<Matrix> inputs;
  std::vector<PerturbedWindow> perturbed;
  for (const auto& w : ds.windows) {
    inputs.push_back(w.x);
    if (!o.perturb.empty()) {
      perturbed.push_back(apply(w.x, parse_perturb(o.perturb, w.x, pair.source, config)));
      inputs.push_back(perturbed.back().x_prime);
    }
  }
  const auto outputs = model->predict_batch(inputs);
  const std::size_t per = o.perturb.empty() ? 1 : 2;

  if (o.format == "csv") {
    std::string text = o.perturb.empty() ? "window,origin,channel,step,forecast\n"
                                         : "window,origin,channel,step,forecast,perturbed_forecast\n";
    for (std::size_t i = 0; i < ds.windows.size(); ++i) {
      const auto& y = outputs[i * per];
      for (Eigen::Index c = 0; c < y.rows(); ++c) {
        for (Eigen::Index n = 0; n < y.cols(); ++n) {
          text += fmt::format("{},{},{},{},{}", ds.window_index.value_or(i), ds.windows[i].origin, c, n + 1,
                              format_number(y(c, n)));
          if (per == 2) text += "," + format_number(outputs[i * per + 1](c, n));
          text += '\n';
        }
      }
    }
    emit(o, text, out);
    return kOk;
  }

  json j;
  j["command"] = "forecast";
  j["model"] = spec;
  j["config"] = config_json(o, config);
  j["scale"] = "standardized";
  j["perturbation"] = o.perturb.empty() ? json(nullptr) : json(o.perturb);
  auto list = json::array();
  for (std::size_t i = 0; i < ds.windows.size(); ++i) {
    json w;
    w["window_index"] = ds.window_index.value_or(i);
    w["origin"] = ds.windows[i].origin;
    w["input"] = matrix_to_json(ds.windows[i].x);
    w["forecast"] = matrix_to_json(outputs[i * per]);
    if (per == 2) {
      const auto& p = perturbed[i];
      w["perturbed_input"] = matrix_to_json(p.x_prime);
      w["perturbed_forecast"] = matrix_to_json(outputs[i * per + 1]);
      w["delta"] = p.delta;
    }
    list.push_back(std::move(w));
  }
  j["windows"] = std::move(list);
  emit(o, dump_json(j), out);
  return kOk;
}

const char* error_kind(const Error& e) {
  if (dynamic_cast<const ArgumentError*>(&e)) return "usage";
  if (dynamic_cast<const DataError*>(&e)) return "data";
  if (dynamic_cast<const ShapeError*>(&e)) return "shape";
  if (dynamic_cast<const DegeneratePerturbation*>(&e)) return "degenerate_perturbation";
  if (dynamic_cast<const NumericalError*>(&e)) return "numerical";
  if (dynamic_cast<const ProtocolError*>(&e)) return "protocol";
  return "error";
}

void report_error(std::ostream& err, std::string_view kind, std::string_view message) {
  json j;
  j["error"] = kind;
  j["message"] = message;
  err << j.dump() << '\n';
}

void add_common_options(CLI::App& app, Options& o) {
  app.add_option("--data", o.data, "CSV dataset (header row, optional leading timestamp column)");
  app.add_option("--model", o.models,
                 "builtin:naive | builtin:seasonal-naive:<k> | builtin:linear[:lambda] | extern:<command>; "
                 "repeatable for bench");
  app.add_option("--lookback", o.lookback, "input length b")->capture_default_str();
  app.add_option("--horizon", o.horizon, "forecast length h")->capture_default_str();
  app.add_option("--stride", o.stride, "window stride over the test split")->capture_default_str();
  app.add_option("--split", o.split, "train,validation,test ratios")->delimiter(',')->capture_default_str();
  app.add_option("--scales", o.scales, "comma-separated scale parameters")->delimiter(',')->capture_default_str();
  app.add_option("--width", o.width, "index perturbation half-width w")->capture_default_str();
  app.add_option("--softness", o.softness, "index perturbation softness s")->capture_default_str();
  app.add_option("--seasonality", o.seasonality, "seasonality k for trend and pattern analysis")
      ->capture_default_str();
  app.add_option("--trend-anchor", o.trend_anchor, "left | symmetric | right")->capture_default_str();
  app.add_option("--property", o.properties,
                 "property token: min, max, mean, var, trend, step:<n>, optional @<channel>");
  app.add_option("--from-channel", o.from_channel, "source channel (0-based)");
  app.add_option("--to-channel", o.to_channel, "target channel (0-based)");
  app.add_option("--format", o.format, "json | csv | svg (bench: json | csv | text)")->capture_default_str();
  app.add_option("--out", o.out, "output file (default: standard output)");
  app.add_option("--jobs", o.jobs, "worker threads across windows")->capture_default_str();
  app.add_option("--window-index", o.window_index, "analyse one test window (0-based)");
  app.add_flag("--aggregate", o.aggregate, "average over all test windows (default)");
  app.add_option("--perturb", o.perturb, "forecast: min:<a> | max:<a> | mean:<a> | var:<a> | trend:<a> | index:<t>:<a>");
  app.add_option("--t-stride", o.t_stride, "explain-channels: perturb every n-th time step")->capture_default_str();
  app.add_option("--mase-season", o.mase_season, "bench: MASE seasonal lag")->capture_default_str();
  app.add_option("--timeout-ms", o.timeout_ms, "extern models: reply timeout")->capture_default_str();
  app.set_config("--config", "", "flat key=value file mirroring the flags; flags win");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app("Perturbation-based explanations for time-series forecasters", "paxts");
  app.require_subcommand(1);
  add_common_options(app, o);

  using Command = int (*)(const Options&, std::ostream&, std::ostream&);
  const std::pair<const char*, const char*> names[] = {
      {"explain-step", "importance of every input time step for one output property"},
      {"explain-matrix", "b x h dependency matrix between input and forecast steps"},
      {"explain-summary", "input statistics against output properties"},
      {"explain-channels", "d x d cross-channel dependence"},
      {"bench", "accuracy metrics and pattern labels for one or more models"},
      {"forecast", "forecasts for the test windows, optionally with a perturbed copy"},
  };
  const Command commands[] = {explain_step, explain_matrix, explain_summary, explain_channels, bench, forecast};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : names) subs.push_back(app.add_subcommand(name, help)->fallthrough());

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("paxts");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return kUsage;
  }

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) return commands[i](o, out, err);
    }
    report_error(err, "usage", "no command given");
    return kUsage;
  } catch (const ArgumentError& e) {
    report_error(err, "usage", e.what());
    return kUsage;
  } catch (const Error& e) {
    report_error(err, error_kind(e), e.what());
    return kFailure;
  } catch (const std::exception& e) {
    report_error(err, "internal", e.what());
    return kFailure;
  }
}

}  // namespace paxts::cli
