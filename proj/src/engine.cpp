#include "paxts/engine.hpp"

#include "paxts/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <thread>

namespace paxts {

namespace {

/// r[template][alpha][property] for one input window.
class RatioTable {
 public:
  RatioTable(std::size_t templates, std::size_t alphas, std::size_t props)
      : alphas_(alphas), props_(props), data_(templates * alphas * props, 0.0) {}

  double& at(std::size_t tpl, std::size_t alpha, std::size_t prop) {
    return data_[(tpl * alphas_ + alpha) * props_ + prop];
  }
  double at(std::size_t tpl, std::size_t alpha, std::size_t prop) const {
    return data_[(tpl * alphas_ + alpha) * props_ + prop];
  }

 private:
  std::size_t alphas_;
  std::size_t props_;
  std::vector<double> data_;
};

std::string describe(const PerturbationSpec& spec) {
  std::string text(to_string(spec.family));
  if (spec.family == Family::Index) text += fmt::format(" at t={}", spec.t);
  if (spec.channel) text += fmt::format(" on channel {}", *spec.channel);
  return text;
}

// One forecast of x plus one per (template, alpha): |templates| * |A| + 1 predictions.
RatioTable compute_ratios(Forecaster& model, const Matrix& x, std::span<const PerturbationSpec> templates,
                          std::span<const Property> props, const AnalysisConfig& config) {
  const auto& scales = config.scales;
  std::vector<Matrix> inputs;
  std::vector<double> deltas;
  inputs.reserve(1 + templates.size() * scales.size());
  deltas.reserve(templates.size() * scales.size());
  inputs.push_back(x);
  for (const auto& tpl : templates) {
    for (const double alpha : scales) {
      PerturbationSpec spec = tpl;
      spec.alpha = alpha;
      auto perturbed = apply(x, spec);
      if (!(perturbed.delta > 0)) {
        throw DegeneratePerturbation(fmt::format(
            "degenerate perturbation: {} with alpha={} leaves the input unchanged (distance 0)",
            describe(spec), alpha));
      }
      inputs.push_back(std::move(perturbed.x_prime));
      deltas.push_back(perturbed.delta);
    }
  }

  const auto outputs = model.predict_batch(inputs);

  std::vector<double> base(props.size());
  for (std::size_t p = 0; p < props.size(); ++p) base[p] = eval_property(props[p], outputs.front());

  RatioTable table(templates.size(), scales.size(), props.size());
  std::size_t k = 0;
  for (std::size_t tpl = 0; tpl < templates.size(); ++tpl) {
    for (std::size_t a = 0; a < scales.size(); ++a, ++k) {
      const auto& y_prime = outputs[k + 1];
      for (std::size_t p = 0; p < props.size(); ++p) {
        table.at(tpl, a, p) = (eval_property(props[p], y_prime) - base[p]) / deltas[k];
      }
    }
  }
  return table;
}

// [template, property] sign-corrected means over the scales.
Matrix signed_means(const RatioTable& table, std::size_t templates, std::size_t props,
                    const std::vector<double>& scales) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(templates), static_cast<Eigen::Index>(props));
  for (std::size_t tpl = 0; tpl < templates; ++tpl) {
    for (std::size_t p = 0; p < props; ++p) {
      double sum = 0.0;
      for (std::size_t a = 0; a < scales.size(); ++a) {
        sum += (scales[a] > 0 ? 1.0 : -1.0) * table.at(tpl, a, p);
      }
      out(static_cast<Eigen::Index>(tpl), static_cast<Eigen::Index>(p)) =
          sum / static_cast<double>(scales.size());
    }
  }
  return out;
}

PerturbationSpec index_template(std::size_t t, std::size_t channel, const AnalysisConfig& config) {
  return PerturbationSpec::index(t, 0.0, config.width, config.softness, config.epsilon, channel);
}

void check_channel(const Forecaster& model, std::size_t channel, const char* role) {
  if (channel >= model.channels()) {
    throw ArgumentError(fmt::format("{} channel {} out of range for {} channels", role, channel, model.channels()));
  }
}

struct Aggregate {
  Matrix mean;
  std::size_t samples = 0;
  std::size_t skipped = 0;
};

// Runs per_window on every window and averages the results in window order.
// Windows with a degenerate perturbation are skipped and counted.
template <typename PerWindow>
Aggregate aggregate(const Forecaster& model, std::span<const Window> windows, const AnalysisConfig& config,
                    PerWindow per_window) {
  if (windows.empty()) throw ArgumentError("analysis needs at least one window");

  std::vector<std::optional<Matrix>> results(windows.size());
  std::vector<std::exception_ptr> errors(windows.size());
  std::vector<std::string> skip_reasons(windows.size());

  const auto run = [&](std::size_t i) {
    try {
      results[i] = per_window(windows[i]);
    } catch (const DegeneratePerturbation& e) {
      skip_reasons[i] = e.what();
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  const std::size_t jobs = model.concurrency() == Concurrency::ConcurrentSafe
                               ? std::min(config.jobs, windows.size())
                               : std::size_t{1};
  if (jobs <= 1) {
    for (std::size_t i = 0; i < windows.size(); ++i) {
      run(i);
      if (errors[i]) std::rethrow_exception(errors[i]);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    workers.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < windows.size(); i = next++) run(i);
      });
    }
    workers.clear();
    for (const auto& error : errors) {
      if (error) std::rethrow_exception(error);
    }
  }

  Aggregate agg;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (!results[i]) {
      ++agg.skipped;
      continue;
    }
    if (agg.samples == 0) {
      agg.mean = *results[i];
    } else {
      agg.mean += *results[i];
    }
    ++agg.samples;
  }
  if (agg.samples == 0) {
    throw DegeneratePerturbation(fmt::format("all {} windows were degenerate; first: {}", windows.size(),
                                             skip_reasons.front()));
  }
  agg.mean /= static_cast<double>(agg.samples);
  return agg;
}

std::vector<std::string> step_labels(const char* prefix, std::size_t count) {
  std::vector<std::string> labels;
  labels.reserve(count);
  for (std::size_t i = 1; i <= count; ++i) labels.push_back(fmt::format("{}{}", prefix, i));
  return labels;
}

}  // namespace

void AnalysisConfig::validate() const {
  if (scales.empty()) throw ArgumentError("scale set must not be empty");
  for (const double alpha : scales) {
    if (alpha == 0.0 || !std::isfinite(alpha)) {
      throw ArgumentError(fmt::format("scale parameters must be finite and nonzero, got {}", alpha));
    }
  }
  if (!(softness > 0)) throw ArgumentError("softness must be > 0");
  if (!(epsilon > 0)) throw ArgumentError("epsilon must be > 0");
  if (seasonality < 1) throw ArgumentError("seasonality must be >= 1");
  if (t_stride < 1) throw ArgumentError("t_stride must be >= 1");
  if (jobs < 1) throw ArgumentError("jobs must be >= 1");
}

double change_ratio(Forecaster& model, const Matrix& x, const PerturbationSpec& spec, const Property& prop) {
  const auto perturbed = apply(x, spec);
  if (!(perturbed.delta > 0)) {
    throw DegeneratePerturbation(fmt::format(
        "degenerate perturbation: {} with alpha={} leaves the input unchanged (distance 0)", describe(spec),
        spec.alpha));
  }
  const Matrix inputs[] = {x, perturbed.x_prime};
  const auto outputs = model.predict_batch(inputs);
  return (eval_property(prop, outputs[1]) - eval_property(prop, outputs[0])) / perturbed.delta;
}

std::vector<double> mean_change_ratios(Forecaster& model, const Matrix& x, const PerturbationSpec& spec,
                                       std::span<const Property> props, const AnalysisConfig& config) {
  config.validate();
  const PerturbationSpec templates[] = {spec};
  const auto table = compute_ratios(model, x, templates, props, config);
  const Matrix means = signed_means(table, 1, props.size(), config.scales);
  return std::vector<double>(means.data(), means.data() + means.size());
}

double mean_change_ratio(Forecaster& model, const Matrix& x, const PerturbationSpec& spec, const Property& prop,
                         const AnalysisConfig& config) {
  return mean_change_ratios(model, x, spec, std::span<const Property>(&prop, 1), config).front();
}

Vector timestep_importance(Forecaster& model, const Matrix& x, const Property& prop, const AnalysisConfig& config,
                           std::size_t source_channel) {
  config.validate();
  check_channel(model, source_channel, "source");
  const auto b = static_cast<std::size_t>(x.cols());
  std::vector<PerturbationSpec> templates;
  templates.reserve(b);
  for (std::size_t t = 1; t <= b; ++t) templates.push_back(index_template(t, source_channel, config));
  const auto table = compute_ratios(model, x, templates, std::span<const Property>(&prop, 1), config);
  return signed_means(table, b, 1, config.scales).col(0);
}

ChangeRatioMatrix timestep_importance(Forecaster& model, std::span<const Window> windows, const Property& prop,
                                      const AnalysisConfig& config, std::size_t source_channel) {
  config.validate();
  const auto agg = aggregate(model, windows, config, [&](const Window& w) -> Matrix {
    return timestep_importance(model, w.x, prop, config, source_channel);
  });
  return ChangeRatioMatrix{agg.mean, step_labels("x", model.lookback()), {display_label(prop)}, agg.samples,
                           agg.skipped};
}

ChangeRatioMatrix dependency_matrix(Forecaster& model, std::span<const Window> windows, const AnalysisConfig& config,
                                    ChannelPair pair) {
  config.validate();
  check_channel(model, pair.source, "source");
  check_channel(model, pair.target, "target");
  const std::size_t b = model.lookback();
  std::vector<PerturbationSpec> templates;
  for (std::size_t t = 1; t <= b; ++t) templates.push_back(index_template(t, pair.source, config));
  auto props = output_step_properties(model.horizon());
  for (auto& p : props) p.target_channel = pair.target;

  const auto agg = aggregate(model, windows, config, [&](const Window& w) -> Matrix {
    const auto table = compute_ratios(model, w.x, templates, props, config);
    return signed_means(table, templates.size(), props.size(), config.scales);
  });
  return ChangeRatioMatrix{agg.mean, step_labels("x", b), step_labels("y", model.horizon()), agg.samples,
                           agg.skipped};
}

std::string_view to_string(InputStatistic stat) {
  switch (stat) {
    case InputStatistic::Min: return "min";
    case InputStatistic::Max: return "max";
    case InputStatistic::Mean: return "mean";
    case InputStatistic::Variance: return "variance";
    case InputStatistic::Trend: return "trend";
  }
  return "?";
}

std::vector<InputStatistic> default_input_statistics() {
  return {InputStatistic::Min, InputStatistic::Max, InputStatistic::Mean, InputStatistic::Variance,
          InputStatistic::Trend};
}

std::vector<Property> default_output_properties() {
  return {Property::min(), Property::max(), Property::mean(), Property::variance(), Property::trend()};
}

ChangeRatioMatrix summary_matrix(Forecaster& model, std::span<const Window> windows,
                                 std::span<const InputStatistic> inputs, std::span<const Property> outputs,
                                 const AnalysisConfig& config, ChannelPair pair) {
  config.validate();
  check_channel(model, pair.source, "source");
  check_channel(model, pair.target, "target");
  if (inputs.empty() || outputs.empty()) throw ArgumentError("summary matrix needs input and output properties");
  std::vector<Property> props(outputs.begin(), outputs.end());
  for (auto& p : props) {
    if (!p.target_channel) p.target_channel = pair.target;
  }

  const auto templates_for = [&](const Matrix& x) {
    const auto row = x.row(static_cast<Eigen::Index>(pair.source));
    std::vector<PerturbationSpec> templates;
    for (const auto stat : inputs) {
      switch (stat) {
        case InputStatistic::Min:
        case InputStatistic::Max: {
          // Earliest index wins ties.
          Eigen::Index best = 0;
          for (Eigen::Index i = 1; i < row.size(); ++i) {
            if (stat == InputStatistic::Min ? row(i) < row(best) : row(i) > row(best)) best = i;
          }
          templates.push_back(index_template(static_cast<std::size_t>(best) + 1, pair.source, config));
          break;
        }
        case InputStatistic::Mean: templates.push_back(PerturbationSpec::mean(0.0, pair.source)); break;
        case InputStatistic::Variance: templates.push_back(PerturbationSpec::variance(0.0, pair.source)); break;
        case InputStatistic::Trend:
          templates.push_back(PerturbationSpec::trend(0.0, config.seasonality, config.trend_anchor, pair.source));
          break;
      }
    }
    return templates;
  };

  const auto agg = aggregate(model, windows, config, [&](const Window& w) -> Matrix {
    const auto templates = templates_for(w.x);
    const auto table = compute_ratios(model, w.x, templates, props, config);
    return signed_means(table, templates.size(), props.size(), config.scales);
  });

  ChangeRatioMatrix result{agg.mean, {}, {}, agg.samples, agg.skipped};
  for (const auto stat : inputs) result.row_labels.emplace_back(to_string(stat));
  for (const auto& p : outputs) result.col_labels.push_back(display_label(p));
  return result;
}

CrossChannelMatrix cross_channel(Forecaster& model, std::span<const Window> windows, const AnalysisConfig& config,
                                 std::vector<std::string> channel_names) {
  config.validate();
  const std::size_t d = model.channels();
  if (d < 2) throw ArgumentError("cross-channel analysis needs at least 2 channels");
  const std::size_t b = model.lookback();
  const std::size_t h = model.horizon();

  std::vector<std::size_t> steps;
  for (std::size_t t = 1; t <= b; t += config.t_stride) steps.push_back(t);

  std::vector<PerturbationSpec> templates;  // channel-major: c * |steps| + step
  for (std::size_t c = 0; c < d; ++c) {
    for (const auto t : steps) templates.push_back(index_template(t, c, config));
  }
  std::vector<Property> props;  // target-channel-major: c' * h + n
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t n = 1; n <= h; ++n) props.push_back(Property::value_at(n).on_channel(c));
  }

  const auto agg = aggregate(model, windows, config, [&](const Window& w) -> Matrix {
    const auto table = compute_ratios(model, w.x, templates, props, config);
    const std::size_t alphas = config.scales.size();
    Matrix r = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t src = 0; src < d; ++src) {
      for (std::size_t dst = 0; dst < d; ++dst) {
        double over_alpha = 0.0;
        for (std::size_t a = 0; a < alphas; ++a) {
          double over_t = 0.0;
          for (std::size_t s = 0; s < steps.size(); ++s) {
            double over_n = 0.0;
            for (std::size_t n = 0; n < h; ++n) over_n += std::abs(table.at(src * steps.size() + s, a, dst * h + n));
            over_t += over_n / static_cast<double>(h);
          }
          over_alpha += over_t / static_cast<double>(steps.size());
        }
        r(static_cast<Eigen::Index>(src), static_cast<Eigen::Index>(dst)) = over_alpha / static_cast<double>(alphas);
      }
    }
    return r;
  });

  if (channel_names.empty()) {
    for (std::size_t c = 0; c < d; ++c) channel_names.push_back(fmt::format("c{}", c));
  }
  if (channel_names.size() != d) throw ArgumentError("channel name count does not match channels");
  return CrossChannelMatrix{agg.mean, std::move(channel_names), agg.samples, agg.skipped};
}

ChangeRatioMatrix channel_pair_matrix(Forecaster& model, std::span<const Window> windows, std::size_t source_channel,
                                      std::size_t target_channel, const AnalysisConfig& config) {
  if (model.channels() < 2) throw ArgumentError("channel pair analysis needs at least 2 channels");
  return dependency_matrix(model, windows, config, ChannelPair{source_channel, target_channel});
}

}  // namespace paxts
