#pragma once

#include "paxts/forecasters.hpp"
#include "paxts/perturb.hpp"
#include "paxts/poi.hpp"
#include "paxts/series.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace paxts {

struct AnalysisConfig {
  std::vector<double> scales{-0.1, -0.05, -0.01, 0.01, 0.05, 0.1};
  std::size_t width = 2;
  double softness = 1.0;
  double epsilon = 1e-8;
  std::size_t seasonality = 1;
  TrendAnchor trend_anchor = TrendAnchor::LeftFixed;
  /// Cross-channel analysis perturbs t = 1, 1 + t_stride, ... (1 = every step).
  std::size_t t_stride = 1;
  /// Worker threads across windows; SerializedOnly forecasters always use one.
  std::size_t jobs = 1;

  void validate() const;
};

/// Source channel that is perturbed and target channel whose forecast is read.
struct ChannelPair {
  std::size_t source = 0;
  std::size_t target = 0;
};

/// Grid of mean change ratios, averaged over the non-degenerate windows.
struct ChangeRatioMatrix {
  Matrix values;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::size_t sample_count = 0;
  /// Windows dropped because some perturbation left them unchanged.
  std::size_t skipped_count = 0;
};

/// Entry [c, c'] aggregates |r| from perturbing channel c onto output channel c'.
struct CrossChannelMatrix {
  Matrix values;
  std::vector<std::string> channel_names;
  std::size_t sample_count = 0;
  std::size_t skipped_count = 0;
};

/// (pi(y') - pi(y)) / dist(x, x') for a single perturbation. Throws
/// DegeneratePerturbation when the perturbation does not move x.
double change_ratio(Forecaster& model, const Matrix& x, const PerturbationSpec& spec,
                    const Property& prop);

/// Sign-corrected mean of change ratios over config.scales, for each
/// property. `spec` fixes the family and its parameters; its alpha is
/// replaced by each scale. Issues |A| + 1 predictions.
std::vector<double> mean_change_ratios(Forecaster& model, const Matrix& x, const PerturbationSpec& spec,
                                       std::span<const Property> props, const AnalysisConfig& config);

double mean_change_ratio(Forecaster& model, const Matrix& x, const PerturbationSpec& spec,
                         const Property& prop, const AnalysisConfig& config);

/// Index perturbation at every t in 1..b on `source_channel`; b * |A| + 1 predictions.
Vector timestep_importance(Forecaster& model, const Matrix& x, const Property& prop,
                           const AnalysisConfig& config, std::size_t source_channel = 0);

/// Dataset-level importance: b×1 matrix averaged over windows.
ChangeRatioMatrix timestep_importance(Forecaster& model, std::span<const Window> windows,
                                      const Property& prop, const AnalysisConfig& config,
                                      std::size_t source_channel = 0);

/// b×h temporal dependency matrix: entry [t, n] is the mean change ratio of
/// output step n under an index perturbation at input step t.
ChangeRatioMatrix dependency_matrix(Forecaster& model, std::span<const Window> windows,
                                    const AnalysisConfig& config, ChannelPair pair = {});

/// Input statistics that summary_matrix can perturb.
enum class InputStatistic { Min, Max, Mean, Variance, Trend };

std::string_view to_string(InputStatistic stat);
std::vector<InputStatistic> default_input_statistics();
/// min, max, mean, variance, trend of the forecast.
std::vector<Property> default_output_properties();

/// Rows: input statistics (extrema via index perturbation at the earliest
/// argmin/argmax, moments via scaling, trend via drift adjustment).
/// Columns: output properties read on pair.target.
ChangeRatioMatrix summary_matrix(Forecaster& model, std::span<const Window> windows,
                                 std::span<const InputStatistic> inputs,
                                 std::span<const Property> outputs, const AnalysisConfig& config,
                                 ChannelPair pair = {});

/// d×d cross-channel matrix; d * |T| * |A| + 1 predictions per window.
CrossChannelMatrix cross_channel(Forecaster& model, std::span<const Window> windows,
                                 const AnalysisConfig& config,
                                 std::vector<std::string> channel_names = {});

/// Signed b×h dependency matrix for one source/target channel pair (d > 1).
ChangeRatioMatrix channel_pair_matrix(Forecaster& model, std::span<const Window> windows,
                                      std::size_t source_channel, std::size_t target_channel,
                                      const AnalysisConfig& config);

}  // namespace paxts
