#pragma once

#include "paxts/engine.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace paxts {

/// "%.17g"; non-finite values print as "nan", "inf", "-inf".
std::string format_number(double value);

/// Serializes with a fixed layout: two-space indent, floats at 17 significant
/// digits, non-finite floats as null. Key order is insertion order.
std::string dump_json(const nlohmann::ordered_json& value);

nlohmann::ordered_json matrix_to_json(const Matrix& values);

/// Header "row,<col labels>", then one labelled line per row.
std::string matrix_to_csv(const Matrix& values, const std::vector<std::string>& row_labels,
                          const std::vector<std::string>& col_labels);

/// Heatmap with a diverging scale symmetric around 0 (bounds ±max|v|).
/// Every cell carries data-row, data-col, data-value and a <title>.
std::string svg_heatmap(const Matrix& values, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels, const std::string& title);

/// Stem plot of one value per label.
std::string svg_stemplot(const Vector& values, const std::vector<std::string>& labels, const std::string& title);

/// Channels on a circle; directed edges src -> dst with width proportional to
/// the off-diagonal entries. Self-dependence is drawn as the node ring width.
std::string svg_channel_graph(const Matrix& values, const std::vector<std::string>& names, const std::string& title);

std::string xml_escape(const std::string& text);

}  // namespace paxts
