#include "paxts/report.hpp"

#include "paxts/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace paxts {

namespace {

void write_json(const nlohmann::ordered_json& v, std::string& out, int depth) {
  const auto indent = [&](int d) { out.append(static_cast<std::size_t>(2 * d), ' '); };
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ",\n";
        first = false;
        indent(depth + 1);
        out += nlohmann::ordered_json(key).dump();
        out += ": ";
        write_json(item, out, depth + 1);
      }
      out += '\n';
      indent(depth);
      out += '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line; matrices become one row per line.
      const bool flat = std::none_of(v.begin(), v.end(), [](const auto& e) { return e.is_structured(); });
      if (flat) {
        out += '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out += ", ";
          write_json(v[i], out, depth);
        }
        out += ']';
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        indent(depth + 1);
        write_json(v[i], out, depth + 1);
      }
      out += '\n';
      indent(depth);
      out += ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_number(d) : "null";
      return;
    }
    default:
      out += v.dump();
  }
}

// Diverging blue-white-red; v in [-1, 1].
std::string diverging(double v) {
  v = std::clamp(v, -1.0, 1.0);
  const auto mix = [](double from, double to, double f) { return static_cast<int>(std::lround(from + (to - from) * f)); };
  if (v >= 0) return fmt::format("rgb({},{},{})", mix(255, 178, v), mix(255, 24, v), mix(255, 43, v));
  return fmt::format("rgb({},{},{})", mix(255, 33, -v), mix(255, 102, -v), mix(255, 172, -v));
}

double peak_of(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const double p = m.cwiseAbs().maxCoeff();
  return std::isfinite(p) ? p : 0.0;
}

std::string svg_open(int width, int height) {
  return fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n",
      width, height);
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";  // no "-0"
  return fmt::format("{:.17g}", value);
}

std::string dump_json(const nlohmann::ordered_json& value) {
  std::string out;
  write_json(value, out, 0);
  out += '\n';
  return out;
}

nlohmann::ordered_json matrix_to_json(const Matrix& values) {
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < values.cols(); ++c) row.push_back(values(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string matrix_to_csv(const Matrix& values, const std::vector<std::string>& row_labels,
                          const std::vector<std::string>& col_labels) {
  if (row_labels.size() != static_cast<std::size_t>(values.rows()) ||
      col_labels.size() != static_cast<std::size_t>(values.cols())) {
    throw ShapeError("matrix labels do not match its shape");
  }
  std::string out = "row";
  for (const auto& c : col_labels) out += "," + c;
  out += '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    out += row_labels[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < values.cols(); ++c) out += "," + format_number(values(r, c));
    out += '\n';
  }
  return out;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (const char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string svg_heatmap(const Matrix& values, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels, const std::string& title) {
  const auto rows = static_cast<int>(values.rows());
  const auto cols = static_cast<int>(values.cols());
  if (row_labels.size() != static_cast<std::size_t>(rows) || col_labels.size() != static_cast<std::size_t>(cols)) {
    throw ShapeError("heatmap labels do not match the matrix shape");
  }
  const int cell = 22, left = 70, top = 50, legend = 90;
  const int width = left + cols * cell + legend;
  const int height = top + rows * cell + 20;
  const double peak = peak_of(values);

  std::string out = svg_open(width, height);
  out += fmt::format("<title>{}</title>\n", xml_escape(title));
  out += fmt::format("<text x=\"{}\" y=\"18\" font-size=\"14\">{}</text>\n", left, xml_escape(title));
  for (int c = 0; c < cols; ++c) {
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", left + c * cell + cell / 2,
                       top - 6, xml_escape(col_labels[static_cast<std::size_t>(c)]));
  }
  out += "<g class=\"cells\">\n";
  for (int r = 0; r < rows; ++r) {
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\" dominant-baseline=\"middle\">{}</text>\n",
                       left - 6, top + r * cell + cell / 2, xml_escape(row_labels[static_cast<std::size_t>(r)]));
    for (int c = 0; c < cols; ++c) {
      const double v = values(r, c);
      const double scaled = peak > 0 && std::isfinite(v) ? v / peak : 0.0;
      out += fmt::format(
          "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" data-row=\"{}\" data-col=\"{}\" "
          "data-value=\"{}\"><title>{} / {}: {}</title></rect>\n",
          left + c * cell, top + r * cell, cell, cell, diverging(scaled), r, c, format_number(v),
          xml_escape(row_labels[static_cast<std::size_t>(r)]), xml_escape(col_labels[static_cast<std::size_t>(c)]),
          format_number(v));
    }
  }
  out += "</g>\n";

  // legend: -peak .. +peak
  const int lx = left + cols * cell + 30;
  const int steps = 10;
  const int lh = std::max(rows * cell, 60) / (2 * steps + 1);
  for (int i = 0; i <= 2 * steps; ++i) {
    const double f = 1.0 - static_cast<double>(i) / steps;
    out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"14\" height=\"{}\" fill=\"{}\"/>\n", lx, top + i * lh,
                       lh, diverging(f));
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", lx + 18, top + 8, format_number(peak));
  out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", lx + 18, top + (2 * steps + 1) * lh,
                     format_number(-peak));
  out += "</svg>\n";
  return out;
}

std::string svg_stemplot(const Vector& values, const std::vector<std::string>& labels, const std::string& title) {
  const auto n = static_cast<int>(values.size());
  if (labels.size() != static_cast<std::size_t>(n)) throw ShapeError("stem plot labels do not match the values");
  const int step = 24, left = 60, top = 40, plot_h = 200;
  const int width = left + std::max(n, 1) * step + 20;
  const int height = top + plot_h + 40;
  const double peak = peak_of(values);
  const double zero_y = top + plot_h / 2.0;
  const auto y_of = [&](double v) { return peak > 0 && std::isfinite(v) ? zero_y - v / peak * (plot_h / 2.0) : zero_y; };

  std::string out = svg_open(width, height);
  out += fmt::format("<title>{}</title>\n", xml_escape(title));
  out += fmt::format("<text x=\"{}\" y=\"18\" font-size=\"14\">{}</text>\n", left, xml_escape(title));
  out += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"#888\"/>\n", left - 10, zero_y,
                     left + n * step, zero_y);
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", left - 14, top + 4,
                     format_number(peak));
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", left - 14, top + plot_h + 4,
                     format_number(-peak));
  out += "<g class=\"stems\">\n";
  for (int i = 0; i < n; ++i) {
    const double v = values(i);
    const double x = left + i * step + step / 2.0;
    const double y = y_of(v);
    const char* color = v >= 0 ? "#b2182b" : "#2166ac";
    out += fmt::format(
        "<g data-index=\"{}\" data-value=\"{}\"><title>{}: {}</title>"
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" stroke-width=\"2\"/>"
        "<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3.5\" fill=\"{}\"/></g>\n",
        i, format_number(v), xml_escape(labels[static_cast<std::size_t>(i)]), format_number(v), x, zero_y, x, y,
        color, x, y, color);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\" font-size=\"9\">{}</text>\n", x,
                       top + plot_h + 16, xml_escape(labels[static_cast<std::size_t>(i)]));
  }
  out += "</g>\n</svg>\n";
  return out;
}

std::string svg_channel_graph(const Matrix& values, const std::vector<std::string>& names, const std::string& title) {
  const auto d = static_cast<int>(values.rows());
  if (values.cols() != d || names.size() != static_cast<std::size_t>(d)) {
    throw ShapeError("channel graph needs a square matrix with one name per channel");
  }
  const int size = 420;
  const double cx = size / 2.0, cy = size / 2.0 + 10, radius = size / 2.0 - 70;
  const double peak = peak_of(values);
  std::vector<std::pair<double, double>> pos;
  for (int i = 0; i < d; ++i) {
    const double angle = -M_PI / 2 + 2 * M_PI * i / d;
    pos.emplace_back(cx + radius * std::cos(angle), cy + radius * std::sin(angle));
  }

  std::string out = svg_open(size, size + 20);
  out += fmt::format("<title>{}</title>\n", xml_escape(title));
  out += fmt::format("<text x=\"10\" y=\"18\" font-size=\"14\">{}</text>\n", xml_escape(title));
  out +=
      "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"5\" markerHeight=\"5\" "
      "orient=\"auto-start-reverse\"><path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"#444\"/></marker></defs>\n";
  out += "<g class=\"edges\">\n";
  for (int s = 0; s < d; ++s) {
    for (int t = 0; t < d; ++t) {
      if (s == t) continue;
      const double v = values(s, t);
      if (!(peak > 0) || !(std::abs(v) > 1e-9 * peak)) continue;
      const double f = std::abs(v) / peak;
      // Offset both directions sideways so a->b and b->a do not overlap; stop short of the node.
      const auto [x1, y1] = pos[static_cast<std::size_t>(s)];
      const auto [x2, y2] = pos[static_cast<std::size_t>(t)];
      const double dx = x2 - x1, dy = y2 - y1, len = std::hypot(dx, dy);
      const double ux = dx / len, uy = dy / len, off = 4.0;
      out += fmt::format(
          "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#444\" stroke-opacity=\"{:.3f}\" "
          "stroke-width=\"{:.3f}\" marker-end=\"url(#arrow)\" data-source=\"{}\" data-target=\"{}\" "
          "data-value=\"{}\"><title>{} -&gt; {}: {}</title></line>\n",
          x1 + ux * 20 - uy * off, y1 + uy * 20 + ux * off, x2 - ux * 22 - uy * off, y2 - uy * 22 + ux * off,
          0.25 + 0.75 * f, 0.5 + 7.5 * f, s, t, format_number(v), xml_escape(names[static_cast<std::size_t>(s)]),
          xml_escape(names[static_cast<std::size_t>(t)]), format_number(v));
    }
  }
  out += "</g>\n<g class=\"nodes\">\n";
  for (int i = 0; i < d; ++i) {
    const double self = values(i, i);
    const double f = peak > 0 && std::isfinite(self) ? std::abs(self) / peak : 0.0;
    const auto [x, y] = pos[static_cast<std::size_t>(i)];
    out += fmt::format(
        "<g data-channel=\"{}\" data-value=\"{}\"><title>{} -&gt; {}: {}</title>"
        "<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"18\" fill=\"#f7f7f7\" stroke=\"#b2182b\" stroke-width=\"{:.3f}\"/>"
        "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\" dominant-baseline=\"middle\">{}</text></g>\n",
        i, format_number(self), xml_escape(names[static_cast<std::size_t>(i)]),
        xml_escape(names[static_cast<std::size_t>(i)]), format_number(self), x, y, 1.0 + 5.0 * f, x, y,
        xml_escape(names[static_cast<std::size_t>(i)]));
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace paxts
