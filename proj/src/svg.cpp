#include "xmb/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "xmb/corpus.hpp"
#include "xmb/error.hpp"

namespace xmb::svg {

namespace {

std::string num(double v) { return eval::format_double(v); }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string header(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text(double x, double y, std::string_view s, std::string_view extra = "") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\"" + (extra.empty() ? "" : " " + std::string(extra)) + ">" +
         escape(s) + "</text>\n";
}

std::string title_text(double w, std::string_view title) {
  return text(w / 2.0, 22.0, title, "text-anchor=\"middle\" font-size=\"15\"");
}

std::string line(double x1, double y1, double x2, double y2, std::string_view attrs) {
  return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) + "\" " +
         std::string(attrs) + "/>\n";
}

std::string display(int code) {
  std::string s(label_name(label_from_code(code)));
  s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

// Axis ticks for a linear range.
std::string axes(const Frame& f, double x0, double x1, double y0, double y1, std::string_view xlabel,
                 std::string_view ylabel) {
  std::string out = "<rect x=\"" + num(f.left) + "\" y=\"" + num(f.top) + "\" width=\"" + num(f.width) +
                    "\" height=\"" + num(f.height) + "\" fill=\"none\" stroke=\"black\"/>\n";
  const int xd = x1 - x0 > 10.0 ? 0 : 2, yd = y1 - y0 > 10.0 ? 0 : 2;
  for (int i = 0; i <= 5; ++i) {
    const double u = i / 5.0;
    out += text(f.x(u), f.top + f.height + 16.0, fixed(x0 + u * (x1 - x0), xd), "text-anchor=\"middle\"");
    out += text(f.left - 6.0, f.y(u) + 4.0, fixed(y0 + u * (y1 - y0), yd), "text-anchor=\"end\"");
  }
  out += text(f.x(0.5), f.top + f.height + 34.0, xlabel, "text-anchor=\"middle\"");
  out += "<text transform=\"translate(" + num(f.left - 44.0) + "," + num(f.y(0.5)) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(ylabel) + "</text>\n";
  return out;
}

}  // namespace

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string class_color(int code) {
  switch (code) {
    case 0: return "#d62728";
    case 1: return "#2ca02c";
    case 2: return "#1f77b4";
    default: return "#7f7f7f";
  }
}

std::string confusion_heatmap(const eval::ConfusionMatrix& cm, std::string_view title) {
  const double cell = 110.0, left = 110.0, top = 60.0;
  const double w = left + 3 * cell + 30.0, h = top + 3 * cell + 60.0;
  std::size_t peak = 1;
  for (const auto& row : cm.counts)
    for (auto v : row) peak = std::max(peak, v);
  std::string out = header(w, h) + title_text(w, title);
  for (int r = 0; r < kNumLabels; ++r) {
    out += text(left - 8.0, top + (r + 0.5) * cell + 4.0, display(r), "text-anchor=\"end\"");
    out += text(left + (r + 0.5) * cell, top + 3 * cell + 20.0, display(r), "text-anchor=\"middle\"");
    for (int c = 0; c < kNumLabels; ++c) {
      const auto v = cm.counts[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      const double shade = static_cast<double>(v) / static_cast<double>(peak);
      const int level = static_cast<int>(std::lround(255.0 * (1.0 - 0.8 * shade)));
      char fill[16];
      std::snprintf(fill, sizeof fill, "#%02x%02xff", level, level);
      out += "<rect x=\"" + num(left + c * cell) + "\" y=\"" + num(top + r * cell) + "\" width=\"" + num(cell) +
             "\" height=\"" + num(cell) + "\" fill=\"" + fill + "\" stroke=\"white\"/>\n";
      out += text(left + (c + 0.5) * cell, top + (r + 0.5) * cell + 5.0, std::to_string(v),
                  "class=\"count\" data-row=\"" + std::to_string(r) + "\" data-col=\"" + std::to_string(c) +
                      "\" text-anchor=\"middle\" font-size=\"16\" fill=\"" + (shade > 0.6 ? "white" : "black") +
                      "\"");
    }
  }
  out += text(left + 1.5 * cell, h - 12.0, "Predicted", "text-anchor=\"middle\"");
  out += "<text transform=\"translate(20," + num(top + 1.5 * cell) + ") rotate(-90)\" text-anchor=\"middle\">True</text>\n";
  return out + "</svg>\n";
}

std::string roc_chart(std::span<const eval::ClassRoc> curves, std::string_view title) {
  if (curves.empty()) throw DataError("roc chart: no curves");
  const Frame f = kRocFrame;
  const double w = f.left + f.width + 170.0, h = f.top + f.height + 50.0;
  std::string out = header(w, h) + title_text(w, title) +
                    axes(f, 0.0, 1.0, 0.0, 1.0, "False positive rate", "True positive rate");
  out += line(f.x(0), f.y(0), f.x(1), f.y(1), "stroke=\"#999999\" stroke-dasharray=\"4 4\"");
  double legend_y = f.top + 10.0;
  for (const auto& c : curves) {
    if (c.points.empty()) throw DataError("roc chart: empty point list for class " + display(c.label));
    std::string pts;
    for (const auto& p : c.points) {
      if (!pts.empty()) pts += ' ';
      pts += num(f.x(p.fpr)) + "," + num(f.y(p.tpr));
    }
    out += "<polyline class=\"roc\" data-class=\"" + std::string(label_name(label_from_code(c.label))) +
           "\" fill=\"none\" stroke=\"" + class_color(c.label) + "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    const double a = eval::auc(c.points);
    out += line(f.left + f.width + 14.0, legend_y, f.left + f.width + 34.0, legend_y,
                "stroke=\"" + class_color(c.label) + "\" stroke-width=\"2\"");
    out += text(f.left + f.width + 40.0, legend_y + 4.0, display(c.label) + " (AUC = " + fixed(a, 2) + ")",
                "class=\"legend\"");
    legend_y += 20.0;
  }
  return out + "</svg>\n";
}

std::string scatter(const Matrix& coords, std::span<const int> labels, std::string_view title) {
  if (coords.cols() != 2) throw DataError("scatter: coordinates must have 2 columns");
  if (static_cast<std::size_t>(coords.rows()) != labels.size()) throw DataError("scatter: labels and points differ");
  if (coords.rows() == 0) throw DataError("scatter: no points");
  const Frame f;
  const double w = f.left + f.width + 130.0, h = f.top + f.height + 50.0;
  const double x0 = coords.col(0).minCoeff(), x1 = coords.col(0).maxCoeff();
  const double y0 = coords.col(1).minCoeff(), y1 = coords.col(1).maxCoeff();
  const double sx = x1 > x0 ? x1 - x0 : 1.0, sy = y1 > y0 ? y1 - y0 : 1.0;
  std::string out = header(w, h) + title_text(w, title) + axes(f, x0, x0 + sx, y0, y0 + sy, "dim 1", "dim 2");
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    out += "<circle cx=\"" + num(f.x((coords(i, 0) - x0) / sx)) + "\" cy=\"" + num(f.y((coords(i, 1) - y0) / sy)) +
           "\" r=\"3\" fill=\"" + class_color(l) + "\" fill-opacity=\"0.7\" data-label=\"" + std::to_string(l) +
           "\"/>\n";
  }
  for (int c = 0; c < kNumLabels; ++c) {
    const double y = f.top + 10.0 + 20.0 * c;
    out += "<circle cx=\"" + num(f.left + f.width + 20.0) + "\" cy=\"" + num(y) + "\" r=\"4\" fill=\"" +
           class_color(c) + "\"/>\n";
    out += text(f.left + f.width + 30.0, y + 4.0, display(c));
  }
  return out + "</svg>\n";
}

std::string bar_chart(const std::vector<std::string>& names, const std::vector<double>& values,
                      std::string_view title) {
  if (names.size() != values.size() || names.empty()) throw DataError("bar chart: names and values must match");
  const Frame f;
  const double w = f.left + f.width + 30.0, h = f.top + f.height + 50.0;
  const double peak = std::max(1.0, *std::max_element(values.begin(), values.end()));
  std::string out = header(w, h) + title_text(w, title) +
                    "<rect x=\"" + num(f.left) + "\" y=\"" + num(f.top) + "\" width=\"" + num(f.width) +
                    "\" height=\"" + num(f.height) + "\" fill=\"none\" stroke=\"black\"/>\n";
  const double slot = f.width / static_cast<double>(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double v = values[i] / peak;
    const double x = f.left + slot * (static_cast<double>(i) + 0.15);
    out += "<rect class=\"bar\" x=\"" + num(x) + "\" y=\"" + num(f.y(v)) + "\" width=\"" + num(slot * 0.7) +
           "\" height=\"" + num(v * f.height) + "\" fill=\"" + class_color(static_cast<int>(i)) + "\"/>\n";
    out += text(x + slot * 0.35, f.y(v) - 5.0, eval::format_double(values[i]), "text-anchor=\"middle\"");
    out += text(x + slot * 0.35, f.top + f.height + 16.0, names[i], "text-anchor=\"middle\"");
  }
  return out + "</svg>\n";
}

std::string histogram(const std::vector<std::size_t>& counts, std::size_t bin_width, std::string_view title) {
  if (counts.empty()) throw DataError("histogram: no bins");
  const Frame f;
  const double w = f.left + f.width + 30.0, h = f.top + f.height + 50.0;
  const double peak = static_cast<double>(std::max<std::size_t>(1, *std::max_element(counts.begin(), counts.end())));
  const double upper = static_cast<double>(counts.size() * bin_width);
  std::string out = header(w, h) + title_text(w, title) +
                    axes(f, 0.0, upper, 0.0, peak, "Text length (characters)", "Comments");
  const double slot = f.width / static_cast<double>(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double v = static_cast<double>(counts[i]) / peak;
    out += "<rect class=\"bin\" x=\"" + num(f.left + slot * static_cast<double>(i)) + "\" y=\"" + num(f.y(v)) +
           "\" width=\"" + num(slot) + "\" height=\"" + num(v * f.height) +
           "\" fill=\"#1f77b4\" stroke=\"white\" data-count=\"" + std::to_string(counts[i]) + "\"/>\n";
  }
  return out + "</svg>\n";
}

}  // namespace xmb::svg
