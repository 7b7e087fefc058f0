#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xmb/matrix.hpp"
#include "xmb/metrics.hpp"

namespace xmb::svg {

// Plot area of a chart. Data point (u, v) in [0,1]^2 lands at
// (left + u * width, top + (1 - v) * height).
struct Frame {
  double left = 70.0;
  double top = 40.0;
  double width = 360.0;
  double height = 360.0;

  double x(double u) const { return left + u * width; }
  double y(double v) const { return top + (1.0 - v) * height; }
};

inline constexpr Frame kRocFrame{};

std::string escape(std::string_view text);
std::string class_color(int code);

// Each cell carries <text class="count" data-row=r data-col=c>.
std::string confusion_heatmap(const eval::ConfusionMatrix& cm, std::string_view title);

// One <polyline class="roc" data-class=...> per class in kRocFrame. Throws
// DataError when there is no curve or a curve has no points.
std::string roc_chart(std::span<const eval::ClassRoc> curves, std::string_view title);

std::string scatter(const Matrix& coords, std::span<const int> labels, std::string_view title);
std::string bar_chart(const std::vector<std::string>& names, const std::vector<double>& values,
                      std::string_view title);
std::string histogram(const std::vector<std::size_t>& counts, std::size_t bin_width, std::string_view title);

}  // namespace xmb::svg
