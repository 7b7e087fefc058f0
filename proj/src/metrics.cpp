#include "xmb/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "xmb/error.hpp"
#include "xmb/text/csv.hpp"

namespace xmb::eval {

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& row : counts) t += std::accumulate(row.begin(), row.end(), std::size_t{0});
  return t;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (int c = 0; c < kNumLabels; ++c) t += counts[c][c];
  return t;
}

std::size_t ConfusionMatrix::row_sum(int c) const {
  const auto& row = counts[static_cast<std::size_t>(c)];
  return std::accumulate(row.begin(), row.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::col_sum(int c) const {
  std::size_t t = 0;
  for (const auto& row : counts) t += row[static_cast<std::size_t>(c)];
  return t;
}

namespace {

void check_code(int v, const char* what) {
  if (v < 0 || v >= kNumLabels) throw DataError(std::string(what) + " contains label code " + std::to_string(v));
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size())
    throw DataError("confusion: " + std::to_string(y_true.size()) + " true labels but " +
                    std::to_string(y_pred.size()) + " predictions");
  if (y_true.empty()) throw DataError("confusion: no labels");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    check_code(y_true[i], "y_true");
    check_code(y_pred[i], "y_pred");
    ++cm.counts[static_cast<std::size_t>(y_true[i])][static_cast<std::size_t>(y_pred[i])];
  }
  return cm;
}

Summary summarize(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw DataError("summarize: empty confusion matrix");
  Summary s;
  s.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  for (int c = 0; c < kNumLabels; ++c) {
    auto& m = s.per_class[static_cast<std::size_t>(c)];
    const double tp = static_cast<double>(cm.counts[c][c]);
    const std::size_t predicted = cm.col_sum(c);
    m.support = cm.row_sum(c);
    if (predicted > 0) m.precision = tp / static_cast<double>(predicted);
    else m.zero_division = true;
    if (m.support > 0) m.recall = tp / static_cast<double>(m.support);
    else m.zero_division = true;
    // Harmonic mean of precision and recall, written as 2tp / (2tp + fp + fn).
    const std::size_t f1_denominator = 2 * cm.counts[c][c] + (predicted - cm.counts[c][c]) + (m.support - cm.counts[c][c]);
    if (cm.counts[c][c] > 0) m.f1 = 2.0 * tp / static_cast<double>(f1_denominator);
    s.macro_precision += m.precision;
    s.macro_recall += m.recall;
    s.macro_f1 += m.f1;
    s.zero_division = s.zero_division || m.zero_division;
  }
  s.macro_precision /= kNumLabels;
  s.macro_recall /= kNumLabels;
  s.macro_f1 /= kNumLabels;
  return s;
}

std::vector<RocPoint> roc_ovr(std::span<const int> y_true, const Matrix& scores, int class_code) {
  check_code(class_code, "roc class");
  if (scores.cols() != kNumLabels) throw DataError("roc: score matrix must have 3 columns");
  if (static_cast<std::size_t>(scores.rows()) != y_true.size()) throw DataError("roc: score rows and labels differ");
  std::size_t positives = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (!std::isfinite(scores(static_cast<Eigen::Index>(i), class_code)))
      throw DataError("roc: non-finite score at row " + std::to_string(i));
    if (y_true[i] == class_code) ++positives;
  }
  const std::size_t negatives = y_true.size() - positives;
  if (positives == 0)
    throw DataError("roc: class " + std::string(label_name(label_from_code(class_code))) + " absent from y_true");
  if (negatives == 0)
    throw DataError("roc: class " + std::string(label_name(label_from_code(class_code))) + " has no negatives");

  std::vector<std::size_t> order(y_true.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto score = [&](std::size_t i) { return scores(static_cast<Eigen::Index>(i), class_code); };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score(a) > score(b); });

  std::vector<RocPoint> points = {{0.0, 0.0, std::numeric_limits<double>::infinity()}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double t = score(order[i]);
    for (; i < order.size() && score(order[i]) == t; ++i) (y_true[order[i]] == class_code ? tp : fp) += 1;
    points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                      static_cast<double>(tp) / static_cast<double>(positives), t});
  }
  return points;
}

double auc(std::span<const RocPoint> points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
  return area;
}

MetricsReport evaluate(std::span<const int> y_true, std::span<const int> y_pred, const Matrix& scores) {
  MetricsReport r;
  r.confusion = confusion(y_true, y_pred);
  r.summary = summarize(r.confusion);
  for (int c = 0; c < kNumLabels; ++c) {
    if (r.confusion.row_sum(c) == 0 || r.confusion.row_sum(c) == r.confusion.total()) continue;
    ClassRoc roc;
    roc.label = c;
    roc.points = roc_ovr(y_true, scores, c);
    roc.auc = auc(roc.points);
    r.roc.push_back(std::move(roc));
  }
  return r;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j;
  j["accuracy"] = summary.accuracy;
  j["macro_precision"] = summary.macro_precision;
  j["macro_recall"] = summary.macro_recall;
  j["macro_f1"] = summary.macro_f1;
  j["averaging"] = "macro";
  j["zero_division"] = summary.zero_division;
  j["per_class"] = nlohmann::json::array();
  for (int c = 0; c < kNumLabels; ++c) {
    const auto& m = summary.per_class[static_cast<std::size_t>(c)];
    j["per_class"].push_back({{"label", label_name(label_from_code(c))},
                              {"precision", m.precision},
                              {"recall", m.recall},
                              {"f1", m.f1},
                              {"support", m.support},
                              {"zero_division", m.zero_division}});
  }
  j["confusion"] = confusion.counts;
  j["auc"] = nlohmann::json::object();
  for (const auto& roc : this->roc) j["auc"][std::string(label_name(label_from_code(roc.label)))] = roc.auc;
  return j;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::string out = "true,negative,positive,neutral\n";
  for (int c = 0; c < kNumLabels; ++c) {
    out += label_name(label_from_code(c));
    for (auto v : cm.counts[static_cast<std::size_t>(c)]) out += "," + std::to_string(v);
    out += "\n";
  }
  return out;
}

namespace {

double read_double(const std::string& s, std::size_t line) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw DataError("line " + std::to_string(line) + ": malformed number '" + s + "'");
  return v;
}

int read_label(const std::string& s, std::size_t line) {
  auto l = parse_label(s);
  if (!l) throw DataError("line " + std::to_string(line) + ": unknown label '" + s + "'");
  return code(*l);
}

}  // namespace

ConfusionMatrix parse_confusion_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.size() != kNumLabels + 1) throw DataError("confusion csv: expected a header and 3 rows");
  ConfusionMatrix cm;
  std::array<bool, kNumLabels> seen{};
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != kNumLabels + 1) throw DataError("line " + std::to_string(row.line) + ": expected 4 fields");
    const int c = read_label(row.fields[0], row.line);
    if (seen[static_cast<std::size_t>(c)]) throw DataError("line " + std::to_string(row.line) + ": repeated row");
    seen[static_cast<std::size_t>(c)] = true;
    for (int k = 0; k < kNumLabels; ++k) {
      const double v = read_double(row.fields[static_cast<std::size_t>(k) + 1], row.line);
      if (v < 0 || v != std::floor(v)) throw DataError("line " + std::to_string(row.line) + ": count must be a non-negative integer");
      cm.counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] = static_cast<std::size_t>(v);
    }
  }
  return cm;
}

std::string roc_csv(std::span<const ClassRoc> roc) {
  std::string out = "class,fpr,tpr,threshold\n";
  for (const auto& r : roc)
    for (const auto& p : r.points)
      out += std::string(label_name(label_from_code(r.label))) + "," + format_double(p.fpr) + "," +
             format_double(p.tpr) + "," + format_double(p.threshold) + "\n";
  return out;
}

std::vector<ClassRoc> parse_roc_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty() || rows[0].fields != std::vector<std::string>{"class", "fpr", "tpr", "threshold"})
    throw DataError("roc csv: missing header class,fpr,tpr,threshold");
  std::vector<ClassRoc> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != 4) throw DataError("line " + std::to_string(row.line) + ": expected 4 fields");
    const int c = read_label(row.fields[0], row.line);
    if (out.empty() || out.back().label != c) {
      out.push_back({});
      out.back().label = c;
    }
    out.back().points.push_back(
        {read_double(row.fields[1], row.line), read_double(row.fields[2], row.line), read_double(row.fields[3], row.line)});
  }
  for (auto& r : out) r.auc = auc(r.points);
  return out;
}

}  // namespace xmb::eval
