#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xmb/corpus.hpp"
#include "xmb/matrix.hpp"

namespace xmb::eval {

// Rows are true label codes, columns predicted codes.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kNumLabels>, kNumLabels> counts{};

  std::size_t total() const;
  std::size_t trace() const;
  std::size_t row_sum(int c) const;
  std::size_t col_sum(int c) const;
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  bool zero_division = false;  // some ratio had a zero denominator and was set to 0
};

// Macro averages over all three classes.
struct Summary {
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::array<ClassMetrics, kNumLabels> per_class{};
  bool zero_division = false;
};

Summary summarize(const ConfusionMatrix& cm);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // +inf for the origin
};

// One-vs-rest ROC for `class_code` from column class_code of an n x 3 score
// matrix. Thresholds sweep the distinct scores in descending order; tied
// scores form one step.
std::vector<RocPoint> roc_ovr(std::span<const int> y_true, const Matrix& scores, int class_code);

// Trapezoidal area under a ROC point list.
double auc(std::span<const RocPoint> points);

struct ClassRoc {
  int label = 0;
  std::vector<RocPoint> points;
  double auc = 0.0;
};

struct MetricsReport {
  Summary summary;
  ConfusionMatrix confusion;
  std::vector<ClassRoc> roc;  // classes with both positives and negatives in y_true

  nlohmann::json to_json() const;
};

// `scores` is n x 3 with column c scoring label code c.
MetricsReport evaluate(std::span<const int> y_true, std::span<const int> y_pred, const Matrix& scores);

// confusion.csv: header "true,negative,positive,neutral", one row per true label.
std::string confusion_csv(const ConfusionMatrix& cm);
ConfusionMatrix parse_confusion_csv(std::string_view text);

// roc.csv: header "class,fpr,tpr,threshold".
std::string roc_csv(std::span<const ClassRoc> roc);
std::vector<ClassRoc> parse_roc_csv(std::string_view text);

// Shortest decimal that reads back to the same double.
std::string format_double(double v);

}  // namespace xmb::eval
