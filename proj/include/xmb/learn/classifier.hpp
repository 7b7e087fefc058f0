#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "xmb/learn/model.hpp"
#include "xmb/learn/spec.hpp"

namespace xmb::learn {

/// A fitted classifier: its spec, the label codes it was fitted on (sorted
/// ascending) and the immutable per-kind state.
class TrainedClassifier {
 public:
  TrainedClassifier(ClassifierSpec spec, std::vector<int> label_codes, std::shared_ptr<const Model> model);

  const ClassifierSpec& spec() const { return spec_; }
  const std::vector<int>& label_codes() const { return label_codes_; }
  const Model& model() const { return *model_; }
  std::shared_ptr<const Model> model_ptr() const { return model_; }

  // n x |label_codes|; column c scores label_codes()[c].
  Matrix predict_scores(const Matrix& x) const;
  // argmax of predict_scores; ties go to the lowest label code.
  std::vector<int> predict(const Matrix& x) const;

  void save(const std::filesystem::path& base) const;
  static TrainedClassifier load(const std::filesystem::path& base);

 private:
  ClassifierSpec spec_;
  std::vector<int> label_codes_;
  std::shared_ptr<const Model> model_;
};

// Throws DataError for NaN features, fewer than 2 rows, mismatched lengths
// or a single distinct label; ConfigError for an invalid spec.
TrainedClassifier fit(const ClassifierSpec& spec, const Matrix& x, std::span<const int> y);

// Builds the per-kind model in label-index space with a fixed class count
// (bootstraps may miss classes).
std::shared_ptr<const Model> train_model(const ClassifierSpec& spec, const Matrix& x, std::span<const int> y_index,
                                         int classes);
// Reads the model written under `prefix`; its description lives in
// meta()["models"][prefix] with at least a "kind" entry.
std::shared_ptr<const Model> load_model(const ArchiveReader& in, const std::string& prefix);

}  // namespace xmb::learn
