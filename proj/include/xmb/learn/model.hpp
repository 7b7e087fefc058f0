#pragma once

#include <memory>
#include <span>
#include <string>

#include "xmb/learn/archive.hpp"
#include "xmb/matrix.hpp"

namespace xmb::learn {

// Fitted state of one classifier. Works in label-index space: column c of
// scores() refers to the c-th entry of the owning TrainedClassifier's
// label_codes.
class Model {
 public:
  virtual ~Model() = default;
  virtual std::size_t num_features() const = 0;
  virtual std::size_t num_classes() const = 0;
  // n x num_classes; probabilities (rows sum to 1) for every kind.
  virtual Matrix scores(const Matrix& x) const = 0;
  virtual void save(ArchiveWriter& out, const std::string& prefix) const = 0;
};

// Column-wise affine scaling learned on the training matrix. Columns with
// zero spread keep scale 1.
struct Standardizer {
  RowVector mean;
  RowVector scale;

  static Standardizer fit(const Matrix& x);
  static Standardizer identity(std::size_t d);
  Matrix apply(const Matrix& x) const;
  void save(ArchiveWriter& out, const std::string& prefix) const;
  static Standardizer load(const ArchiveReader& in, const std::string& prefix);
};

Matrix softmax_rows(const Matrix& logits);

// Index of the first maximum per row.
std::vector<int> argmax_rows(const Matrix& scores);

}  // namespace xmb::learn
