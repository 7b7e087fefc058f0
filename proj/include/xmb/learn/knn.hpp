#pragma once

#include <span>
#include <vector>

#include "xmb/learn/model.hpp"

namespace xmb::learn {

/// k-nearest neighbours under Euclidean distance.
///
/// Neighbours are ordered by (distance, training index). The predicted class
/// is the vote winner; among tied classes the one owning the nearest
/// neighbour wins. Scores are (votes + 1e-3 * [c == winner]) / (k + 1e-3), so
/// the argmax of a score row is always the winner.
class KnnModel final : public Model {
 public:
  static KnnModel train(int k, const Matrix& x, std::span<const int> y, int classes);
  static KnnModel load(const ArchiveReader& in, const std::string& prefix);

  std::size_t num_features() const override { return static_cast<std::size_t>(train_.cols()); }
  std::size_t num_classes() const override { return static_cast<std::size_t>(classes_); }
  Matrix scores(const Matrix& x) const override;
  void save(ArchiveWriter& out, const std::string& prefix) const override;

 private:
  int k_ = 5;
  int classes_ = 0;
  Matrix train_;
  std::vector<int> labels_;
};

}  // namespace xmb::learn
