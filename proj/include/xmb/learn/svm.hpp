#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "xmb/learn/model.hpp"

namespace xmb::learn {

struct LinearSvmParams {
  double lambda = 1e-3;
  int epochs = 30;
  bool standardize = true;
};

/// One-vs-rest linear SVM: per class, hinge loss + (lambda / 2)||(w, b)||^2
/// minimized by epoch-shuffled stochastic subgradient steps of size
/// 1 / (lambda t). The returned weights average the epoch-end iterates of
/// the second half of training. scores() is softmax over the margins.
class LinearSvmModel final : public Model {
 public:
  static LinearSvmModel train(const LinearSvmParams& params, const Matrix& x, std::span<const int> y, int classes,
                              std::uint64_t seed);
  static LinearSvmModel load(const ArchiveReader& in, const std::string& prefix);

  std::size_t num_features() const override { return static_cast<std::size_t>(weights_.cols()); }
  std::size_t num_classes() const override { return static_cast<std::size_t>(weights_.rows()); }
  Matrix margins(const Matrix& x) const;
  Matrix scores(const Matrix& x) const override;
  void save(ArchiveWriter& out, const std::string& prefix) const override;

 private:
  Standardizer standardizer_;
  Matrix weights_;  // classes x d
  Vector bias_;
};

struct BaggedSvmParams {
  int n_estimators = 25;
  LinearSvmParams member;
};

// Bootstrap-bagged LinearSVMs; scores() is softmax over the mean margins.
class BaggedSvmModel final : public Model {
 public:
  static BaggedSvmModel train(const BaggedSvmParams& params, const Matrix& x, std::span<const int> y, int classes,
                              std::uint64_t seed);
  static BaggedSvmModel load(const ArchiveReader& in, const std::string& prefix);

  std::size_t num_features() const override { return members_.front().num_features(); }
  std::size_t num_classes() const override { return members_.front().num_classes(); }
  Matrix mean_margins(const Matrix& x) const;
  Matrix scores(const Matrix& x) const override;
  void save(ArchiveWriter& out, const std::string& prefix) const override;

 private:
  std::vector<LinearSvmModel> members_;
};

}  // namespace xmb::learn
