#pragma once

#include <span>
#include <vector>

#include "xmb/learn/spec.hpp"
#include "xmb/learn/tree.hpp"

namespace xmb::learn {

struct GbdtParams {
  GbdtPreset preset = GbdtPreset::GB;
  int rounds = 300;
  double learning_rate = 0.1;
  int max_depth = 6;
  int min_samples_leaf = 1;
  double lambda = 1.0;            // second-order presets
  double min_child_weight = 0.0;  // minimum hessian sum per child, second-order presets
  int max_leaves = 31;            // lgbm
  int bins = 256;                 // lgbm

  static GbdtParams for_preset(GbdtPreset preset);
};

/// Multiclass gradient boosting on the softmax log-loss.
///
/// Every round fits one regression tree per class to the per-sample
/// gradient g = p - y (and hessian h = p(1 - p)) of that class's logit.
///   gb               level-wise exact splits, gain G_L^2/n_L + G_R^2/n_R - G^2/n,
///                    leaf value -G/n
///   xgb              level-wise exact splits, gain with G^2/(H + lambda),
///                    leaf value -G/(H + lambda)
///   lgbm             as xgb but split search over per-feature quantile bins
///                    and best-first (leaf-wise) growth up to max_leaves
///   catboost-approx  gb statistics on oblivious trees: one shared
///                    (feature, threshold) per level. An approximation of
///                    CatBoost, which additionally uses ordered boosting.
/// Leaf values are scaled by the learning rate. Initial logits are the log
/// class priors.
class GbdtModel final : public Model {
 public:
  static GbdtModel train(const GbdtParams& params, const Matrix& x, std::span<const int> y, int classes);
  static GbdtModel load(const ArchiveReader& in, const std::string& prefix);

  std::size_t num_features() const override { return features_; }
  std::size_t num_classes() const override { return static_cast<std::size_t>(base_.size()); }
  Matrix logits(const Matrix& x) const;
  Matrix scores(const Matrix& x) const override;
  void save(ArchiveWriter& out, const std::string& prefix) const override;

  // Mean training log-loss before the first round and after each round.
  const std::vector<double>& loss_history() const { return loss_history_; }
  const std::vector<std::vector<Tree>>& rounds() const { return trees_; }

 private:
  Vector base_;
  std::vector<std::vector<Tree>> trees_;  // [round][class]
  std::size_t features_ = 0;
  std::vector<double> loss_history_;
};

}  // namespace xmb::learn
