#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "xmb/learn/model.hpp"

namespace xmb::learn {

/// Binary decision tree with a fixed-width value vector at every node.
/// An internal node sends x left when x[feature] <= threshold.
class Tree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
  };

  explicit Tree(std::size_t width = 1) : width_(width) {}

  int add_node(std::span<const double> value);
  void split(int node, int feature, double threshold, int left, int right);
  void set_value(int node, std::span<const double> value);

  int leaf_index(const double* row) const;
  std::span<const double> predict(const double* row) const;
  std::span<const double> value(int node) const;

  std::size_t width() const { return width_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t leaf_count() const;
  int depth() const;

  void save(ArchiveWriter& out, const std::string& prefix) const;
  static Tree load(const ArchiveReader& in, const std::string& prefix);

 private:
  std::size_t width_;
  std::vector<Node> nodes_;
  std::vector<double> values_;
};

// Midpoint of two consecutive distinct values, nudged so that lo <= t < hi.
double split_threshold(double lo, double hi);

struct CartParams {
  int max_depth = 12;
  int min_samples_leaf = 2;
  int max_features = 0;  // features examined per split; 0 or >= d means all
};

/// CART with Gini impurity. `samples` lists training rows (repeats allowed,
/// as produced by a bootstrap). Leaves hold class fractions. Split search
/// covers every candidate feature and every midpoint between consecutive
/// distinct values; equal gains keep the lowest feature, then the lowest
/// threshold. With max_features < d each node draws its candidate features
/// from `rng_seed`.
Tree build_cart(const CartParams& params, const Matrix& x, std::span<const int> y, int classes,
                std::span<const std::size_t> samples, std::uint64_t rng_seed);

class DecisionTreeModel final : public Model {
 public:
  static DecisionTreeModel train(const CartParams& params, const Matrix& x, std::span<const int> y, int classes);
  static DecisionTreeModel load(const ArchiveReader& in, const std::string& prefix);

  std::size_t num_features() const override { return features_; }
  std::size_t num_classes() const override { return tree_.width(); }
  Matrix scores(const Matrix& x) const override;
  void save(ArchiveWriter& out, const std::string& prefix) const override;
  const Tree& tree() const { return tree_; }

 private:
  Tree tree_;
  std::size_t features_ = 0;
};

struct ForestParams {
  int n_trees = 200;
  CartParams tree;  // max_features 0 means floor(sqrt(d))
  bool bootstrap = true;
};

// Scores are the fraction of trees whose leaf argmax votes for each class.
class RandomForestModel final : public Model {
 public:
  static RandomForestModel train(const ForestParams& params, const Matrix& x, std::span<const int> y, int classes,
                                 std::uint64_t seed);
  static RandomForestModel load(const ArchiveReader& in, const std::string& prefix);

  std::size_t num_features() const override { return features_; }
  std::size_t num_classes() const override { return static_cast<std::size_t>(classes_); }
  Matrix scores(const Matrix& x) const override;
  void save(ArchiveWriter& out, const std::string& prefix) const override;
  const std::vector<Tree>& trees() const { return trees_; }

 private:
  std::vector<Tree> trees_;
  std::size_t features_ = 0;
  int classes_ = 0;
};

}  // namespace xmb::learn
