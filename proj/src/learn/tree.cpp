#include "xmb/learn/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "xmb/error.hpp"
#include "xmb/random.hpp"

namespace xmb::learn {

int Tree::add_node(std::span<const double> value) {
  if (value.size() != width_) throw Error("tree node value has wrong width");
  nodes_.push_back(Node{});
  values_.insert(values_.end(), value.begin(), value.end());
  return static_cast<int>(nodes_.size() - 1);
}

void Tree::split(int node, int feature, double threshold, int left, int right) {
  auto& n = nodes_[static_cast<std::size_t>(node)];
  n.feature = feature;
  n.threshold = threshold;
  n.left = left;
  n.right = right;
}

void Tree::set_value(int node, std::span<const double> value) {
  std::copy(value.begin(), value.end(), values_.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(node) * width_));
}

int Tree::leaf_index(const double* row) const {
  int i = 0;
  while (nodes_[static_cast<std::size_t>(i)].feature >= 0) {
    const auto& n = nodes_[static_cast<std::size_t>(i)];
    i = row[n.feature] <= n.threshold ? n.left : n.right;
  }
  return i;
}

std::span<const double> Tree::value(int node) const {
  return std::span<const double>(values_).subspan(static_cast<std::size_t>(node) * width_, width_);
}

std::span<const double> Tree::predict(const double* row) const { return value(leaf_index(row)); }

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

int Tree::depth() const {
  std::function<int(int)> rec = [&](int i) -> int {
    const auto& n = nodes_[static_cast<std::size_t>(i)];
    if (n.feature < 0) return 0;
    return 1 + std::max(rec(n.left), rec(n.right));
  };
  return nodes_.empty() ? 0 : rec(0);
}

void Tree::save(ArchiveWriter& out, const std::string& prefix) const {
  std::vector<int> feature, left, right;
  std::vector<double> threshold;
  for (const auto& n : nodes_) {
    feature.push_back(n.feature);
    left.push_back(n.left);
    right.push_back(n.right);
    threshold.push_back(n.threshold);
  }
  out.put_ints(prefix + "feature", feature);
  out.put_ints(prefix + "left", left);
  out.put_ints(prefix + "right", right);
  out.put(prefix + "threshold", threshold);
  out.put(prefix + "value", values_);
  out.put(prefix + "width", std::vector<double>{static_cast<double>(width_)});
}

Tree Tree::load(const ArchiveReader& in, const std::string& prefix) {
  Tree t(static_cast<std::size_t>(in.get(prefix + "width").at(0)));
  auto feature = in.get_ints(prefix + "feature");
  auto left = in.get_ints(prefix + "left");
  auto right = in.get_ints(prefix + "right");
  auto threshold = in.get(prefix + "threshold");
  t.values_ = in.get(prefix + "value");
  if (t.values_.size() != feature.size() * t.width_) throw DataError("tree block sizes disagree");
  for (std::size_t i = 0; i < feature.size(); ++i) t.nodes_.push_back(Node{feature[i], threshold[i], left[i], right[i]});
  return t;
}

double split_threshold(double lo, double hi) {
  double t = lo + (hi - lo) / 2.0;
  if (!(t >= lo && t < hi)) t = lo;
  return t;
}

namespace {

struct CartBuilder {
  const CartParams& params;
  const Matrix& x;
  std::span<const int> y;
  int classes;
  Rng rng;
  Tree tree;
  std::vector<std::pair<double, int>> column;  // (value, label) scratch
  std::vector<int> features;

  CartBuilder(const CartParams& p, const Matrix& xm, std::span<const int> ym, int k, std::uint64_t seed)
      : params(p), x(xm), y(ym), classes(k), rng(seed), tree(static_cast<std::size_t>(k)) {
    features.resize(static_cast<std::size_t>(x.cols()));
  }

  std::vector<double> distribution(const std::vector<std::size_t>& samples) const {
    std::vector<double> v(static_cast<std::size_t>(classes), 0.0);
    for (auto s : samples) v[static_cast<std::size_t>(y[s])] += 1.0;
    for (auto& c : v) c /= static_cast<double>(samples.size());
    return v;
  }

  std::vector<int> candidate_features() {
    const int d = static_cast<int>(x.cols());
    const int m = params.max_features;
    std::iota(features.begin(), features.end(), 0);
    if (m <= 0 || m >= d) return features;
    // Partial Fisher-Yates: positions 0..m-1 receive a uniform sample.
    for (int i = 0; i < m; ++i) {
      auto j = i + static_cast<int>(rng.index(static_cast<std::uint64_t>(d - i)));
      std::swap(features[static_cast<std::size_t>(i)], features[static_cast<std::size_t>(j)]);
    }
    std::vector<int> out(features.begin(), features.begin() + m);
    std::sort(out.begin(), out.end());
    return out;
  }

  int grow(const std::vector<std::size_t>& samples, int depth) {
    auto dist = distribution(samples);
    const int node = tree.add_node(dist);
    const auto n = samples.size();
    const auto min_leaf = static_cast<std::size_t>(params.min_samples_leaf);
    const bool pure = std::count_if(dist.begin(), dist.end(), [](double v) { return v > 0.0; }) <= 1;
    if (depth >= params.max_depth || n < 2 * min_leaf || pure) return node;

    std::vector<double> total(static_cast<std::size_t>(classes), 0.0);
    for (auto s : samples) total[static_cast<std::size_t>(y[s])] += 1.0;
    double parent = 0.0;
    for (double c : total) parent += c * c;
    parent /= static_cast<double>(n);

    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<double> left(static_cast<std::size_t>(classes));
    for (int f : candidate_features()) {
      column.clear();
      for (auto s : samples) column.emplace_back(x(static_cast<Eigen::Index>(s), f), y[s]);
      std::sort(column.begin(), column.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (column.front().first == column.back().first) continue;
      std::fill(left.begin(), left.end(), 0.0);
      double left_sq = 0.0;  // sum over classes of left count squared
      double right_sq = parent * static_cast<double>(n);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto c = static_cast<std::size_t>(column[i].second);
        const double l = left[c];
        const double r = total[c] - l;
        left_sq += 2.0 * l + 1.0;
        right_sq += -2.0 * r + 1.0;
        left[c] = l + 1.0;
        const std::size_t nl = i + 1;
        if (column[i].first == column[i + 1].first || nl < min_leaf || n - nl < min_leaf) continue;
        const double gain = left_sq / static_cast<double>(nl) + right_sq / static_cast<double>(n - nl) - parent;
        if (gain > best_gain + 1e-12 * std::abs(best_gain)) {
          best_gain = gain;
          best_feature = f;
          best_threshold = split_threshold(column[i].first, column[i + 1].first);
        }
      }
    }
    if (best_feature < 0) return node;

    std::vector<std::size_t> ls, rs;
    for (auto s : samples) (x(static_cast<Eigen::Index>(s), best_feature) <= best_threshold ? ls : rs).push_back(s);
    const int l = grow(ls, depth + 1);
    const int r = grow(rs, depth + 1);
    tree.split(node, best_feature, best_threshold, l, r);
    return node;
  }
};

}  // namespace

Tree build_cart(const CartParams& params, const Matrix& x, std::span<const int> y, int classes,
                std::span<const std::size_t> samples, std::uint64_t rng_seed) {
  if (samples.empty()) throw DataError("cannot grow a tree on zero samples");
  CartBuilder b(params, x, y, classes, rng_seed);
  b.grow(std::vector<std::size_t>(samples.begin(), samples.end()), 0);
  return std::move(b.tree);
}

DecisionTreeModel DecisionTreeModel::train(const CartParams& params, const Matrix& x, std::span<const int> y,
                                           int classes) {
  std::vector<std::size_t> all(static_cast<std::size_t>(x.rows()));
  std::iota(all.begin(), all.end(), std::size_t{0});
  DecisionTreeModel m;
  CartParams p = params;
  p.max_features = 0;
  m.tree_ = build_cart(p, x, y, classes, all, 0);
  m.features_ = static_cast<std::size_t>(x.cols());
  return m;
}

Matrix DecisionTreeModel::scores(const Matrix& x) const {
  Matrix out(x.rows(), static_cast<Eigen::Index>(tree_.width()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    auto v = tree_.predict(x.row(i).data());
    for (std::size_t c = 0; c < v.size(); ++c) out(i, static_cast<Eigen::Index>(c)) = v[c];
  }
  return out;
}

void DecisionTreeModel::save(ArchiveWriter& out, const std::string& prefix) const {
  out.meta()["models"][prefix] = {{"kind", "decision_tree"}, {"features", features_}};
  tree_.save(out, prefix);
}

DecisionTreeModel DecisionTreeModel::load(const ArchiveReader& in, const std::string& prefix) {
  DecisionTreeModel m;
  m.features_ = in.meta().at("models").at(prefix).at("features").get<std::size_t>();
  m.tree_ = Tree::load(in, prefix);
  return m;
}

RandomForestModel RandomForestModel::train(const ForestParams& params, const Matrix& x, std::span<const int> y,
                                           int classes, std::uint64_t seed) {
  RandomForestModel m;
  m.features_ = static_cast<std::size_t>(x.cols());
  m.classes_ = classes;
  CartParams tp = params.tree;
  if (tp.max_features <= 0)
    tp.max_features = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(x.cols())))));
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<std::size_t> samples(n);
  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(seed, "tree", static_cast<std::uint64_t>(t)));
    if (params.bootstrap)
      for (auto& s : samples) s = static_cast<std::size_t>(rng.index(n));
    else
      std::iota(samples.begin(), samples.end(), std::size_t{0});
    m.trees_.push_back(build_cart(tp, x, y, classes, samples, rng.next()));
  }
  return m;
}

Matrix RandomForestModel::scores(const Matrix& x) const {
  Matrix out = Matrix::Zero(x.rows(), classes_);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (const auto& t : trees_) {
      auto v = t.predict(x.row(i).data());
      out(i, static_cast<Eigen::Index>(std::max_element(v.begin(), v.end()) - v.begin())) += 1.0;
    }
  }
  return out / static_cast<double>(trees_.size());
}

void RandomForestModel::save(ArchiveWriter& out, const std::string& prefix) const {
  out.meta()["models"][prefix] = {
      {"kind", "random_forest"}, {"features", features_}, {"classes", classes_}, {"trees", trees_.size()}};
  for (std::size_t t = 0; t < trees_.size(); ++t) trees_[t].save(out, prefix + "t" + std::to_string(t) + ".");
}

RandomForestModel RandomForestModel::load(const ArchiveReader& in, const std::string& prefix) {
  const auto& d = in.meta().at("models").at(prefix);
  RandomForestModel m;
  m.features_ = d.at("features").get<std::size_t>();
  m.classes_ = d.at("classes").get<int>();
  const auto count = d.at("trees").get<std::size_t>();
  for (std::size_t t = 0; t < count; ++t) m.trees_.push_back(Tree::load(in, prefix + "t" + std::to_string(t) + "."));
  return m;
}

}  // namespace xmb::learn
