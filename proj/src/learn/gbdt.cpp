#include "xmb/learn/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "xmb/error.hpp"

namespace xmb::learn {

GbdtParams GbdtParams::for_preset(GbdtPreset preset) {
  GbdtParams p;
  p.preset = preset;
  switch (preset) {
    case GbdtPreset::GB:
    case GbdtPreset::CatBoostApprox:
      p.lambda = 0.0;
      p.min_child_weight = 0.0;
      break;
    case GbdtPreset::XGB:
      p.lambda = 1.0;
      p.min_child_weight = 1.0;
      break;
    case GbdtPreset::LGBM:
      p.lambda = 1.0;
      p.min_child_weight = 1e-3;
      p.min_samples_leaf = 20;
      break;
  }
  return p;
}

namespace {

struct Stats {
  double g = 0.0;
  double h = 0.0;
  double n = 0.0;

  Stats& operator+=(const Stats& o) {
    g += o.g;
    h += o.h;
    n += o.n;
    return *this;
  }
  Stats operator-(const Stats& o) const { return {g - o.g, h - o.h, n - o.n}; }
};

// Split statistics for one preset: first order treats every sample as unit
// hessian with no penalty (squared-error fit of the residual).
struct Objective {
  bool second_order = false;
  double lambda = 0.0;
  double min_child_weight = 0.0;
  double min_leaf = 1.0;

  double denom(const Stats& s) const { return second_order ? s.h + lambda : s.n; }
  double score(const Stats& s) const {
    const double d = denom(s);
    return d > 0.0 ? s.g * s.g / d : 0.0;
  }
  double leaf(const Stats& s) const {
    const double d = denom(s);
    return d > 0.0 ? -s.g / d : 0.0;
  }
  bool admissible(const Stats& s) const {
    return s.n >= min_leaf && (!second_order || s.h >= min_child_weight);
  }
};

struct Candidate {
  double gain = 1e-12;
  int feature = -1;
  double threshold = 0.0;
};

bool better(double gain, double best) { return gain > best + 1e-12 * std::abs(best); }

class TreeGrower {
 public:
  TreeGrower(const GbdtParams& p, const Matrix& x, const std::vector<std::vector<std::uint32_t>>& order)
      : params_(p), x_(x), order_(order) {
    obj_.second_order = p.preset == GbdtPreset::XGB || p.preset == GbdtPreset::LGBM;
    obj_.lambda = p.lambda;
    obj_.min_child_weight = p.min_child_weight;
    obj_.min_leaf = static_cast<double>(p.min_samples_leaf);
    if (p.preset == GbdtPreset::LGBM) build_bins();
  }

  Tree grow(const std::vector<double>& g, const std::vector<double>& h) const {
    switch (params_.preset) {
      case GbdtPreset::GB:
      case GbdtPreset::XGB: return level_wise(g, h);
      case GbdtPreset::CatBoostApprox: return oblivious(g, h);
      case GbdtPreset::LGBM: return leaf_wise(g, h);
    }
    return level_wise(g, h);
  }

 private:
  Stats stats_of(const std::vector<double>& g, const std::vector<double>& h, std::size_t s) const {
    return {g[s], h[s], 1.0};
  }

  void leaf_value(Tree& t, int node, const Stats& s) const {
    const double v = params_.learning_rate * obj_.leaf(s);
    t.set_value(node, std::span<const double>(&v, 1));
  }

  int new_node(Tree& t, const Stats& s) const {
    const double v = params_.learning_rate * obj_.leaf(s);
    return t.add_node(std::span<const double>(&v, 1));
  }

  // Depth-wise growth with exact splits over the presorted feature orders.
  Tree level_wise(const std::vector<double>& g, const std::vector<double>& h) const {
    const auto n = static_cast<std::size_t>(x_.rows());
    const auto d = static_cast<int>(x_.cols());
    Tree tree(1);
    Stats root;
    for (std::size_t s = 0; s < n; ++s) root += stats_of(g, h, s);
    new_node(tree, root);
    std::vector<int> node_of(n, 0);
    std::vector<int> active = {0};
    std::vector<Stats> totals = {root};

    for (int depth = 0; depth < params_.max_depth && !active.empty(); ++depth) {
      std::vector<int> slot_of(tree.size(), -1);
      for (std::size_t a = 0; a < active.size(); ++a) slot_of[static_cast<std::size_t>(active[a])] = static_cast<int>(a);
      std::vector<Candidate> best(active.size());
      std::vector<Stats> running(active.size());
      std::vector<double> last(active.size());
      for (int f = 0; f < d; ++f) {
        std::fill(running.begin(), running.end(), Stats{});
        for (std::uint32_t s : order_[static_cast<std::size_t>(f)]) {
          const int slot = slot_of[static_cast<std::size_t>(node_of[s])];
          if (slot < 0) continue;
          const auto a = static_cast<std::size_t>(slot);
          const double v = x_(static_cast<Eigen::Index>(s), f);
          if (running[a].n > 0.0 && v > last[a]) {
            const Stats& left = running[a];
            const Stats right = totals[a] - left;
            if (obj_.admissible(left) && obj_.admissible(right)) {
              const double gain = obj_.score(left) + obj_.score(right) - obj_.score(totals[a]);
              if (better(gain, best[a].gain)) best[a] = {gain, f, split_threshold(last[a], v)};
            }
          }
          running[a] += stats_of(g, h, s);
          last[a] = v;
        }
      }

      std::vector<int> next_active;
      std::vector<Stats> next_totals;
      std::vector<int> left_of(tree.size(), -1), right_of(tree.size(), -1);
      std::vector<Stats> left_stats(active.size()), right_stats(active.size());
      for (std::size_t s = 0; s < n; ++s) {
        const int slot = slot_of[static_cast<std::size_t>(node_of[s])];
        if (slot < 0 || best[static_cast<std::size_t>(slot)].feature < 0) continue;
        const auto& c = best[static_cast<std::size_t>(slot)];
        if (x_(static_cast<Eigen::Index>(s), c.feature) <= c.threshold) left_stats[static_cast<std::size_t>(slot)] += stats_of(g, h, s);
        else right_stats[static_cast<std::size_t>(slot)] += stats_of(g, h, s);
      }
      for (std::size_t a = 0; a < active.size(); ++a) {
        if (best[a].feature < 0) continue;
        const int l = new_node(tree, left_stats[a]);
        const int r = new_node(tree, right_stats[a]);
        tree.split(active[a], best[a].feature, best[a].threshold, l, r);
        next_active.push_back(l);
        next_totals.push_back(left_stats[a]);
        next_active.push_back(r);
        next_totals.push_back(right_stats[a]);
        left_of[static_cast<std::size_t>(active[a])] = l;
        right_of[static_cast<std::size_t>(active[a])] = r;
      }
      for (std::size_t s = 0; s < n; ++s) {
        const auto node = static_cast<std::size_t>(node_of[s]);
        if (node >= left_of.size() || left_of[node] < 0) continue;
        const auto& nd = tree.nodes()[node];
        node_of[s] = x_(static_cast<Eigen::Index>(s), nd.feature) <= nd.threshold ? left_of[node] : right_of[node];
      }
      active = std::move(next_active);
      totals = std::move(next_totals);
    }
    return tree;
  }

  // Symmetric tree: one (feature, threshold) per level, chosen by the gain
  // summed over all nodes of the level.
  Tree oblivious(const std::vector<double>& g, const std::vector<double>& h) const {
    const auto n = static_cast<std::size_t>(x_.rows());
    const auto d = static_cast<int>(x_.cols());
    std::vector<int> bucket(n, 0);
    std::vector<std::pair<int, double>> levels;
    for (int depth = 0; depth < params_.max_depth; ++depth) {
      const std::size_t buckets = std::size_t{1} << depth;
      std::vector<Stats> totals(buckets);
      for (std::size_t s = 0; s < n; ++s) totals[static_cast<std::size_t>(bucket[s])] += stats_of(g, h, s);
      std::vector<double> base(buckets);
      for (std::size_t b = 0; b < buckets; ++b) base[b] = obj_.score(totals[b]);

      Candidate best;
      std::vector<Stats> running(buckets);
      std::vector<double> contrib(buckets);
      for (int f = 0; f < d; ++f) {
        std::fill(running.begin(), running.end(), Stats{});
        std::fill(contrib.begin(), contrib.end(), 0.0);
        double total_gain = 0.0;
        bool started = false;
        double last = 0.0;
        for (std::uint32_t s : order_[static_cast<std::size_t>(f)]) {
          const double v = x_(static_cast<Eigen::Index>(s), f);
          if (started && v > last && better(total_gain, best.gain)) best = {total_gain, f, split_threshold(last, v)};
          const auto b = static_cast<std::size_t>(bucket[s]);
          running[b] += stats_of(g, h, s);
          const double c = obj_.score(running[b]) + obj_.score(totals[b] - running[b]) - base[b];
          total_gain += c - contrib[b];
          contrib[b] = c;
          started = true;
          last = v;
        }
      }
      if (best.feature < 0) break;
      levels.emplace_back(best.feature, best.threshold);
      for (std::size_t s = 0; s < n; ++s)
        bucket[s] = 2 * bucket[s] + (x_(static_cast<Eigen::Index>(s), best.feature) <= best.threshold ? 0 : 1);
    }

    const std::size_t leaves = std::size_t{1} << levels.size();
    std::vector<Stats> leaf_stats(leaves);
    for (std::size_t s = 0; s < n; ++s) leaf_stats[static_cast<std::size_t>(bucket[s])] += stats_of(g, h, s);

    // Expand into an ordinary binary tree, heap-ordered by bucket code.
    Tree tree(1);
    std::vector<int> frontier = {new_node(tree, Stats{})};
    for (const auto& [feature, threshold] : levels) {
      std::vector<int> next;
      for (int node : frontier) {
        const int l = new_node(tree, Stats{});
        const int r = new_node(tree, Stats{});
        tree.split(node, feature, threshold, l, r);
        next.push_back(l);
        next.push_back(r);
      }
      frontier = std::move(next);
    }
    for (std::size_t b = 0; b < leaves; ++b) leaf_value(tree, frontier[b], leaf_stats[b]);
    if (levels.empty()) leaf_value(tree, 0, leaf_stats[0]);
    return tree;
  }

  void build_bins() {
    const auto n = static_cast<std::size_t>(x_.rows());
    const auto d = static_cast<std::size_t>(x_.cols());
    const auto max_bins = static_cast<std::size_t>(params_.bins);
    edges_.assign(d, {});
    codes_.assign(n * d, 0);
    for (std::size_t f = 0; f < d; ++f) {
      const auto& ord = order_[f];
      // Distinct values with their multiplicities, ascending.
      std::vector<std::pair<double, std::size_t>> distinct;
      for (std::uint32_t s : ord) {
        const double v = x_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(f));
        if (distinct.empty() || v > distinct.back().first) distinct.emplace_back(v, 1);
        else ++distinct.back().second;
      }
      auto& e = edges_[f];
      if (distinct.size() <= max_bins) {
        for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
          e.push_back(split_threshold(distinct[i].first, distinct[i + 1].first));
      } else {
        // Cut whenever the cumulative count passes the next multiple of n / bins.
        const double per_bin = static_cast<double>(n) / static_cast<double>(max_bins);
        std::size_t cumulative = 0;
        for (std::size_t i = 0; i + 1 < distinct.size() && e.size() + 1 < max_bins; ++i) {
          cumulative += distinct[i].second;
          if (static_cast<double>(cumulative) >= per_bin * static_cast<double>(e.size() + 1))
            e.push_back(split_threshold(distinct[i].first, distinct[i + 1].first));
        }
      }
      for (std::size_t s = 0; s < n; ++s) {
        const double v = x_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(f));
        codes_[s * d + f] = static_cast<std::uint16_t>(std::lower_bound(e.begin(), e.end(), v) - e.begin());
      }
    }
  }

  struct Leaf {
    int node = 0;
    int depth = 0;
    std::vector<std::uint32_t> samples;
    Stats total;
    Candidate best;
    int best_bin = -1;
    Stats best_left;
  };

  void find_histogram_split(Leaf& leaf, const std::vector<double>& g, const std::vector<double>& h) const {
    const auto d = static_cast<std::size_t>(x_.cols());
    leaf.best = Candidate{};
    leaf.best_bin = -1;
    if (leaf.depth >= params_.max_depth) return;
    std::vector<Stats> hist;
    for (std::size_t f = 0; f < d; ++f) {
      const std::size_t bins = edges_[f].size() + 1;
      if (bins < 2) continue;
      hist.assign(bins, Stats{});
      for (std::uint32_t s : leaf.samples) hist[codes_[s * d + f]] += stats_of(g, h, s);
      Stats left;
      for (std::size_t b = 0; b + 1 < bins; ++b) {
        left += hist[b];
        if (hist[b].n == 0.0 && b > 0) continue;  // same partition as the previous bin
        const Stats right = leaf.total - left;
        if (right.n <= 0.0) break;
        if (!obj_.admissible(left) || !obj_.admissible(right)) continue;
        const double gain = obj_.score(left) + obj_.score(right) - obj_.score(leaf.total);
        if (better(gain, leaf.best.gain)) {
          leaf.best = {gain, static_cast<int>(f), edges_[f][b]};
          leaf.best_bin = static_cast<int>(b);
          leaf.best_left = left;
        }
      }
    }
  }

  // Best-first growth over histogram splits.
  Tree leaf_wise(const std::vector<double>& g, const std::vector<double>& h) const {
    const auto n = static_cast<std::size_t>(x_.rows());
    const auto d = static_cast<std::size_t>(x_.cols());
    Tree tree(1);
    std::vector<Leaf> leaves(1);
    leaves[0].samples.resize(n);
    std::iota(leaves[0].samples.begin(), leaves[0].samples.end(), 0u);
    for (std::size_t s = 0; s < n; ++s) leaves[0].total += stats_of(g, h, s);
    leaves[0].node = new_node(tree, leaves[0].total);
    find_histogram_split(leaves[0], g, h);

    while (static_cast<int>(leaves.size()) < params_.max_leaves) {
      int pick = -1;
      for (std::size_t i = 0; i < leaves.size(); ++i)
        if (leaves[i].best.feature >= 0 &&
            (pick < 0 || better(leaves[i].best.gain, leaves[static_cast<std::size_t>(pick)].best.gain)))
          pick = static_cast<int>(i);
      if (pick < 0) break;
      Leaf parent = std::move(leaves[static_cast<std::size_t>(pick)]);
      Leaf left, right;
      left.depth = right.depth = parent.depth + 1;
      const auto f = static_cast<std::size_t>(parent.best.feature);
      for (std::uint32_t s : parent.samples)
        (static_cast<int>(codes_[s * d + f]) <= parent.best_bin ? left : right).samples.push_back(s);
      left.total = parent.best_left;
      right.total = parent.total - parent.best_left;
      left.node = new_node(tree, left.total);
      right.node = new_node(tree, right.total);
      tree.split(parent.node, parent.best.feature, parent.best.threshold, left.node, right.node);
      find_histogram_split(left, g, h);
      find_histogram_split(right, g, h);
      leaves[static_cast<std::size_t>(pick)] = std::move(left);
      leaves.push_back(std::move(right));
    }
    return tree;
  }

  const GbdtParams& params_;
  const Matrix& x_;
  const std::vector<std::vector<std::uint32_t>>& order_;
  Objective obj_;
  std::vector<std::vector<double>> edges_;
  std::vector<std::uint16_t> codes_;
};

double mean_log_loss(const Matrix& logits, std::span<const int> y) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    loss += lse - logits(i, y[static_cast<std::size_t>(i)]);
  }
  return loss / static_cast<double>(logits.rows());
}

}  // namespace

GbdtModel GbdtModel::train(const GbdtParams& params, const Matrix& x, std::span<const int> y, int classes) {
  if (params.preset == GbdtPreset::LGBM && params.bins > 65536) throw ConfigError("lgbm: at most 65536 bins");
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  GbdtModel m;
  m.features_ = d;

  std::vector<std::vector<std::uint32_t>> order(d, std::vector<std::uint32_t>(n));
  for (std::size_t f = 0; f < d; ++f) {
    auto& o = order[f];
    std::iota(o.begin(), o.end(), 0u);
    std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) {
      return x(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(f)) <
             x(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(f));
    });
  }
  TreeGrower grower(params, x, order);

  m.base_.resize(classes);
  std::vector<double> counts(static_cast<std::size_t>(classes), 0.0);
  for (int label : y) counts[static_cast<std::size_t>(label)] += 1.0;
  for (int c = 0; c < classes; ++c)
    m.base_(c) = std::log(std::max(counts[static_cast<std::size_t>(c)], 1e-12) / static_cast<double>(n));

  Matrix logits(x.rows(), classes);
  logits.rowwise() = m.base_.transpose();
  m.loss_history_.push_back(mean_log_loss(logits, y));
  std::vector<double> g(n), h(n);
  for (int r = 0; r < params.rounds; ++r) {
    const Matrix prob = softmax_rows(logits);
    std::vector<Tree> round;
    for (int c = 0; c < classes; ++c) {
      for (std::size_t s = 0; s < n; ++s) {
        const double p = prob(static_cast<Eigen::Index>(s), c);
        g[s] = p - (y[s] == c ? 1.0 : 0.0);
        h[s] = std::max(p * (1.0 - p), 1e-16);
      }
      round.push_back(grower.grow(g, h));
    }
    for (int c = 0; c < classes; ++c)
      for (Eigen::Index s = 0; s < x.rows(); ++s)
        logits(s, c) += round[static_cast<std::size_t>(c)].predict(x.row(s).data())[0];
    m.trees_.push_back(std::move(round));
    m.loss_history_.push_back(mean_log_loss(logits, y));
  }
  return m;
}

Matrix GbdtModel::logits(const Matrix& x) const {
  Matrix out(x.rows(), base_.size());
  out.rowwise() = base_.transpose();
  for (const auto& round : trees_)
    for (std::size_t c = 0; c < round.size(); ++c)
      for (Eigen::Index s = 0; s < x.rows(); ++s)
        out(s, static_cast<Eigen::Index>(c)) += round[c].predict(x.row(s).data())[0];
  return out;
}

Matrix GbdtModel::scores(const Matrix& x) const { return softmax_rows(logits(x)); }

void GbdtModel::save(ArchiveWriter& out, const std::string& prefix) const {
  out.meta()["models"][prefix] = {{"kind", "gbdt"}, {"features", features_}, {"rounds", trees_.size()}};
  out.put(prefix + "base", base_);
  for (std::size_t r = 0; r < trees_.size(); ++r)
    for (std::size_t c = 0; c < trees_[r].size(); ++c)
      trees_[r][c].save(out, prefix + "r" + std::to_string(r) + "c" + std::to_string(c) + ".");
}

GbdtModel GbdtModel::load(const ArchiveReader& in, const std::string& prefix) {
  const auto& d = in.meta().at("models").at(prefix);
  GbdtModel m;
  m.features_ = d.at("features").get<std::size_t>();
  m.base_ = in.get_vector(prefix + "base");
  const auto rounds = d.at("rounds").get<std::size_t>();
  for (std::size_t r = 0; r < rounds; ++r) {
    std::vector<Tree> round;
    for (Eigen::Index c = 0; c < m.base_.size(); ++c)
      round.push_back(Tree::load(in, prefix + "r" + std::to_string(r) + "c" + std::to_string(c) + "."));
    m.trees_.push_back(std::move(round));
  }
  return m;
}

}  // namespace xmb::learn
