#include "xmb/learn/knn.hpp"

#include <algorithm>
#include <numeric>

#include "xmb/error.hpp"

namespace xmb::learn {

KnnModel KnnModel::train(int k, const Matrix& x, std::span<const int> y, int classes) {
  if (k < 1) throw ConfigError("knn: k must be >= 1");
  KnnModel m;
  m.k_ = k;
  m.classes_ = classes;
  m.train_ = x;
  m.labels_.assign(y.begin(), y.end());
  return m;
}

Matrix KnnModel::scores(const Matrix& x) const {
  constexpr double kTieBonus = 1e-3;
  const auto n_train = static_cast<std::size_t>(train_.rows());
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(k_), n_train);
  Matrix out = Matrix::Zero(x.rows(), classes_);
  std::vector<double> dist(n_train);
  std::vector<std::size_t> order(n_train);
  for (Eigen::Index q = 0; q < x.rows(); ++q) {
    for (std::size_t i = 0; i < n_train; ++i) dist[i] = (train_.row(static_cast<Eigen::Index>(i)) - x.row(q)).squaredNorm();
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto by_distance = [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), by_distance);

    std::vector<int> votes(static_cast<std::size_t>(classes_), 0);
    for (std::size_t j = 0; j < k; ++j) ++votes[static_cast<std::size_t>(labels_[order[j]])];
    const int top = *std::max_element(votes.begin(), votes.end());
    int winner = -1;
    for (std::size_t j = 0; j < k && winner < 0; ++j)
      if (votes[static_cast<std::size_t>(labels_[order[j]])] == top) winner = labels_[order[j]];
    for (int c = 0; c < classes_; ++c)
      out(q, c) = (votes[static_cast<std::size_t>(c)] + (c == winner ? kTieBonus : 0.0)) / (static_cast<double>(k) + kTieBonus);
  }
  return out;
}

void KnnModel::save(ArchiveWriter& out, const std::string& prefix) const {
  out.meta()["models"][prefix] = {
      {"kind", "knn"}, {"k", k_}, {"classes", classes_}, {"rows", train_.rows()}, {"features", train_.cols()}};
  out.put(prefix + "X", train_);
  out.put_ints(prefix + "y", labels_);
}

KnnModel KnnModel::load(const ArchiveReader& in, const std::string& prefix) {
  const auto& d = in.meta().at("models").at(prefix);
  KnnModel m;
  m.k_ = d.at("k").get<int>();
  m.classes_ = d.at("classes").get<int>();
  m.train_ = in.get_matrix(prefix + "X", d.at("rows").get<Eigen::Index>(), d.at("features").get<Eigen::Index>());
  m.labels_ = in.get_ints(prefix + "y");
  return m;
}

}  // namespace xmb::learn
