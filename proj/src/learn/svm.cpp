#include "xmb/learn/svm.hpp"

#include <numeric>

#include "xmb/error.hpp"
#include "xmb/random.hpp"

namespace xmb::learn {

namespace {

// Pegasos on one binary problem; the bias is coordinate d of the augmented
// weight vector and is regularized with the rest. w = scale * v.
Vector pegasos(const Matrix& xs, const std::vector<double>& target, double lambda, int epochs, Rng& rng) {
  const auto n = xs.rows();
  const auto d = xs.cols();
  Vector v = Vector::Zero(d + 1);
  double scale = 1.0;
  Vector average = Vector::Zero(d + 1);
  int averaged = 0;
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::uint64_t t = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      ++t;
      const auto i = static_cast<Eigen::Index>(idx);
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double margin = scale * (xs.row(i).dot(v.head(d)) + v(d));
      const double shrink = 1.0 - eta * lambda;
      if (shrink <= 0.0) {
        v.setZero();
        scale = 1.0;
      } else {
        scale *= shrink;
        if (scale < 1e-9) {
          v *= scale;
          scale = 1.0;
        }
      }
      if (target[idx] * margin < 1.0) {
        const double c = eta * target[idx] / scale;
        v.head(d) += c * xs.row(i).transpose();
        v(d) += c;
      }
    }
    if (2 * (epoch + 1) > epochs) {
      average += scale * v;
      ++averaged;
    }
  }
  return average / static_cast<double>(averaged);
}

}  // namespace

LinearSvmModel LinearSvmModel::train(const LinearSvmParams& params, const Matrix& x, std::span<const int> y,
                                     int classes, std::uint64_t seed) {
  LinearSvmModel m;
  m.standardizer_ =
      params.standardize ? Standardizer::fit(x) : Standardizer::identity(static_cast<std::size_t>(x.cols()));
  const Matrix xs = m.standardizer_.apply(x);
  const auto d = xs.cols();
  m.weights_.resize(classes, d);
  m.bias_.resize(classes);
  std::vector<double> target(y.size());
  for (int c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < y.size(); ++i) target[i] = y[i] == c ? 1.0 : -1.0;
    Rng rng(derive_seed(seed, "ovr", static_cast<std::uint64_t>(c)));
    Vector w = pegasos(xs, target, params.lambda, params.epochs, rng);
    m.weights_.row(c) = w.head(d).transpose();
    m.bias_(c) = w(d);
  }
  return m;
}

Matrix LinearSvmModel::margins(const Matrix& x) const {
  Matrix out = standardizer_.apply(x) * weights_.transpose();
  out.rowwise() += bias_.transpose();
  return out;
}

Matrix LinearSvmModel::scores(const Matrix& x) const { return softmax_rows(margins(x)); }

void LinearSvmModel::save(ArchiveWriter& out, const std::string& prefix) const {
  out.meta()["models"][prefix] = {{"kind", "linear_svm"}, {"classes", num_classes()}, {"features", num_features()}};
  standardizer_.save(out, prefix);
  out.put(prefix + "W", weights_);
  out.put(prefix + "b", bias_);
}

LinearSvmModel LinearSvmModel::load(const ArchiveReader& in, const std::string& prefix) {
  const auto& d = in.meta().at("models").at(prefix);
  LinearSvmModel m;
  m.standardizer_ = Standardizer::load(in, prefix);
  m.weights_ = in.get_matrix(prefix + "W", d.at("classes").get<Eigen::Index>(), d.at("features").get<Eigen::Index>());
  m.bias_ = in.get_vector(prefix + "b");
  return m;
}

BaggedSvmModel BaggedSvmModel::train(const BaggedSvmParams& params, const Matrix& x, std::span<const int> y,
                                     int classes, std::uint64_t seed) {
  BaggedSvmModel m;
  const auto n = static_cast<std::size_t>(x.rows());
  for (int b = 0; b < params.n_estimators; ++b) {
    Rng rng(derive_seed(seed, "bag", static_cast<std::uint64_t>(b)));
    Matrix xb(x.rows(), x.cols());
    std::vector<int> yb(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(rng.index(n));
      xb.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(j));
      yb[i] = y[j];
    }
    m.members_.push_back(
        LinearSvmModel::train(params.member, xb, yb, classes, derive_seed(seed, "bag-svm", static_cast<std::uint64_t>(b))));
  }
  return m;
}

Matrix BaggedSvmModel::mean_margins(const Matrix& x) const {
  Matrix sum = members_.front().margins(x);
  for (std::size_t i = 1; i < members_.size(); ++i) sum += members_[i].margins(x);
  return sum / static_cast<double>(members_.size());
}

Matrix BaggedSvmModel::scores(const Matrix& x) const { return softmax_rows(mean_margins(x)); }

void BaggedSvmModel::save(ArchiveWriter& out, const std::string& prefix) const {
  out.meta()["models"][prefix] = {{"kind", "bagged_svm"}, {"members", members_.size()}};
  for (std::size_t i = 0; i < members_.size(); ++i) members_[i].save(out, prefix + "m" + std::to_string(i) + ".");
}

BaggedSvmModel BaggedSvmModel::load(const ArchiveReader& in, const std::string& prefix) {
  BaggedSvmModel m;
  const auto count = in.meta().at("models").at(prefix).at("members").get<std::size_t>();
  for (std::size_t i = 0; i < count; ++i)
    m.members_.push_back(LinearSvmModel::load(in, prefix + "m" + std::to_string(i) + "."));
  return m;
}

}  // namespace xmb::learn
