#include "xmb/learn/logreg.hpp"

#include <cmath>
#include <deque>

#include "xmb/error.hpp"

namespace xmb::learn {

double logreg_objective(const Matrix& x, std::span<const int> y, int classes, const Vector& theta, double lambda,
                        Vector* gradient) {
  const auto n = x.rows();
  const auto d = x.cols();
  const auto k = static_cast<Eigen::Index>(classes);
  if (theta.size() != k * d + k) throw DataError("logreg parameter vector has wrong size");
  Eigen::Map<const Matrix> w(theta.data(), k, d);
  Eigen::Map<const Vector> b(theta.data() + k * d, k);

  Matrix logits = x * w.transpose();
  logits.rowwise() += b.transpose();
  double loss = 0.0;
  Matrix resid(n, k);  // p - onehot
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = logits.row(i).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) sum += std::exp(logits(i, c) - m);
    const double lse = m + std::log(sum);
    const auto yi = static_cast<Eigen::Index>(y[static_cast<std::size_t>(i)]);
    loss += lse - logits(i, yi);
    for (Eigen::Index c = 0; c < k; ++c) resid(i, c) = std::exp(logits(i, c) - lse);
    resid(i, yi) -= 1.0;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  loss = loss * inv_n + 0.5 * lambda * w.squaredNorm();
  if (gradient) {
    gradient->resize(theta.size());
    Eigen::Map<Matrix> gw(gradient->data(), k, d);
    Eigen::Map<Vector> gb(gradient->data() + k * d, k);
    gw = inv_n * (resid.transpose() * x) + lambda * w;
    gb = inv_n * resid.colwise().sum().transpose();
  }
  return loss;
}

LogRegModel LogRegModel::zero(std::size_t features, std::size_t classes) {
  LogRegModel m;
  m.standardizer_ = Standardizer::identity(features);
  m.weights_ = Matrix::Zero(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(features));
  m.bias_ = Vector::Zero(static_cast<Eigen::Index>(classes));
  return m;
}

LogRegModel LogRegModel::train(const LogRegParams& params, const Matrix& x, std::span<const int> y, int classes) {
  LogRegModel m;
  m.standardizer_ = params.standardize ? Standardizer::fit(x) : Standardizer::identity(static_cast<std::size_t>(x.cols()));
  const Matrix xs = m.standardizer_.apply(x);
  const auto d = xs.cols();
  const auto k = static_cast<Eigen::Index>(classes);

  Vector theta = Vector::Zero(k * d + k);
  Vector grad;
  double f = logreg_objective(xs, y, classes, theta, params.lambda, &grad);
  std::deque<std::pair<Vector, Vector>> history;  // (s, y) pairs, newest last
  int it = 0;
  for (; it < params.max_epochs; ++it) {
    if (grad.cwiseAbs().maxCoeff() < params.tolerance) break;

    // Two-loop recursion.
    Vector q = grad;
    std::vector<double> alpha(history.size());
    for (std::size_t j = history.size(); j-- > 0;) {
      const auto& [s, yv] = history[j];
      alpha[j] = s.dot(q) / yv.dot(s);
      q -= alpha[j] * yv;
    }
    if (!history.empty()) {
      const auto& [s, yv] = history.back();
      q *= s.dot(yv) / yv.squaredNorm();
    } else {
      q /= std::max(1.0, grad.norm());
    }
    for (std::size_t j = 0; j < history.size(); ++j) {
      const auto& [s, yv] = history[j];
      const double beta = yv.dot(q) / yv.dot(s);
      q += (alpha[j] - beta) * s;
    }
    Vector dir = -q;
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {
      history.clear();
      dir = -grad / std::max(1.0, grad.norm());
      slope = grad.dot(dir);
    }

    double step = 1.0;
    Vector next, next_grad;
    double next_f = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      next = theta + step * dir;
      next_f = logreg_objective(xs, y, classes, next, params.lambda, &next_grad);
      if (next_f <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    Vector s = next - theta;
    Vector yv = next_grad - grad;
    if (s.dot(yv) > 1e-12 * yv.squaredNorm()) {
      history.emplace_back(std::move(s), std::move(yv));
      if (static_cast<int>(history.size()) > params.memory) history.pop_front();
    }
    theta = std::move(next);
    grad = std::move(next_grad);
    f = next_f;
  }

  m.iterations_ = it;
  m.grad_norm_ = grad.cwiseAbs().maxCoeff();
  m.weights_ = Eigen::Map<const Matrix>(theta.data(), k, d);
  m.bias_ = theta.tail(k);
  return m;
}

Matrix LogRegModel::scores(const Matrix& x) const {
  Matrix logits = standardizer_.apply(x) * weights_.transpose();
  logits.rowwise() += bias_.transpose();
  return softmax_rows(logits);
}

void LogRegModel::save(ArchiveWriter& out, const std::string& prefix) const {
  out.meta()["models"][prefix] = {{"kind", "logreg"}, {"classes", num_classes()}, {"features", num_features()}};
  standardizer_.save(out, prefix);
  out.put(prefix + "W", weights_);
  out.put(prefix + "b", bias_);
}

LogRegModel LogRegModel::load(const ArchiveReader& in, const std::string& prefix) {
  const auto& d = in.meta().at("models").at(prefix);
  const auto k = d.at("classes").get<Eigen::Index>();
  const auto f = d.at("features").get<Eigen::Index>();
  LogRegModel m;
  m.standardizer_ = Standardizer::load(in, prefix);
  m.weights_ = in.get_matrix(prefix + "W", k, f);
  m.bias_ = in.get_vector(prefix + "b");
  return m;
}

}  // namespace xmb::learn
