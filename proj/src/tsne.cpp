#include "xmb/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xmb/error.hpp"
#include "xmb/random.hpp"

namespace xmb {

void TsneConfig::validate(std::size_t n) const {
  if (n < 4) throw DataError("t-SNE needs at least 4 points");
  if (!(perplexity > 0.0)) throw ConfigError("perplexity must be positive");
  if (!(perplexity < (static_cast<double>(n) - 1.0) / 3.0))
    throw ConfigError("perplexity too large for " + std::to_string(n) + " points (must be < (n-1)/3)");
  if (iterations < 250) throw ConfigError("t-SNE needs at least 250 iterations");
  if (!(learning_rate > 0.0) || !(early_exaggeration > 0.0)) throw ConfigError("t-SNE rates must be positive");
}

namespace {

Matrix squared_distances(const Matrix& x) {
  const auto n = x.rows();
  Vector sq = x.rowwise().squaredNorm();
  Matrix d = (-2.0 * x * x.transpose()).eval();
  d.colwise() += sq;
  d.rowwise() += sq.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = std::max(0.0, d(i, j));
  }
  return d;
}

}  // namespace

Affinities conditional_affinities(const Matrix& x, double perplexity, double tolerance, int max_steps) {
  const auto n = x.rows();
  const Matrix dist = squared_distances(x);
  const double target = std::log2(perplexity);
  Affinities a;
  a.conditional = Matrix::Zero(n, n);
  a.entropy.resize(static_cast<std::size_t>(n));
  a.beta.resize(static_cast<std::size_t>(n));
  std::vector<double> row(static_cast<std::size_t>(n));

  for (Eigen::Index i = 0; i < n; ++i) {
    double dmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) dmin = std::min(dmin, dist(i, j));

    auto evaluate = [&](double beta) {
      double sum = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        row[jj] = (j == i) ? 0.0 : std::exp(-beta * (dist(i, j) - dmin));
        sum += row[jj];
      }
      double h = 0.0;  // entropy in nats
      for (Eigen::Index j = 0; j < n; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        row[jj] /= sum;
        if (row[jj] > 0.0) h -= row[jj] * std::log(row[jj]);
      }
      return h / std::log(2.0);
    };

    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double h = evaluate(beta);
    for (int step = 0; step < max_steps && std::abs(h - target) > tolerance; ++step) {
      // Entropy falls as beta grows.
      if (h > target) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
      h = evaluate(beta);
    }
    for (Eigen::Index j = 0; j < n; ++j) a.conditional(i, j) = row[static_cast<std::size_t>(j)];
    a.entropy[static_cast<std::size_t>(i)] = h;
    a.beta[static_cast<std::size_t>(i)] = beta;
  }
  return a;
}

Matrix joint_affinities(const Matrix& conditional) {
  const auto n = conditional.rows();
  Matrix p(n, n);
  const double denom = 2.0 * static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      p(i, j) = (i == j) ? 0.0 : std::max((conditional(i, j) + conditional(j, i)) / denom, 1e-12);
  return p;
}

double kl_divergence(const Matrix& joint, const Matrix& coords) {
  const auto n = coords.rows();
  Matrix num(n, n);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      num(i, j) = (i == j) ? 0.0 : 1.0 / (1.0 + (coords.row(i) - coords.row(j)).squaredNorm());
      sum += num(i, j);
    }
  double kl = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double q = std::max(num(i, j) / sum, 1e-300);
      kl += joint(i, j) * std::log(joint(i, j) / q);
    }
  return kl;
}

TsneResult tsne_embed(const Matrix& x, const TsneConfig& config) {
  const auto n = x.rows();
  config.validate(static_cast<std::size_t>(n));
  if (!x.allFinite()) throw DataError("t-SNE input contains non-finite values");

  TsneResult result;
  result.joint = joint_affinities(conditional_affinities(x, config.perplexity).conditional);
  const Matrix& p = result.joint;

  Rng rng(config.seed);
  Matrix y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < 2; ++c) y(i, c) = config.init_sigma * rng.normal();

  Matrix update = Matrix::Zero(n, 2);
  Matrix gains = Matrix::Ones(n, 2);
  Matrix grad(n, 2);
  Matrix num(n, n);

  for (int iter = 0; iter < config.iterations; ++iter) {
    const bool early = iter < config.exaggeration_iterations;
    const double exaggeration = early ? config.early_exaggeration : 1.0;
    const double momentum = early ? config.initial_momentum : config.final_momentum;

    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      num(i, i) = 0.0;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double dx = y(i, 0) - y(j, 0);
        const double dy = y(i, 1) - y(j, 1);
        const double v = 1.0 / (1.0 + dx * dx + dy * dy);
        num(i, j) = v;
        num(j, i) = v;
        sum += 2.0 * v;
      }
    }
    grad.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      double gx = 0.0, gy = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const double w = (exaggeration * p(i, j) - num(i, j) / sum) * num(i, j);
        gx += w * (y(i, 0) - y(j, 0));
        gy += w * (y(i, 1) - y(j, 1));
      }
      grad(i, 0) = 4.0 * gx;
      grad(i, 1) = 4.0 * gy;
    }
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index c = 0; c < 2; ++c) {
        const bool same_sign = (grad(i, c) > 0.0) == (update(i, c) > 0.0);
        gains(i, c) = same_sign ? std::max(gains(i, c) * 0.8, 0.01) : gains(i, c) + 0.2;
        update(i, c) = momentum * update(i, c) - config.learning_rate * gains(i, c) * grad(i, c);
        y(i, c) += update(i, c);
      }
    y.rowwise() -= y.colwise().mean();

    const int done = iter + 1;
    if (done % 50 == 0 || done == config.iterations) result.kl_trace.emplace_back(done, kl_divergence(p, y));
  }
  result.kl = result.kl_trace.back().second;
  result.coords = std::move(y);
  return result;
}

}  // namespace xmb
