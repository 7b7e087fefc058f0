#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "xmb/error.hpp"
#include "xmb/pca.hpp"
#include "xmb/random.hpp"
#include "xmb/tsne.hpp"

using namespace xmb;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal() * (1.0 + 0.7 * static_cast<double>(j)) + 2.0;
  return m;
}

}  // namespace

TEST_CASE("collinear points give one component") {
  Matrix x(3, 2);
  x << 1, 1, 2, 2, 3, 3;
  const auto m = fit_pca(x, VarianceFraction{0.95});
  REQUIRE(m.output_dim() == 1);
  CHECK(std::abs(m.components(0, 0)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::abs(m.components(0, 1)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(m.explained_ratio(0) == doctest::Approx(1.0).epsilon(1e-12));
  Matrix p(1, 2);
  p << 2, 2;
  CHECK(std::abs(transform_pca(m, p)(0, 0)) < 1e-12);
  // sign rule: the largest-magnitude entry is positive
  CHECK(m.components(0, 0) > 0);
}

TEST_CASE("variance fraction 1.0 on full-rank data keeps min(n-1, d)") {
  CHECK(fit_pca(random_matrix(20, 6, 1), VarianceFraction{1.0}).output_dim() == 6);
  CHECK(fit_pca(random_matrix(5, 8, 2), VarianceFraction{1.0}).output_dim() == 4);
}

TEST_CASE("20x6 fixture against the Jacobi oracle") {
  const Matrix x = random_matrix(20, 6, 3);
  const auto m = fit_pca(x, ComponentCount{6});
  const auto [values, vectors] = fixture::oracle::jacobi_eigen(fixture::oracle::covariance(x));
  for (Eigen::Index k = 0; k < 6; ++k) {
    CHECK(std::abs(m.explained_variance(k) - values(k)) < 1e-8);
    const Vector c = m.components.row(k).transpose();
    const double sign = c.dot(vectors.col(k)) < 0 ? -1.0 : 1.0;
    CHECK((c - sign * vectors.col(k)).cwiseAbs().maxCoeff() < 1e-8);
  }
  // projection equals the direct formula with the oracle basis (signs aligned)
  const Matrix z = transform_pca(m, x);
  const RowVector mean = x.colwise().mean();
  for (Eigen::Index k = 0; k < 6; ++k) {
    const double sign = m.components.row(k).dot(vectors.col(k).transpose()) < 0 ? -1.0 : 1.0;
    const Vector direct = (x.rowwise() - mean) * (sign * vectors.col(k));
    CHECK((z.col(k) - direct).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("model invariants") {
  const Matrix x = random_matrix(30, 9, 4);
  const auto m = fit_pca(x, VarianceFraction{0.9});
  const auto k = static_cast<Eigen::Index>(m.output_dim());
  CHECK((m.components * m.components.transpose() - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-8);
  for (Eigen::Index i = 1; i < k; ++i) CHECK(m.explained_variance(i) <= m.explained_variance(i - 1));
  CHECK(m.explained_ratio.sum() <= 1.0 + 1e-12);
  CHECK(m.explained_ratio.sum() >= 0.9 - 1e-12);
  if (k > 1) CHECK(m.explained_ratio.head(k - 1).sum() < 0.9);
  // column variances of the projected training data equal explained_variance
  const Matrix z = transform_pca(m, x);
  for (Eigen::Index c = 0; c < k; ++c) {
    const double var = (z.col(c).array() - z.col(c).mean()).square().sum() / static_cast<double>(x.rows() - 1);
    CHECK(std::abs(var - m.explained_variance(c)) < 1e-8);
  }
  // the mean maps to zero, and zero maps back to the mean
  CHECK(transform_pca(m, Matrix(m.mean)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((inverse_pca(m, Matrix::Zero(1, k)) - Matrix(m.mean)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("reconstruction error equals the discarded variance") {
  const Matrix x = random_matrix(25, 7, 5);
  const auto full = fit_pca(x, ComponentCount{7});
  const Matrix back_full = inverse_pca(full, transform_pca(full, x));
  CHECK((back_full - x).norm() / x.norm() < 1e-6);
  const auto part = fit_pca(x, ComponentCount{3});
  const Matrix back = inverse_pca(part, transform_pca(part, x));
  const double discarded = full.explained_variance.tail(4).sum();
  // sample covariance uses n - 1, so the total squared error is (n - 1) * discarded
  CHECK(std::abs((back - x).squaredNorm() - 24.0 * discarded) < 1e-8);
}

TEST_CASE("pca errors") {
  CHECK_THROWS_WITH_AS(fit_pca(Matrix::Constant(5, 3, 2.0), VarianceFraction{0.9}), "degenerate covariance", DataError);
  CHECK_THROWS_AS(fit_pca(random_matrix(1, 3, 6), ComponentCount{1}), DataError);
  CHECK_THROWS_AS(fit_pca(random_matrix(10, 3, 6), ComponentCount{4}), ConfigError);
  CHECK_THROWS_AS(fit_pca(random_matrix(10, 3, 6), VarianceFraction{0.0}), ConfigError);
  const auto m = fit_pca(random_matrix(10, 3, 6), ComponentCount{2});
  CHECK_THROWS_AS(transform_pca(m, random_matrix(2, 4, 7)), DataError);
  CHECK_THROWS_AS(inverse_pca(m, random_matrix(2, 3, 7)), DataError);
}

TEST_CASE("pca save and load") {
  const auto dir = fixture::temp_dir("pca");
  const Matrix x = random_matrix(15, 4, 8);
  const auto m = fit_pca(x, ComponentCount{3});
  save_pca(m, dir / "model");
  const auto back = load_pca(dir / "model");
  CHECK(back.output_dim() == 3);
  CHECK((back.components - m.components).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((transform_pca(back, x) - transform_pca(m, x)).cwiseAbs().maxCoeff() < 1e-4);
  std::filesystem::remove_all(dir);
}

TEST_CASE("t-SNE affinities") {
  const auto data = fixture::tsne_fixture();
  const auto a = conditional_affinities(data.x, 10.0);
  for (std::size_t i = 0; i < a.entropy.size(); ++i) CHECK(std::abs(a.entropy[i] - std::log2(10.0)) < 1e-4);
  for (Eigen::Index i = 0; i < a.conditional.rows(); ++i) {
    CHECK(a.conditional(i, i) == 0.0);
    CHECK(a.conditional.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  const Matrix p = joint_affinities(a.conditional);
  CHECK((p - p.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-9));

  const Matrix same = Matrix::Constant(8, 3, 1.5);
  const auto u = conditional_affinities(same, 2.0);
  for (Eigen::Index i = 0; i < 8; ++i)
    for (Eigen::Index j = 0; j < 8; ++j)
      if (i != j) CHECK(u.conditional(i, j) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("t-SNE embedding") {
  const auto data = fixture::tsne_fixture();
  TsneConfig cfg;
  cfg.perplexity = 10.0;
  cfg.seed = 1;
  const auto r = tsne_embed(data.x, cfg);
  CHECK(r.coords.rows() == 60);
  CHECK(r.coords.cols() == 2);
  CHECK(r.kl >= 0.0);
  CHECK(r.kl == doctest::Approx(kl_divergence(r.joint, r.coords)).epsilon(1e-12));
  CHECK((r.joint - r.joint.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fixture::oracle::silhouette(r.coords, data.y) > 0.5);
  REQUIRE(!r.kl_trace.empty());
  CHECK(r.kl_trace.back().first == 1000);
  const auto again = tsne_embed(data.x, cfg);
  CHECK(again.coords == r.coords);
}

TEST_CASE("t-SNE configuration limits") {
  TsneConfig cfg;
  CHECK_THROWS_AS(cfg.validate(60), ConfigError);  // perplexity 30 >= 59/3
  cfg.perplexity = 10;
  CHECK_NOTHROW(cfg.validate(60));
  cfg.iterations = 100;
  CHECK_THROWS_AS(cfg.validate(60), ConfigError);
  CHECK_THROWS_AS(tsne_embed(Matrix::Zero(3, 2), TsneConfig{}), DataError);
}
