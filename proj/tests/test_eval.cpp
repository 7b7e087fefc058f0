#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "xmb/error.hpp"
#include "xmb/metrics.hpp"

using namespace xmb;
using namespace xmb::eval;

namespace {

ConfusionMatrix from_rows(std::array<std::array<std::size_t, 3>, 3> rows) {
  ConfusionMatrix cm;
  cm.counts = rows;
  return cm;
}

Matrix one_column(const std::vector<double>& s, int c) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(s.size()), 3);
  for (std::size_t i = 0; i < s.size(); ++i) m(static_cast<Eigen::Index>(i), c) = s[i];
  return m;
}

Matrix random_scores(std::size_t n, std::mt19937_64& eng, bool coarse) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(static_cast<Eigen::Index>(n), 3);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (int c = 0; c < 3; ++c) m(i, c) = coarse ? std::floor(u(eng) * 4) / 4 : u(eng);
  return m;
}

}  // namespace

TEST_CASE("confusion counts") {
  const std::vector<int> t = {0, 0, 1}, p = {0, 1, 1};
  const auto cm = confusion(t, p);
  CHECK(cm == from_rows({{{1, 1, 0}, {0, 1, 0}, {0, 0, 0}}}));
  CHECK(cm.total() == 3);
  CHECK(cm.trace() == 2);
  CHECK(cm.row_sum(0) == 2);
  CHECK(cm.col_sum(1) == 2);

  std::vector<int> perfect;
  for (int c = 0; c < 3; ++c) perfect.insert(perfect.end(), 280, c);
  const auto diag = confusion(perfect, perfect);
  for (int c = 0; c < 3; ++c) CHECK(diag.counts[c][c] == 280);

  CHECK_THROWS_AS(confusion(std::vector<int>{0, 1}, std::vector<int>{0}), DataError);
  CHECK_THROWS_AS(confusion(std::vector<int>{}, std::vector<int>{}), DataError);
  CHECK_THROWS_AS(confusion(std::vector<int>{3}, std::vector<int>{0}), DataError);
}

TEST_CASE("summaries") {
  const auto s = summarize(from_rows({{{2, 1, 0}, {0, 3, 0}, {0, 0, 3}}}));
  CHECK(s.accuracy == 8.0 / 9.0);
  CHECK(s.per_class[0].precision == 1.0);
  CHECK(s.per_class[0].recall == 2.0 / 3.0);
  CHECK(s.per_class[0].f1 == 0.8);
  CHECK(s.per_class[1].precision == 0.75);
  CHECK(s.per_class[0].support == 3);
  CHECK(s.macro_recall == doctest::Approx((2.0 / 3.0 + 1.0 + 1.0) / 3.0).epsilon(1e-15));
  CHECK(!s.zero_division);

  const auto id = summarize(from_rows({{{4, 0, 0}, {0, 4, 0}, {0, 0, 4}}}));
  CHECK(id.accuracy == 1.0);
  CHECK(id.macro_precision == 1.0);
  CHECK(id.macro_recall == 1.0);
  CHECK(id.macro_f1 == 1.0);

  // class 2 is never predicted
  const auto z = summarize(from_rows({{{3, 0, 0}, {0, 3, 0}, {1, 2, 0}}}));
  CHECK(z.per_class[2].precision == 0.0);
  CHECK(z.per_class[2].f1 == 0.0);
  CHECK(z.per_class[2].zero_division);
  CHECK(z.zero_division);

  // equal supports: accuracy is the mean recall
  const auto b = summarize(from_rows({{{5, 2, 3}, {1, 8, 1}, {0, 4, 6}}}));
  CHECK(b.accuracy == doctest::Approx(b.macro_recall).epsilon(1e-15));
}

TEST_CASE("roc fixed cases") {
  const std::vector<int> y = {1, 1, 0, 0};
  const auto perfect = roc_ovr(y, one_column({0.9, 0.8, 0.2, 0.1}, 1), 1);
  REQUIRE(perfect.size() == 5);  // origin plus four distinct scores
  CHECK(perfect.front().fpr == 0.0);
  CHECK(perfect.front().tpr == 0.0);
  CHECK(std::isinf(perfect.front().threshold));
  CHECK(perfect[2].fpr == 0.0);
  CHECK(perfect[2].tpr == 1.0);
  CHECK(perfect.back().fpr == 1.0);
  CHECK(auc(perfect) == 1.0);

  const auto flat = roc_ovr(y, one_column({0.5, 0.5, 0.5, 0.5}, 1), 1);
  REQUIRE(flat.size() == 2);
  CHECK(flat[1].fpr == 1.0);
  CHECK(flat[1].tpr == 1.0);
  CHECK(auc(flat) == 0.5);

  CHECK_THROWS_AS(roc_ovr(y, one_column({0.1, 0.2, 0.3, 0.4}, 2), 2), DataError);
  CHECK_THROWS_AS(roc_ovr(std::vector<int>{1, 1}, one_column({0.1, 0.2}, 1), 1), DataError);
}

TEST_CASE("roc equals exhaustive threshold enumeration") {
  std::mt19937_64 eng(12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> y(12);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 3);
    std::shuffle(y.begin(), y.end(), eng);
    const Matrix s = random_scores(12, eng, trial % 2 == 1);
    for (int c = 0; c < 3; ++c) {
      std::vector<double> col(12);
      for (Eigen::Index i = 0; i < 12; ++i) col[static_cast<std::size_t>(i)] = s(i, c);
      const auto expect = fixture::oracle::brute_force_roc(y, col, c);
      const auto got = roc_ovr(y, s, c);
      REQUIRE(got.size() == expect.size());
      for (std::size_t k = 0; k < got.size(); ++k) {
        CHECK(got[k].fpr == doctest::Approx(expect[k].first).epsilon(1e-15));
        CHECK(got[k].tpr == doctest::Approx(expect[k].second).epsilon(1e-15));
        if (k > 0) {
          CHECK(got[k].fpr >= got[k - 1].fpr);
          CHECK(got[k].tpr >= got[k - 1].tpr);
          CHECK(got[k].threshold < got[k - 1].threshold);
        }
      }
      CHECK(got.back().fpr == 1.0);
      CHECK(got.back().tpr == 1.0);
      CHECK(std::abs(auc(got) - fixture::oracle::pairwise_auc(y, col, c)) < 1e-12);
    }
  }
}

TEST_CASE("evaluate is invariant under joint permutation") {
  std::mt19937_64 eng(4);
  std::vector<int> y(30), p(30);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = static_cast<int>(i % 3);
    p[i] = static_cast<int>((i * 7 + i / 4) % 3);
  }
  const Matrix s = random_scores(30, eng, true);
  const auto base = evaluate(y, p, s);

  std::vector<std::size_t> perm(30);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), eng);
  std::vector<int> y2(30), p2(30);
  Matrix s2(30, 3);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    y2[i] = y[perm[i]];
    p2[i] = p[perm[i]];
    s2.row(static_cast<Eigen::Index>(i)) = s.row(static_cast<Eigen::Index>(perm[i]));
  }
  const auto moved = evaluate(y2, p2, s2);
  CHECK(moved.to_json() == base.to_json());
  CHECK(base.roc.size() == 3);
  CHECK(base.summary.accuracy == static_cast<double>(base.confusion.trace()) / 30.0);
  CHECK(base.to_json()["averaging"] == "macro");

  // a class with no test rows has no ROC
  std::vector<int> two(30);
  for (std::size_t i = 0; i < two.size(); ++i) two[i] = static_cast<int>(i % 2);
  CHECK(evaluate(two, p, s).roc.size() == 2);
}

TEST_CASE("csv round trips") {
  const auto cm = from_rows({{{210, 40, 30}, {20, 242, 18}, {14, 20, 246}}});
  const auto text = confusion_csv(cm);
  CHECK(text.rfind("true,negative,positive,neutral\n", 0) == 0);
  CHECK(parse_confusion_csv(text) == cm);
  CHECK_THROWS_AS(parse_confusion_csv("true,negative\n"), DataError);

  std::mt19937_64 eng(8);
  std::vector<int> y(20);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 3);
  const auto report = evaluate(y, y, random_scores(20, eng, false));
  const auto rtext = roc_csv(report.roc);
  CHECK(rtext.rfind("class,fpr,tpr,threshold\n", 0) == 0);
  const auto back = parse_roc_csv(rtext);
  REQUIRE(back.size() == report.roc.size());
  for (std::size_t c = 0; c < back.size(); ++c) {
    CHECK(back[c].label == report.roc[c].label);
    REQUIRE(back[c].points.size() == report.roc[c].points.size());
    for (std::size_t k = 0; k < back[c].points.size(); ++k) {
      CHECK(back[c].points[k].fpr == report.roc[c].points[k].fpr);
      CHECK(back[c].points[k].tpr == report.roc[c].points[k].tpr);
      CHECK(back[c].points[k].threshold == report.roc[c].points[k].threshold);
    }
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(0.8) == "0.8");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
