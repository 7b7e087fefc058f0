#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "fixtures.hpp"
#include "xmb/config.hpp"
#include "xmb/error.hpp"
#include "xmb/learn/classifier.hpp"
#include "xmb/learn/ensemble.hpp"
#include "xmb/learn/gbdt.hpp"
#include "xmb/learn/knn.hpp"
#include "xmb/learn/logreg.hpp"
#include "xmb/learn/tree.hpp"
#include "xmb/random.hpp"

using namespace xmb;
using namespace xmb::learn;

namespace {

// Small and quick versions of every default spec.
std::vector<ClassifierSpec> quick_specs() {
  auto specs = default_classifier_specs();
  for (auto& s : specs) {
    if (s.kind == ClassifierKind::RandomForest) s.hyperparameters["n_trees"] = "15";
    if (s.kind == ClassifierKind::GBDT) s.hyperparameters["rounds"] = "15";
    if (s.kind == ClassifierKind::BaggedSVM) s.hyperparameters["n_estimators"] = "5";
    for (auto& m : s.members) {
      if (m.kind == ClassifierKind::RandomForest) m.hyperparameters["n_trees"] = "15";
      if (m.kind == ClassifierKind::GBDT) m.hyperparameters["rounds"] = "15";
    }
    s.seed = 5;
  }
  return specs;
}

double gini(const std::vector<int>& y, const std::vector<std::size_t>& rows) {
  if (rows.empty()) return 0.0;
  double c[3] = {0, 0, 0};
  for (auto r : rows) c[y[r]] += 1;
  double g = 1.0;
  for (double v : c) g -= (v / static_cast<double>(rows.size())) * (v / static_cast<double>(rows.size()));
  return g;
}

}  // namespace

TEST_CASE("every kind predicts argmax of probability rows and reloads bit-identically") {
  const auto data = fixture::blobs(120, 4, 5, 2);
  const auto dir = fixture::temp_dir("learn-save");
  for (const auto& spec : quick_specs()) {
    CAPTURE(spec.name);
    const auto clf = fit(spec, data.x, data.y);
    const Matrix s = clf.predict_scores(data.x);
    REQUIRE(s.cols() == 3);
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      CHECK(s.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(s.row(i).minCoeff() >= 0.0);
    }
    const auto pred = clf.predict(data.x);
    const auto arg = argmax_rows(s);
    for (std::size_t i = 0; i < pred.size(); ++i) CHECK(pred[i] == clf.label_codes()[static_cast<std::size_t>(arg[i])]);

    const auto base = dir / spec.name;
    clf.save(base);
    const auto back = TrainedClassifier::load(base);
    CHECK(back.spec().name == spec.name);
    CHECK(back.label_codes() == clf.label_codes());
    CHECK(back.predict_scores(data.x) == s);
    CHECK(back.predict(data.x) == pred);

    // training is deterministic for a fixed seed
    CHECK(fit(spec, data.x, data.y).predict_scores(data.x) == s);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("label codes follow the training labels") {
  auto data = fixture::blobs(60, 3, 6, 3);
  for (auto& v : data.y)
    if (v == 1) v = 2;
  ClassifierSpec spec;
  spec.name = "LR";
  const auto clf = fit(spec, data.x, data.y);
  CHECK(clf.label_codes() == std::vector<int>{0, 2});
  CHECK(clf.predict_scores(data.x).cols() == 2);
  for (int p : clf.predict(data.x)) CHECK((p == 0 || p == 2));
}

TEST_CASE("fit input errors") {
  auto data = fixture::blobs(30, 3, 5, 4);
  ClassifierSpec spec;
  spec.name = "LR";
  data.x(7, 2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(fit(spec, data.x, data.y), "non-finite feature at row 7, column 2", DataError);
  data.x(7, 2) = 0.0;
  std::vector<int> one(30, 1);
  CHECK_THROWS_AS(fit(spec, data.x, one), DataError);
  std::vector<int> short_labels(data.y.begin(), data.y.begin() + 10);
  CHECK_THROWS_AS(fit(spec, data.x, short_labels), DataError);
  CHECK_THROWS_AS(fit(spec, data.x.topRows(1), std::vector<int>{0}), DataError);

  const auto clf = fit(spec, data.x, data.y);
  CHECK_THROWS_AS(clf.predict(Matrix::Zero(2, 4)), DataError);

  spec.hyperparameters["lambda"] = "-1";
  CHECK_THROWS_AS(fit(spec, data.x, data.y), ConfigError);
}

TEST_CASE("knn ties fall to the class of the nearest neighbour") {
  Matrix x(2, 1);
  x << 0.0, 2.0;
  const std::vector<int> y = {0, 1};
  const auto m = KnnModel::train(2, x, y, 2);
  Matrix q(3, 1);
  q << 1.0, 1.2, 0.9;
  const auto pred = argmax_rows(m.scores(q));
  CHECK(pred[0] == 0);  // equal distance: lower training index
  CHECK(pred[1] == 1);
  CHECK(pred[2] == 0);
  const Matrix s = m.scores(q);
  CHECK(s(0, 0) == doctest::Approx((1 + 1e-3) / (2 + 1e-3)).epsilon(1e-15));
  CHECK(s(0, 1) == doctest::Approx(1 / (2 + 1e-3)).epsilon(1e-15));

  // three-way tie among three classes
  Matrix x3(3, 1);
  x3 << 5.0, 1.0, 3.0;
  const auto m3 = KnnModel::train(3, x3, std::vector<int>{2, 0, 1}, 3);
  Matrix q3(1, 1);
  q3 << 3.9;
  CHECK(argmax_rows(m3.scores(q3))[0] == 1);
}

TEST_CASE("split threshold lies in [lo, hi)") {
  CHECK(split_threshold(1.0, 3.0) == 2.0);
  const double lo = 1.0;
  const double hi = std::nextafter(1.0, 2.0);
  const double t = split_threshold(lo, hi);
  CHECK(t >= lo);
  CHECK(t < hi);
  CHECK(split_threshold(-1e300, 1e300) < 1e300);
}

TEST_CASE("decision tree root split matches an exhaustive gini search") {
  const auto data = fixture::blobs(45, 3, 1.5, 5);
  std::vector<std::size_t> all(45);
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  double best = std::numeric_limits<double>::infinity();
  int best_f = -1;
  double best_t = 0.0;
  for (int f = 0; f < 3; ++f) {
    std::set<double> values;
    for (auto r : all) values.insert(data.x(static_cast<Eigen::Index>(r), f));
    std::vector<double> v(values.begin(), values.end());
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      const double t = split_threshold(v[k], v[k + 1]);
      std::vector<std::size_t> l, r;
      for (auto i : all) (data.x(static_cast<Eigen::Index>(i), f) <= t ? l : r).push_back(i);
      if (l.size() < 2 || r.size() < 2) continue;
      const double w = (static_cast<double>(l.size()) * gini(data.y, l) + static_cast<double>(r.size()) * gini(data.y, r)) / 45.0;
      if (w < best - 1e-12) {
        best = w;
        best_f = f;
        best_t = t;
      }
    }
  }
  const auto dt = DecisionTreeModel::train(CartParams{}, data.x, data.y, 3);
  const auto& root = dt.tree().nodes().front();
  CHECK(root.feature == best_f);
  CHECK(root.threshold == best_t);

  // a pure fixture gives one split and pure leaves
  Matrix x(4, 1);
  x << 1, 2, 3, 4;
  CartParams p;
  p.min_samples_leaf = 1;
  const auto small = DecisionTreeModel::train(p, x, std::vector<int>{0, 0, 1, 1}, 2);
  CHECK(small.tree().leaf_count() == 2);
  CHECK(small.tree().nodes().front().threshold == 2.5);
}

TEST_CASE("a forest of one unbootstrapped full-feature tree is the decision tree") {
  const auto data = fixture::blobs(90, 4, 2, 6);
  ForestParams fp;
  fp.n_trees = 1;
  fp.bootstrap = false;
  fp.tree.max_features = 4;
  const auto rf = RandomForestModel::train(fp, data.x, data.y, 3, 11);
  const auto dt = DecisionTreeModel::train(fp.tree, data.x, data.y, 3);
  const auto& a = rf.trees().front().nodes();
  const auto& b = dt.tree().nodes();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].feature == b[i].feature);
    CHECK(a[i].threshold == b[i].threshold);
  }
  CHECK(argmax_rows(rf.scores(data.x)) == argmax_rows(dt.scores(data.x)));
}

TEST_CASE("voting combines member scores") {
  const auto data = fixture::blobs(60, 3, 2, 7);
  std::vector<int> idx = data.y;
  auto lr = std::make_shared<LogRegModel>(LogRegModel::train(LogRegParams{}, data.x, idx, 3));
  auto knn = std::make_shared<KnnModel>(KnnModel::train(5, data.x, idx, 3));
  auto dt = std::make_shared<DecisionTreeModel>(DecisionTreeModel::train(CartParams{}, data.x, idx, 3));
  const std::vector<std::shared_ptr<const Model>> members = {lr, knn, dt};

  const VotingModel soft(VotingMode::Soft, members);
  const Matrix mean = (lr->scores(data.x) + knn->scores(data.x) + dt->scores(data.x)) / 3.0;
  CHECK((soft.scores(data.x) - mean).cwiseAbs().maxCoeff() < 1e-15);

  const VotingModel hard(VotingMode::Hard, members);
  const Matrix hs = hard.scores(data.x);
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    double votes[3] = {0, 0, 0};
    for (const auto& m : members) votes[argmax_rows(m->scores(data.x.row(i)))[0]] += 1;
    for (int c = 0; c < 3; ++c)
      CHECK(hs(i, c) == doctest::Approx((votes[c] + 1e-3 * mean(i, c)) / (3 + 1e-3)).epsilon(1e-12));
  }
  CHECK_THROWS(VotingModel(VotingMode::Soft, {}));

  auto nested = default_voting_spec();
  nested.members.push_back(default_voting_spec());
  CHECK_THROWS_AS(nested.validate(), ConfigError);
}

TEST_CASE("logistic regression objective and convergence") {
  const auto data = fixture::blobs(60, 3, 2, 8);
  Vector theta = Vector::Zero(3 * 3 + 3);
  Vector grad;
  CHECK(logreg_objective(data.x, data.y, 3, theta, 0.0, &grad) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  // central differences at a random point
  Rng rng(3);
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = rng.normal();
  logreg_objective(data.x, data.y, 3, theta, 0.1, &grad);
  Vector numeric(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Vector a = theta, b = theta;
    a(i) += 1e-6;
    b(i) -= 1e-6;
    numeric(i) = (logreg_objective(data.x, data.y, 3, a, 0.1, nullptr) - logreg_objective(data.x, data.y, 3, b, 0.1, nullptr)) / 2e-6;
  }
  CHECK((numeric - grad).norm() / grad.norm() < 1e-6);

  const auto m = LogRegModel::train(LogRegParams{}, data.x, data.y, 3);
  CHECK((m.final_gradient_norm() <= 1e-5 || m.iterations() == 500));
}

TEST_CASE("gbdt preset parameters and loss history") {
  CHECK(GbdtParams::for_preset(GbdtPreset::GB).lambda == 0.0);
  CHECK(GbdtParams::for_preset(GbdtPreset::XGB).lambda == 1.0);
  CHECK(GbdtParams::for_preset(GbdtPreset::LGBM).min_samples_leaf == 20);
  const auto data = fixture::blobs(90, 3, 3, 9);
  for (auto preset : {GbdtPreset::GB, GbdtPreset::XGB, GbdtPreset::LGBM, GbdtPreset::CatBoostApprox}) {
    CAPTURE(preset_name(preset));
    auto p = GbdtParams::for_preset(preset);
    p.rounds = 12;
    const auto m = GbdtModel::train(p, data.x, data.y, 3);
    CHECK(m.loss_history().size() == 13);
    CHECK(m.rounds().size() == 12);
    CHECK(m.loss_history().back() < m.loss_history().front());
    // the initial loss is the entropy of the class priors
    CHECK(m.loss_history().front() == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    for (const auto& round : m.rounds())
      for (const auto& t : round) CHECK(t.depth() <= p.max_depth);
  }
}

TEST_CASE("spec validation and config blocks") {
  ClassifierSpec s;
  s.kind = ClassifierKind::KNN;
  s.hyperparameters["k"] = "0";
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.hyperparameters = {{"depth", "3"}};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.hyperparameters.clear();
  s.preset = GbdtPreset::XGB;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.preset.reset();
  CHECK_NOTHROW(s.validate());
  CHECK_THROWS_AS(parse_kind("perceptron"), ConfigError);
  CHECK(parse_preset("catboost-approx") == GbdtPreset::CatBoostApprox);

  const auto specs = default_classifier_specs();
  REQUIRE(specs.size() == 11);
  for (const auto& d : specs) {
    CHECK_NOTHROW(d.validate());
    const auto back = ClassifierSpec::from_json(d.to_json());
    CHECK(back.to_json() == d.to_json());
  }

  const auto cfg = KeyValueConfig::parse(
      "clf.deep_tree.kind = decision_tree\n"
      "clf.deep_tree.max_depth = 30\n"
      "clf.fast.kind = gbdt\n"
      "clf.fast.preset = xgb\n"
      "clf.fast.rounds = 10\n"
      "clf.combo.kind = voting\n"
      "clf.combo.members = deep_tree, fast\n"
      "clf.combo.mode = hard\n");
  const auto all = specs_from_config(cfg, {});
  REQUIRE(all.size() == 3);
  CHECK(all[0].name == "deep_tree");
  CHECK(all[0].hyperparameters.at("max_depth") == "30");
  CHECK(all[1].preset == GbdtPreset::XGB);
  CHECK(all[2].members.size() == 2);
  const auto picked = specs_from_config(cfg, {"KNN", "fast"});
  REQUIRE(picked.size() == 2);
  CHECK(picked[0].kind == ClassifierKind::KNN);
  CHECK_THROWS_AS(specs_from_config(cfg, {"nothing"}), ConfigError);
  CHECK_THROWS_AS(specs_from_config(KeyValueConfig::parse("clf.v.kind = voting\nclf.v.members = Voting_Classifier\n"), {}),
                  ConfigError);
}
