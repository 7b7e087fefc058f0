#include "xmb/learn/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "xmb/error.hpp"
#include "xmb/learn/ensemble.hpp"
#include "xmb/learn/gbdt.hpp"
#include "xmb/learn/knn.hpp"
#include "xmb/learn/logreg.hpp"
#include "xmb/learn/svm.hpp"
#include "xmb/learn/tree.hpp"
#include "xmb/random.hpp"

namespace xmb::learn {

Standardizer Standardizer::fit(const Matrix& x) {
  Standardizer s;
  s.mean = x.colwise().mean();
  s.scale.resize(x.cols());
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    double var = (x.col(c).array() - s.mean(c)).square().sum() / n;
    double sd = std::sqrt(var);
    s.scale(c) = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Standardizer Standardizer::identity(std::size_t d) {
  Standardizer s;
  s.mean = RowVector::Zero(static_cast<Eigen::Index>(d));
  s.scale = RowVector::Ones(static_cast<Eigen::Index>(d));
  return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
  Matrix out = x.rowwise() - mean;
  out.array().rowwise() /= scale.array();
  return out;
}

void Standardizer::save(ArchiveWriter& out, const std::string& prefix) const {
  out.put(prefix + "std_mean", Vector(mean.transpose()));
  out.put(prefix + "std_scale", Vector(scale.transpose()));
}

Standardizer Standardizer::load(const ArchiveReader& in, const std::string& prefix) {
  Standardizer s;
  s.mean = in.get_vector(prefix + "std_mean").transpose();
  s.scale = in.get_vector(prefix + "std_scale").transpose();
  return s;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      out(i, c) = std::exp(logits(i, c) - m);
      sum += out(i, c);
    }
    out.row(i) /= sum;
  }
  return out;
}

std::vector<int> argmax_rows(const Matrix& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c)
      if (scores(i, c) > scores(i, best)) best = c;
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

TrainedClassifier::TrainedClassifier(ClassifierSpec spec, std::vector<int> label_codes,
                                     std::shared_ptr<const Model> model)
    : spec_(std::move(spec)), label_codes_(std::move(label_codes)), model_(std::move(model)) {}

Matrix TrainedClassifier::predict_scores(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != model_->num_features())
    throw DataError("feature width " + std::to_string(x.cols()) + " does not match training width " +
                    std::to_string(model_->num_features()));
  if (!x.allFinite()) throw DataError("prediction input contains non-finite values");
  return model_->scores(x);
}

std::vector<int> TrainedClassifier::predict(const Matrix& x) const {
  auto idx = argmax_rows(predict_scores(x));
  for (auto& i : idx) i = label_codes_[static_cast<std::size_t>(i)];
  return idx;
}

void TrainedClassifier::save(const std::filesystem::path& base) const {
  ArchiveWriter out;
  out.meta()["spec"] = spec_.to_json();
  out.meta()["label_codes"] = label_codes_;
  out.meta()["models"] = nlohmann::json::object();
  model_->save(out, "root.");
  out.save(base);
}

TrainedClassifier TrainedClassifier::load(const std::filesystem::path& base) {
  auto in = ArchiveReader::load(base);
  auto spec = ClassifierSpec::from_json(in.meta().at("spec"));
  auto labels = in.meta().at("label_codes").get<std::vector<int>>();
  auto model = load_model(in, "root.");
  return TrainedClassifier(std::move(spec), std::move(labels), std::move(model));
}

namespace {

LinearSvmParams svm_params(const Hyper& h) {
  LinearSvmParams p;
  p.lambda = h.real("lambda");
  p.epochs = static_cast<int>(h.integer("epochs"));
  p.standardize = h.boolean("standardize");
  return p;
}

GbdtParams gbdt_params(const ClassifierSpec& spec, const Hyper& h) {
  const auto preset = spec.preset.value_or(GbdtPreset::GB);
  GbdtParams p = GbdtParams::for_preset(preset);
  p.rounds = static_cast<int>(h.integer("rounds"));
  p.learning_rate = h.real("learning_rate");
  p.max_depth = static_cast<int>(h.integer("max_depth"));
  p.min_samples_leaf = static_cast<int>(h.integer("min_samples_leaf"));
  if (preset == GbdtPreset::XGB || preset == GbdtPreset::LGBM) {
    p.lambda = h.real("lambda");
    p.min_child_weight = h.real("min_child_weight");
  }
  if (preset == GbdtPreset::LGBM) {
    p.max_leaves = static_cast<int>(h.integer("max_leaves"));
    p.bins = static_cast<int>(h.integer("bins"));
  }
  return p;
}

}  // namespace

std::shared_ptr<const Model> train_model(const ClassifierSpec& spec, const Matrix& x, std::span<const int> y,
                                         int classes) {
  const Hyper h(spec);
  switch (spec.kind) {
    case ClassifierKind::LogReg: {
      LogRegParams p;
      p.lambda = h.real("lambda");
      p.max_epochs = static_cast<int>(h.integer("max_epochs"));
      p.tolerance = h.real("tolerance");
      p.memory = static_cast<int>(h.integer("memory"));
      p.standardize = h.boolean("standardize");
      return std::make_shared<LogRegModel>(LogRegModel::train(p, x, y, classes));
    }
    case ClassifierKind::LinearSVM:
      return std::make_shared<LinearSvmModel>(LinearSvmModel::train(svm_params(h), x, y, classes, spec.seed));
    case ClassifierKind::KNN:
      return std::make_shared<KnnModel>(KnnModel::train(static_cast<int>(h.integer("k")), x, y, classes));
    case ClassifierKind::DecisionTree: {
      CartParams p;
      p.max_depth = static_cast<int>(h.integer("max_depth"));
      p.min_samples_leaf = static_cast<int>(h.integer("min_samples_leaf"));
      return std::make_shared<DecisionTreeModel>(DecisionTreeModel::train(p, x, y, classes));
    }
    case ClassifierKind::RandomForest: {
      ForestParams p;
      p.n_trees = static_cast<int>(h.integer("n_trees"));
      p.tree.max_depth = static_cast<int>(h.integer("max_depth"));
      p.tree.min_samples_leaf = static_cast<int>(h.integer("min_samples_leaf"));
      p.tree.max_features = static_cast<int>(h.integer("max_features"));
      p.bootstrap = h.boolean("bootstrap");
      return std::make_shared<RandomForestModel>(RandomForestModel::train(p, x, y, classes, spec.seed));
    }
    case ClassifierKind::GBDT:
      return std::make_shared<GbdtModel>(GbdtModel::train(gbdt_params(spec, h), x, y, classes));
    case ClassifierKind::BaggedSVM: {
      BaggedSvmParams p;
      p.n_estimators = static_cast<int>(h.integer("n_estimators"));
      p.member = svm_params(h);
      return std::make_shared<BaggedSvmModel>(BaggedSvmModel::train(p, x, y, classes, spec.seed));
    }
    case ClassifierKind::Voting: {
      std::vector<std::shared_ptr<const Model>> members;
      for (std::size_t i = 0; i < spec.members.size(); ++i) {
        ClassifierSpec m = spec.members[i];
        m.seed = derive_seed(spec.seed, "member", i);
        members.push_back(train_model(m, x, y, classes));
      }
      return std::make_shared<VotingModel>(h.choice("mode") == "hard" ? VotingMode::Hard : VotingMode::Soft,
                                           std::move(members));
    }
  }
  throw ConfigError("unsupported classifier kind");
}

std::shared_ptr<const Model> load_model(const ArchiveReader& in, const std::string& prefix) {
  const auto& desc = in.meta().at("models").at(prefix);
  const auto kind = parse_kind(desc.at("kind").get<std::string>());
  switch (kind) {
    case ClassifierKind::LogReg: return std::make_shared<LogRegModel>(LogRegModel::load(in, prefix));
    case ClassifierKind::LinearSVM: return std::make_shared<LinearSvmModel>(LinearSvmModel::load(in, prefix));
    case ClassifierKind::KNN: return std::make_shared<KnnModel>(KnnModel::load(in, prefix));
    case ClassifierKind::DecisionTree: return std::make_shared<DecisionTreeModel>(DecisionTreeModel::load(in, prefix));
    case ClassifierKind::RandomForest: return std::make_shared<RandomForestModel>(RandomForestModel::load(in, prefix));
    case ClassifierKind::GBDT: return std::make_shared<GbdtModel>(GbdtModel::load(in, prefix));
    case ClassifierKind::BaggedSVM: return std::make_shared<BaggedSvmModel>(BaggedSvmModel::load(in, prefix));
    case ClassifierKind::Voting: {
      const auto mode = desc.at("mode").get<std::string>() == "hard" ? VotingMode::Hard : VotingMode::Soft;
      std::vector<std::shared_ptr<const Model>> members;
      const auto count = desc.at("members").get<std::size_t>();
      for (std::size_t i = 0; i < count; ++i) members.push_back(load_model(in, prefix + "m" + std::to_string(i) + "."));
      return std::make_shared<VotingModel>(mode, std::move(members));
    }
  }
  throw DataError("unsupported model kind in archive");
}

TrainedClassifier fit(const ClassifierSpec& spec, const Matrix& x, std::span<const int> y) {
  spec.validate();
  if (x.rows() < 2) throw DataError("fit needs at least 2 rows");
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw DataError("feature rows (" + std::to_string(x.rows()) + ") and labels (" + std::to_string(y.size()) +
                    ") differ");
  if (x.cols() < 1) throw DataError("fit needs at least one feature");
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      if (!std::isfinite(x(i, j)))
        throw DataError("non-finite feature at row " + std::to_string(i) + ", column " + std::to_string(j));
  std::set<int> distinct(y.begin(), y.end());
  if (distinct.size() < 2) throw DataError("degenerate labels: need at least 2 distinct classes");
  std::vector<int> codes(distinct.begin(), distinct.end());
  std::vector<int> idx(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    idx[i] = static_cast<int>(std::lower_bound(codes.begin(), codes.end(), y[i]) - codes.begin());
  auto model = train_model(spec, x, idx, static_cast<int>(codes.size()));
  return TrainedClassifier(spec, std::move(codes), std::move(model));
}

}  // namespace xmb::learn
