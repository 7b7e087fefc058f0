#include "xmb/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <Eigen/Core>

#include "xmb/error.hpp"
#include "xmb/random.hpp"
#include "xmb/store.hpp"
#include "xmb/text/csv.hpp"

namespace xmb::runner {

namespace fs = std::filesystem;

RunConfig RunConfig::from_config(const KeyValueConfig& cfg) {
  RunConfig c;
  c.source = cfg;
  c.corpus_path = cfg.resolve_path(cfg.require("corpus.path"));
  for (const auto& [fe, path] : cfg.section("stores.")) c.stores.emplace_back(fe, cfg.resolve_path(path));
  if (cfg.has("grid.dr")) c.dr_options = cfg.get_list("grid.dr");
  if (cfg.has("pca.target") && cfg.has("pca.dims")) throw ConfigError("pca.target and pca.dims are exclusive");
  if (cfg.has("pca.dims")) {
    const auto k = cfg.get_int("pca.dims", 0);
    if (k < 1) throw ConfigError("pca.dims must be >= 1");
    c.pca_target = ComponentCount{static_cast<std::size_t>(k)};
  } else if (cfg.has("pca.target")) {
    c.pca_target = VarianceFraction{cfg.get_double("pca.target", 0.95)};
  }

  std::vector<std::string> order = cfg.get_list("grid.classifiers");
  const bool blocks = !cfg.section("clf.").empty();
  if (order.empty() && !blocks)
    for (const auto& s : learn::default_classifier_specs()) order.push_back(s.name);
  c.classifiers = learn::specs_from_config(cfg, order);

  c.ratio = cfg.get_double("grid.ratio", c.ratio);
  c.seed = cfg.get_u64("grid.seed", c.seed);
  const auto workers = cfg.get_int("grid.workers", 0);
  if (workers < 0) throw ConfigError("grid.workers must be >= 0");
  c.workers = static_cast<std::size_t>(workers);
  c.exclude_emptied = cfg.get_bool("grid.exclude_emptied", c.exclude_emptied);
  c.preprocess = preproc::PreprocessConfig::from_config(cfg);
  c.output_dir = cfg.resolve_path(cfg.get_or("output.dir", "out"));
  c.validate();
  return c;
}

void RunConfig::validate() const {
  if (stores.empty()) throw ConfigError("at least one stores.<fe> entry is required");
  if (dr_options.empty()) throw ConfigError("grid.dr must name at least one option");
  if (classifiers.empty()) throw ConfigError("at least one classifier is required");
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("grid.ratio must lie in (0, 1)");
  std::set<std::string> seen;
  for (const auto& [fe, path] : stores) {
    if (fe.empty() || fe.find("__") != std::string::npos) throw ConfigError("invalid feature name '" + fe + "'");
    if (!seen.insert(fe).second) throw ConfigError("duplicate store '" + fe + "'");
  }
  seen.clear();
  for (const auto& dr : dr_options) {
    if (dr != "none" && dr != "pca") throw ConfigError("grid.dr: unknown option '" + dr + "' (none, pca)");
    if (!seen.insert(dr).second) throw ConfigError("grid.dr: duplicate option '" + dr + "'");
  }
  seen.clear();
  for (const auto& c : classifiers) {
    if (c.name.empty() || c.name.find("__") != std::string::npos)
      throw ConfigError("invalid classifier name '" + c.name + "'");
    if (!seen.insert(c.name).second) throw ConfigError("duplicate classifier '" + c.name + "'");
    c.validate();
  }
  if (const auto* v = std::get_if<VarianceFraction>(&pca_target))
    if (!(v->fraction > 0.0 && v->fraction <= 1.0)) throw ConfigError("pca.target must lie in (0, 1]");
  preprocess.validate();
}

std::size_t ResultsTable::failures() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const ResultRow& r) { return r.status != "ok"; }));
}

std::string cell_name(const ResultRow& row) { return row.fe + "__" + row.dr + "__" + row.classifier; }

PreparedData prepare_data(const RunConfig& config) {
  PreparedData d;
  d.corpus = load_corpus(config.corpus_path);
  d.split = stratified_split(d.corpus, config.ratio, config.seed);
  std::vector<bool> emptied(d.corpus.size(), false);
  if (config.exclude_emptied) {
    const auto cleaned = preproc::preprocess_corpus(d.corpus, config.preprocess);
    for (std::size_t i = 0; i < cleaned.streams.size(); ++i) emptied[i] = cleaned.streams[i].emptied;
    d.emptied_count = cleaned.emptied_count;
  }
  const auto labels = d.corpus.label_codes();
  for (auto id : d.split.train_ids)
    if (!emptied[id]) {
      d.train_ids.push_back(id);
      d.train_labels.push_back(labels[id]);
    }
  for (auto id : d.split.test_ids)
    if (!emptied[id]) {
      d.test_ids.push_back(id);
      d.test_labels.push_back(labels[id]);
    }
  return d;
}

Matrix scores_by_code(const Matrix& scores, const std::vector<int>& codes) {
  Matrix out = Matrix::Zero(scores.rows(), kNumLabels);
  for (std::size_t c = 0; c < codes.size(); ++c) out.col(codes[c]) = scores.col(static_cast<Eigen::Index>(c));
  return out;
}

eval::MetricsReport evaluate_classifier(const learn::TrainedClassifier& clf, const Matrix& x, std::span<const int> y) {
  const Matrix raw = clf.predict_scores(x);
  const Matrix scores = scores_by_code(raw, clf.label_codes());
  const auto idx = learn::argmax_rows(raw);
  std::vector<int> pred(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) pred[i] = clf.label_codes()[static_cast<std::size_t>(idx[i])];
  return eval::evaluate(y, pred, scores);
}

void write_cell_artifacts(const eval::MetricsReport& report, const nlohmann::json& context, const fs::path& dir) {
  nlohmann::json j = context;
  j["metrics"] = report.to_json();
  write_file_atomic(dir / "metrics.json", j.dump(2) + "\n");
  write_file_atomic(dir / "confusion.csv", eval::confusion_csv(report.confusion));
  write_file_atomic(dir / "roc.csv", eval::roc_csv(report.roc));
}

namespace {

struct FeatureSet {
  Matrix train;
  Matrix test;
  std::optional<std::string> error;
  nlohmann::json info;
};

struct Cell {
  ResultRow row;
  const FeatureSet* features = nullptr;
  const learn::ClassifierSpec* spec = nullptr;
};

void run_cell(Cell& cell, const PreparedData& data, const fs::path& cells_dir) {
  const auto start = std::chrono::steady_clock::now();
  auto& row = cell.row;
  try {
    if (cell.features->error) throw DataError(*cell.features->error);
    row.feature_dim = static_cast<std::size_t>(cell.features->train.cols());
    learn::ClassifierSpec spec = *cell.spec;
    spec.seed = row.seed;
    const auto clf = learn::fit(spec, cell.features->train, data.train_labels);
    const auto report = evaluate_classifier(clf, cell.features->test, data.test_labels);
    row.accuracy = report.summary.accuracy;
    row.precision = report.summary.macro_precision;
    row.recall = report.summary.macro_recall;
    row.f1 = report.summary.macro_f1;
    nlohmann::json context = {{"fe", row.fe},
                              {"dr", row.dr},
                              {"classifier", row.classifier},
                              {"seed", row.seed},
                              {"feature_dim", row.feature_dim},
                              {"spec", spec.to_json()}};
    write_cell_artifacts(report, context, cells_dir / cell_name(row));
  } catch (const std::exception& e) {
    row.status = "failed";
    row.error = e.what();
    row.accuracy = row.precision = row.recall = row.f1 = 0.0;
  }
  row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

nlohmann::json pca_target_json(const PcaTarget& t) {
  if (const auto* k = std::get_if<ComponentCount>(&t)) return {{"dims", k->k}};
  return {{"variance_fraction", std::get<VarianceFraction>(t).fraction}};
}

}  // namespace

RunResult run_grid(const RunConfig& config) {
  config.validate();
  const PreparedData data = prepare_data(config);
  if (data.train_ids.empty() || data.test_ids.empty()) throw DataError("split leaves an empty train or test set");

  auto stores = config.stores;
  std::sort(stores.begin(), stores.end());
  auto drs = config.dr_options;
  std::sort(drs.begin(), drs.end());
  std::vector<const learn::ClassifierSpec*> specs;
  for (const auto& s : config.classifiers) specs.push_back(&s);
  std::sort(specs.begin(), specs.end(), [](auto* a, auto* b) { return a->name < b->name; });

  nlohmann::json store_info = nlohmann::json::object();
  std::map<std::pair<std::string, std::string>, FeatureSet> features;
  for (const auto& [fe, path] : stores) {
    const auto store = read_store(path, data.corpus.digest());
    const auto report = verify_alignment(store, data.corpus);
    if (!report.aligned) throw DataError("store '" + fe + "' is not aligned with the corpus: " + report.details);
    store_info[fe] = {{"path", path.string()}, {"model_id", store.manifest().model_id}, {"dim", store.dim()}};
    Matrix train = store.rows(data.train_ids);
    Matrix test = store.rows(data.test_ids);
    for (const auto& dr : drs) {
      FeatureSet fs_;
      if (dr == "pca") {
        try {
          const auto model = fit_pca(train, config.pca_target);
          fs_.train = transform_pca(model, train);
          fs_.test = transform_pca(model, test);
          fs_.info = {{"components", model.output_dim()}, {"explained_ratio", model.explained_ratio.sum()}};
        } catch (const std::exception& e) {
          fs_.error = std::string("pca: ") + e.what();
          fs_.info = {{"error", *fs_.error}};
        }
      } else {
        fs_.train = train;
        fs_.test = test;
        fs_.info = {{"components", static_cast<std::size_t>(train.cols())}};
      }
      store_info[fe]["dr"][dr] = fs_.info;
      features.emplace(std::make_pair(fe, dr), std::move(fs_));
    }
  }

  std::vector<Cell> cells;
  for (const auto& [fe, path] : stores)
    for (const auto& dr : drs)
      for (const auto* spec : specs) {
        Cell c;
        c.row.fe = fe;
        c.row.dr = dr;
        c.row.classifier = spec->name;
        c.row.seed = derive_seed(config.seed, "cell", cells.size());
        c.features = &features.at({fe, dr});
        c.spec = spec;
        cells.push_back(std::move(c));
      }

  const fs::path cells_dir = config.output_dir / "cells";
  std::size_t workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cells.size();) run_cell(cells[i], data, cells_dir);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  RunResult result;
  for (auto& c : cells) result.table.rows.push_back(std::move(c.row));

  nlohmann::json echo = nlohmann::json::array();
  for (const auto& key : config.source.keys()) echo.push_back({key, config.source.get_or(key, "")});
  nlohmann::json cls = nlohmann::json::array();
  for (const auto& s : config.classifiers) cls.push_back(s.to_json());
  result.manifest = {
      {"config", echo},
      {"corpus", {{"path", config.corpus_path.string()}, {"digest", data.corpus.digest()}, {"records", data.corpus.size()}}},
      {"split",
       {{"seed", config.seed},
        {"ratio", config.ratio},
        {"shared_across_cells", true},
        {"train", data.train_ids.size()},
        {"test", data.test_ids.size()}}},
      {"emptied_records", data.emptied_count},
      {"exclude_emptied", config.exclude_emptied},
      {"pca_target", pca_target_json(config.pca_target)},
      {"stores", store_info},
      {"classifiers", cls},
      {"cells", result.table.rows.size()},
      {"failures", result.table.failures()},
      {"averaging", "macro"},
      {"versions",
       {{"xmb", kVersion},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)}}}};
  return result;
}

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
  return buf;
}

const std::vector<std::string> kHeader = {"fe",           "dr",         "classifier", "status",  "accuracy",
                                          "precision",    "recall",     "f1",         "accuracy_pct",
                                          "precision_pct", "recall_pct", "f1_pct",     "seed",    "feature_dim",
                                          "error"};

}  // namespace

std::string results_csv(const ResultsTable& table) {
  std::string out = csv::join(kHeader) + "\n";
  for (const auto& r : table.rows) {
    out += csv::join({r.fe, r.dr, r.classifier, r.status, eval::format_double(r.accuracy),
                      eval::format_double(r.precision), eval::format_double(r.recall), eval::format_double(r.f1),
                      pct(r.accuracy), pct(r.precision), pct(r.recall), pct(r.f1), std::to_string(r.seed),
                      std::to_string(r.feature_dim), r.error}) +
           "\n";
  }
  return out;
}

ResultsTable parse_results_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty() || rows[0].fields != kHeader) throw DataError("results csv: unexpected header");
  ResultsTable t;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    if (f.size() != kHeader.size()) throw DataError("line " + std::to_string(rows[i].line) + ": wrong field count");
    ResultRow r;
    r.fe = f[0];
    r.dr = f[1];
    r.classifier = f[2];
    r.status = f[3];
    r.accuracy = parse_double(f[4], "accuracy");
    r.precision = parse_double(f[5], "precision");
    r.recall = parse_double(f[6], "recall");
    r.f1 = parse_double(f[7], "f1");
    r.seed = parse_u64(f[12], "seed");
    r.feature_dim = static_cast<std::size_t>(parse_u64(f[13], "feature_dim"));
    r.error = f[14];
    t.rows.push_back(std::move(r));
  }
  return t;
}

void emit_report(const RunResult& result, const fs::path& dir) {
  if (result.table.rows.empty()) throw DataError("emit_report: empty results table");
  fs::create_directories(dir);
  write_file_atomic(dir / "results.csv", results_csv(result.table));
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : result.table.rows)
    rows.push_back({{"fe", r.fe},
                    {"dr", r.dr},
                    {"classifier", r.classifier},
                    {"status", r.status},
                    {"error", r.error},
                    {"accuracy", r.accuracy},
                    {"precision", r.precision},
                    {"recall", r.recall},
                    {"f1", r.f1},
                    {"wall_time", r.wall_time},
                    {"seed", r.seed},
                    {"feature_dim", r.feature_dim}});
  write_file_atomic(dir / "results.json", nlohmann::json{{"rows", rows}}.dump(2) + "\n");
  write_file_atomic(dir / "run_manifest.json", result.manifest.dump(2) + "\n");
}

}  // namespace xmb::runner
