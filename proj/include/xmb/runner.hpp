#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "xmb/config.hpp"
#include "xmb/corpus.hpp"
#include "xmb/learn/classifier.hpp"
#include "xmb/learn/spec.hpp"
#include "xmb/metrics.hpp"
#include "xmb/pca.hpp"
#include "xmb/preproc.hpp"

namespace xmb::runner {

inline constexpr const char* kVersion = "0.1.0";

/// Experiment grid configuration.
///
///   corpus.path          labeled corpus CSV
///   stores.<fe>          embedding store base path per feature technique
///   grid.dr              none,pca (default none)
///   grid.classifiers     names; each resolves to a clf.<name> block or a default
///   grid.ratio           train fraction (default 0.8)
///   grid.seed            run seed (default 42)
///   grid.workers         worker threads, 0 = available cores
///   grid.exclude_emptied drop records that preprocessing empties (default true)
///   pca.target / pca.dims  variance fraction (default 0.95) or fixed count
///   output.dir           artifact directory (default out)
///   preproc.*            see PreprocessConfig::from_config
/// Relative paths are resolved against the config file's directory.
struct RunConfig {
  std::filesystem::path corpus_path;
  std::vector<std::pair<std::string, std::filesystem::path>> stores;
  std::vector<std::string> dr_options = {"none"};
  PcaTarget pca_target = VarianceFraction{0.95};
  std::vector<learn::ClassifierSpec> classifiers;
  double ratio = 0.8;
  std::uint64_t seed = 42;
  std::size_t workers = 0;
  bool exclude_emptied = true;
  preproc::PreprocessConfig preprocess = preproc::PreprocessConfig::defaults();
  std::filesystem::path output_dir = "out";
  KeyValueConfig source;

  static RunConfig from_config(const KeyValueConfig& cfg);
  void validate() const;
};

struct ResultRow {
  std::string fe;
  std::string dr;
  std::string classifier;
  std::string status = "ok";  // ok | failed
  std::string error;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double wall_time = 0.0;  // seconds
  std::uint64_t seed = 0;
  std::size_t feature_dim = 0;
};

struct ResultsTable {
  std::vector<ResultRow> rows;  // sorted by (fe, dr, classifier)
  std::size_t failures() const;
};

struct RunResult {
  ResultsTable table;
  nlohmann::json manifest;
};

// The data every cell of a run shares.
struct PreparedData {
  Corpus corpus;
  SplitIndices split;
  std::vector<std::size_t> train_ids;  // split minus emptied records
  std::vector<std::size_t> test_ids;
  std::vector<int> train_labels;
  std::vector<int> test_labels;
  std::size_t emptied_count = 0;
};

PreparedData prepare_data(const RunConfig& config);

// Cell directory name: <fe>__<dr>__<classifier>.
std::string cell_name(const ResultRow& row);

/// Trains and evaluates every (FE, DR, classifier) cell and writes per-cell
/// artifacts under <output_dir>/cells/<cell>/: metrics.json, confusion.csv,
/// roc.csv. One split serves every cell; PCA is fitted on the train rows only,
/// once per feature technique. Cell i (in sorted order) trains with seed
/// derive_seed(run seed, "cell", i). A failing cell becomes a failed row.
RunResult run_grid(const RunConfig& config);

// results.csv (deterministic; no timings), results.json (with timings) and
// run_manifest.json, each replaced atomically.
void emit_report(const RunResult& result, const std::filesystem::path& dir);

std::string results_csv(const ResultsTable& table);
ResultsTable parse_results_csv(std::string_view text);

// Widens n x |codes| scores to n x 3 columns indexed by label code.
Matrix scores_by_code(const Matrix& scores, const std::vector<int>& codes);

// Evaluates a fitted classifier on rows x with true label codes y.
eval::MetricsReport evaluate_classifier(const learn::TrainedClassifier& clf, const Matrix& x, std::span<const int> y);

// Writes metrics.json, confusion.csv and roc.csv into dir.
void write_cell_artifacts(const eval::MetricsReport& report, const nlohmann::json& context,
                          const std::filesystem::path& dir);

}  // namespace xmb::runner
