// xmbsa: corpus preprocessing, embedding fusion, reduction, classifier
// training and the experiment grid.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 grid
// finished with failed cells, 1 anything else.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "xmb/config.hpp"
#include "xmb/corpus.hpp"
#include "xmb/error.hpp"
#include "xmb/learn/classifier.hpp"
#include "xmb/pca.hpp"
#include "xmb/preproc.hpp"
#include "xmb/report.hpp"
#include "xmb/runner.hpp"
#include "xmb/store.hpp"
#include "xmb/tsne.hpp"

namespace fs = std::filesystem;
using namespace xmb;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

KeyValueConfig load_config(const Globals& g, bool required) {
  if (g.config.empty()) {
    if (required) throw ConfigError("--config is required");
    return {};
  }
  return KeyValueConfig::load(g.config);
}

runner::RunConfig run_config(const Globals& g) {
  auto cfg = load_config(g, true);
  if (g.seed) cfg.set("grid.seed", std::to_string(*g.seed));
  if (!g.out.empty()) cfg.set("output.dir", fs::absolute(g.out).string());
  return runner::RunConfig::from_config(cfg);
}

fs::path store_for(const runner::RunConfig& rc, const std::string& fe) {
  for (const auto& [name, path] : rc.stores)
    if (name == fe) return path;
  throw ConfigError("no stores." + fe + " entry in the config");
}

void require_out(const Globals& g, const char* what) {
  if (g.out.empty()) throw ConfigError(std::string("--out is required for ") + what);
}

int cmd_preprocess(const Globals& g, const std::string& in) {
  require_out(g, "preprocess");
  const auto cfg = load_config(g, false);
  const auto pc = preproc::PreprocessConfig::from_config(cfg);
  const auto corpus = load_corpus(in);
  const auto cleaned = preproc::preprocess_corpus(corpus, pc);
  preproc::write_cleaned_csv(corpus, cleaned, g.out);
  std::cout << "cleaned " << corpus.size() << " records (" << cleaned.emptied_count << " emptied), digest "
            << cleaned.digest << "\n";
  return 0;
}

int cmd_fuse(const Globals& g, const std::vector<std::string>& inputs, const std::string& store_dir) {
  require_out(g, "fuse");
  const fs::path dir = store_dir.empty() ? fs::path(".") : fs::path(store_dir);
  std::vector<EmbeddingStore> stores;
  for (const auto& name : inputs) stores.push_back(read_store(dir / name));
  const fs::path out = dir / g.out;
  const auto fused = fuse_concat(out.filename().string(), stores);
  write_store(fused, out);
  std::cout << "wrote " << out.string() << " (" << fused.count() << " x " << fused.dim() << ")\n";
  return 0;
}

struct ReduceArgs {
  std::string store;
  std::string corpus;
  std::optional<std::size_t> dims;
  std::optional<double> target;
  double ratio = 0.8;
  std::string tsne;
  double perplexity = 30.0;
  int iterations = 1000;
  bool no_pca = false;
};

int cmd_reduce(const Globals& g, const ReduceArgs& a) {
  require_out(g, "reduce");
  const std::uint64_t seed = g.seed.value_or(42);
  std::optional<Corpus> corpus;
  if (!a.corpus.empty()) corpus = load_corpus(a.corpus);
  const auto store = read_store(a.store, corpus ? std::optional<std::string>(corpus->digest()) : std::nullopt);
  Matrix all = store.to_matrix();
  Matrix reduced = all;
  if (!a.no_pca) {
    PcaTarget target = VarianceFraction{a.target.value_or(0.95)};
    if (a.dims) target = ComponentCount{*a.dims};
    std::vector<std::size_t> fit_ids;
    if (corpus) fit_ids = stratified_split(*corpus, a.ratio, seed).train_ids;
    const auto model = fit_pca(corpus ? store.rows(fit_ids) : all, target);
    reduced = transform_pca(model, all);
    save_pca(model, g.out + ".pca");
    StoreManifest m = store.manifest();
    m.model_id = m.model_id + "+pca";
    m.dim = model.output_dim();
    m.extra["pca_fit_rows"] = corpus ? "train" : "all";
    std::vector<float> values(static_cast<std::size_t>(reduced.size()));
    for (Eigen::Index i = 0; i < reduced.rows(); ++i)
      for (Eigen::Index j = 0; j < reduced.cols(); ++j)
        values[static_cast<std::size_t>(i * reduced.cols() + j)] = static_cast<float>(reduced(i, j));
    write_store(EmbeddingStore(m, std::move(values)), g.out);
    std::cout << "pca: " << store.dim() << " -> " << model.output_dim() << " dims, explained "
              << model.explained_ratio.sum() << "\n";
  }
  if (!a.tsne.empty()) {
    if (!corpus) throw ConfigError("--tsne needs --corpus for labels");
    TsneConfig tc;
    tc.perplexity = a.perplexity;
    tc.iterations = a.iterations;
    tc.seed = seed;
    const auto res = tsne_embed(reduced, tc);
    write_file_atomic(a.tsne, report::tsne_csv(res.coords, corpus->label_codes()));
    std::cout << "t-SNE KL " << res.kl << "\n";
  }
  return 0;
}

// The sidecar records which features a saved model expects.
fs::path sidecar(const std::string& base) { return base + ".run.json"; }

Matrix features_for(const runner::RunConfig& rc, const std::string& fe, const std::string& dr, const std::string& base,
                    const runner::PreparedData& data, bool fit, const std::vector<std::size_t>& ids) {
  const auto store = read_store(store_for(rc, fe), data.corpus.digest());
  Matrix x = store.rows(ids);
  if (dr == "none") return x;
  if (dr != "pca") throw ConfigError("--dr must be none or pca");
  if (fit) {
    const auto model = fit_pca(x, rc.pca_target);
    save_pca(model, base + ".pca");
    return transform_pca(model, x);
  }
  return transform_pca(load_pca(base + ".pca"), x);
}

int cmd_train(const Globals& g, const std::string& fe, const std::string& dr, const std::string& name) {
  require_out(g, "train");
  auto cfg = load_config(g, true);
  if (g.seed) cfg.set("grid.seed", std::to_string(*g.seed));
  cfg.set("grid.classifiers", name);
  const auto rc = runner::RunConfig::from_config(cfg);
  const auto data = runner::prepare_data(rc);
  const Matrix x = features_for(rc, fe, dr, g.out, data, true, data.train_ids);
  auto spec = rc.classifiers.front();
  spec.seed = rc.seed;
  const auto clf = learn::fit(spec, x, data.train_labels);
  clf.save(g.out);
  write_file_atomic(sidecar(g.out), nlohmann::json{{"fe", fe}, {"dr", dr}, {"seed", rc.seed}, {"ratio", rc.ratio}}
                                         .dump(2) + "\n");
  std::cout << "trained " << spec.name << " on " << x.rows() << " x " << x.cols() << "\n";
  return 0;
}

int cmd_evaluate(const Globals& g, const std::string& model) {
  require_out(g, "evaluate");
  std::ifstream in(sidecar(model));
  if (!in) throw DataError("missing " + sidecar(model).string());
  const auto side = nlohmann::json::parse(in);
  auto cfg = load_config(g, true);
  cfg.set("grid.seed", std::to_string(side.at("seed").get<std::uint64_t>()));
  cfg.set("grid.ratio", nlohmann::json(side.at("ratio")).dump());
  const auto rc = runner::RunConfig::from_config(cfg);
  const auto data = runner::prepare_data(rc);
  const auto clf = learn::TrainedClassifier::load(model);
  const Matrix x = features_for(rc, side.at("fe"), side.at("dr"), model, data, false, data.test_ids);
  const auto report = runner::evaluate_classifier(clf, x, data.test_labels);
  runner::write_cell_artifacts(report, {{"fe", side.at("fe")}, {"dr", side.at("dr")}, {"classifier", clf.spec().name}},
                               g.out);
  std::printf("accuracy %.4f  precision %.4f  recall %.4f  f1 %.4f\n", report.summary.accuracy,
              report.summary.macro_precision, report.summary.macro_recall, report.summary.macro_f1);
  return 0;
}

int cmd_grid(const Globals& g) {
  const auto rc = run_config(g);
  const auto result = runner::run_grid(rc);
  runner::emit_report(result, rc.output_dir);
  report::emit_table(rc.output_dir);
  for (const auto& r : result.table.rows) {
    if (r.status == "ok")
      std::printf("%-12s %-5s %-18s acc %.4f f1 %.4f  %.2fs\n", r.fe.c_str(), r.dr.c_str(), r.classifier.c_str(),
                  r.accuracy, r.f1, r.wall_time);
    else
      std::printf("%-12s %-5s %-18s FAILED: %s\n", r.fe.c_str(), r.dr.c_str(), r.classifier.c_str(), r.error.c_str());
  }
  return result.table.failures() ? 4 : 0;
}

fs::path run_dir(const Globals& g) {
  if (!g.out.empty()) return g.out;
  if (!g.config.empty()) return run_config(g).output_dir;
  throw ConfigError("--out (run directory) or --config is required");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentiment pipeline over fused transformer embeddings"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "key=value configuration file");
  auto* seed_opt = app.add_option("--seed", seed, "run seed (overrides grid.seed)");
  app.add_option("--out", g.out, "output path or directory");

  std::string pre_in;
  auto* pre = app.add_subcommand("preprocess", "clean a corpus CSV");
  pre->add_option("--in", pre_in, "input corpus CSV")->required();

  std::vector<std::string> fuse_inputs;
  std::string store_dir;
  auto* fuse = app.add_subcommand("fuse", "concatenate embedding stores");
  fuse->add_option("--inputs", fuse_inputs, "store names in concatenation order")->required()->delimiter(',');
  fuse->add_option("--store-dir", store_dir, "directory holding the stores");

  ReduceArgs ra;
  auto* reduce = app.add_subcommand("reduce", "PCA-reduce a store and optionally embed it with t-SNE");
  reduce->add_option("--store", ra.store, "input store base path")->required();
  reduce->add_option("--corpus", ra.corpus, "corpus CSV; PCA is then fitted on the train split");
  auto* dims = reduce->add_option("--pca-dims", ra.dims, "number of components");
  reduce->add_option("--pca-target", ra.target, "variance fraction to retain")->excludes(dims);
  reduce->add_option("--ratio", ra.ratio, "train fraction for the split");
  reduce->add_flag("--no-pca", ra.no_pca, "skip PCA (t-SNE on raw rows)");
  reduce->add_option("--tsne", ra.tsne, "write t-SNE coordinates CSV");
  reduce->add_option("--perplexity", ra.perplexity, "t-SNE perplexity");
  reduce->add_option("--iterations", ra.iterations, "t-SNE iterations");

  std::string fe, dr = "none", clf_name, model;
  auto* train = app.add_subcommand("train", "fit one classifier on the train split");
  train->add_option("--fe", fe, "feature technique (stores.<fe>)")->required();
  train->add_option("--dr", dr, "none or pca");
  train->add_option("--classifier", clf_name, "classifier name")->required();

  auto* evaluate = app.add_subcommand("evaluate", "score a saved classifier on the test split");
  evaluate->add_option("--model", model, "model base path")->required();

  auto* grid = app.add_subcommand("grid", "run the full experiment grid");
  auto* rep = app.add_subcommand("report", "write table2.csv from a run directory");

  report::PlotInputs pi;
  std::string plot_corpus, plot_tsne;
  auto* plot = app.add_subcommand("plot", "render SVG figures for a run directory");
  plot->add_option("--corpus", plot_corpus, "corpus CSV for distribution plots");
  plot->add_option("--tsne", plot_tsne, "t-SNE coordinates CSV");
  plot->add_option("--bin-width", pi.bin_width, "text length histogram bin width");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*pre) return cmd_preprocess(g, pre_in);
    if (*fuse) return cmd_fuse(g, fuse_inputs, store_dir);
    if (*reduce) return cmd_reduce(g, ra);
    if (*train) return cmd_train(g, fe, dr, clf_name);
    if (*evaluate) return cmd_evaluate(g, model);
    if (*grid) return cmd_grid(g);
    if (*rep) {
      std::cout << report::emit_table(run_dir(g)).string() << "\n";
      return 0;
    }
    if (*plot) {
      pi.run_dir = run_dir(g);
      if (!plot_corpus.empty()) pi.corpus = plot_corpus;
      if (!plot_tsne.empty()) pi.tsne = plot_tsne;
      for (const auto& p : report::emit_plots(pi)) std::cout << p.string() << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "xmbsa: config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "xmbsa: data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "xmbsa: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
