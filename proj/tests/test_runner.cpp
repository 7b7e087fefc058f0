#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <tuple>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "xmb/error.hpp"
#include "xmb/report.hpp"
#include "xmb/runner.hpp"
#include "xmb/random.hpp"
#include "xmb/svg.hpp"

using namespace xmb;
namespace fs = std::filesystem;

namespace {

// Two stores over one 90-record corpus: a separable one and a constant one
// whose PCA cells must fail.
struct GridDir {
  fs::path dir = fixture::temp_dir("runner");
  Corpus corpus;

  GridDir() {
    const auto a = fixture::blobs(90, 4, 5.0, 31);
    corpus = fixture::placeholder_corpus(a.y);
    save_corpus(corpus, dir / "corpus.csv");
    write_store(fixture::make_store("alpha", a.x, corpus.digest()), dir / "alpha");
    write_store(fixture::make_store("flat", Matrix::Constant(90, 3, 0.5), corpus.digest()), dir / "flat");
    fixture::write_file(dir / "grid.cfg",
                        "corpus.path = corpus.csv\n"
                        "stores.flat = flat\n"
                        "stores.alpha = alpha\n"
                        "grid.dr = pca, none\n"
                        "grid.classifiers = LR, DT, KNN\n"
                        "grid.seed = 5\n"
                        "pca.dims = 2\n");
  }
  ~GridDir() { fs::remove_all(dir); }

  runner::RunConfig config(const std::string& out) const {
    auto cfg = KeyValueConfig::load(dir / "grid.cfg");
    cfg.set("output.dir", (dir / out).string());
    return runner::RunConfig::from_config(cfg);
  }
};

}  // namespace

TEST_CASE("grid shape, order and failure isolation") {
  GridDir g;
  const auto rc = g.config("out");
  const auto result = runner::run_grid(rc);
  const auto& rows = result.table.rows;
  REQUIRE(rows.size() == 2 * 2 * 3);
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(std::tie(rows[i - 1].fe, rows[i - 1].dr, rows[i - 1].classifier) <
          std::tie(rows[i].fe, rows[i].dr, rows[i].classifier));
  CHECK(rows.front().fe == "alpha");
  CHECK(rows.front().dr == "none");
  CHECK(rows.front().classifier == "DT");
  CHECK(result.table.failures() == 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    CAPTURE(runner::cell_name(r));
    CHECK(r.seed == derive_seed(5, "cell", i));
    if (r.fe == "flat" && r.dr == "pca") {
      CHECK(r.status == "failed");
      CHECK(r.error.find("degenerate covariance") != std::string::npos);
    } else {
      CHECK(r.status == "ok");
      CHECK(r.feature_dim == (r.dr == "pca" ? 2u : (r.fe == "alpha" ? 4u : 3u)));
      CHECK(fs::exists(rc.output_dir / "cells" / runner::cell_name(r) / "metrics.json"));
    }
  }
  for (const auto& r : rows)
    if (r.fe == "alpha") CHECK(r.accuracy > 0.9);

  const auto& m = result.manifest;
  CHECK(m["corpus"]["digest"] == g.corpus.digest());
  CHECK(m["split"]["shared_across_cells"] == true);
  CHECK(m["split"]["train"].get<std::size_t>() + m["split"]["test"].get<std::size_t>() +
            m["emptied_records"].get<std::size_t>() ==
        90);
  CHECK(m["averaging"] == "macro");
  CHECK(m["versions"]["xmb"] == runner::kVersion);

  // the per-cell confusion matrix rows are the test supports
  const auto& ok = rows.front();
  const auto cm = eval::parse_confusion_csv(fixture::read_file(rc.output_dir / "cells" / runner::cell_name(ok) / "confusion.csv"));
  const auto data = runner::prepare_data(rc);
  std::size_t support[3] = {0, 0, 0};
  for (int y : data.test_labels) support[y] += 1;
  for (int c = 0; c < 3; ++c) CHECK(cm.row_sum(c) == support[c]);
  const auto metrics = nlohmann::json::parse(fixture::read_file(rc.output_dir / "cells" / runner::cell_name(ok) / "metrics.json"));
  CHECK(metrics["metrics"]["accuracy"].get<double>() == ok.accuracy);
}

TEST_CASE("reruns are byte-identical") {
  GridDir g;
  std::vector<std::string> csv, manifest;
  for (const char* out : {"a", "b"}) {
    const auto rc = g.config(out);
    const auto result = runner::run_grid(rc);
    runner::emit_report(result, rc.output_dir);
    csv.push_back(fixture::read_file(rc.output_dir / "results.csv"));
    auto j = nlohmann::json::parse(fixture::read_file(rc.output_dir / "run_manifest.json"));
    j["config"] = nullptr;  // differs only in output.dir
    manifest.push_back(j.dump());
    CHECK(fs::exists(rc.output_dir / "results.json"));
  }
  CHECK(csv[0] == csv[1]);
  CHECK(manifest[0] == manifest[1]);

  // rewriting into the same directory leaves no temporaries behind
  const auto rc = g.config("a");
  runner::emit_report(runner::run_grid(rc), rc.output_dir);
  CHECK(fixture::read_file(rc.output_dir / "results.csv") == csv[0]);
  for (const auto& e : fs::directory_iterator(rc.output_dir)) CHECK(e.path().filename().string().find(".tmp") == std::string::npos);

  const auto table = runner::parse_results_csv(csv[0]);
  REQUIRE(table.rows.size() == 12);
  CHECK(runner::results_csv(table) == csv[0]);
  CHECK(csv[0].rfind("fe,dr,classifier,status,accuracy,precision,recall,f1,accuracy_pct,", 0) == 0);
}

TEST_CASE("run configuration errors") {
  GridDir g;
  auto cfg = KeyValueConfig::load(g.dir / "grid.cfg");
  cfg.set("pca.target", "0.9");
  CHECK_THROWS_AS(runner::RunConfig::from_config(cfg), ConfigError);
  auto bad_dr = KeyValueConfig::load(g.dir / "grid.cfg");
  bad_dr.set("grid.dr", "none, lda");
  CHECK_THROWS_AS(runner::RunConfig::from_config(bad_dr).validate(), ConfigError);
  auto bad_ratio = KeyValueConfig::load(g.dir / "grid.cfg");
  bad_ratio.set("grid.ratio", "1.5");
  CHECK_THROWS_AS(runner::RunConfig::from_config(bad_ratio).validate(), ConfigError);

  // a store built for another corpus is rejected before any cell runs
  write_store(fixture::make_store("flat", Matrix::Constant(90, 3, 0.5), std::string(64, '0')), g.dir / "flat");
  CHECK_THROWS_AS(runner::run_grid(g.config("out")), DataError);
}

TEST_CASE("score widening by label code") {
  Matrix s(1, 2);
  s << 0.25, 0.75;
  const Matrix w = runner::scores_by_code(s, {0, 2});
  CHECK(w(0, 0) == 0.25);
  CHECK(w(0, 1) == 0.0);
  CHECK(w(0, 2) == 0.75);
}

TEST_CASE("table pivot and plots") {
  GridDir g;
  const auto rc = g.config("out");
  runner::emit_report(runner::run_grid(rc), rc.output_dir);
  const auto table_path = report::emit_table(rc.output_dir);
  const auto table = fixture::read_file(table_path);
  CHECK(table.find("alpha/none accuracy") != std::string::npos);
  CHECK(table.find("flat/pca f1") != std::string::npos);
  CHECK(table.find("failed") != std::string::npos);
  CHECK(std::count(table.begin(), table.end(), '\n') == 4);  // header + 3 classifiers

  const auto plots = report::emit_plots({rc.output_dir});
  const auto dt = rc.output_dir / "plots" / "alpha__none__DT.confusion.svg";
  CHECK(fs::exists(dt));
  CHECK(fs::exists(rc.output_dir / "plots" / "alpha__none__DT.roc.svg"));
  CHECK(fs::exists(rc.output_dir / "plots" / "class_distribution.svg"));
  CHECK(fs::exists(rc.output_dir / "plots" / "text_lengths.svg"));
  CHECK(!fs::exists(rc.output_dir / "plots" / "flat__pca__DT.confusion.svg"));
  CHECK(plots.size() == 9 * 2 + 2);

  fs::remove(rc.output_dir / "cells" / "alpha__pca__KNN" / "confusion.csv");
  CHECK_THROWS_WITH_AS(report::emit_plots({rc.output_dir}), doctest::Contains("alpha__pca__KNN"), DataError);
}

TEST_CASE("svg charts") {
  eval::ConfusionMatrix cm;
  cm.counts = {{{210, 40, 30}, {20, 242, 18}, {14, 20, 246}}};
  const auto heat = svg::confusion_heatmap(cm, "hybrid");
  const auto at = heat.find("data-row=\"0\" data-col=\"0\"");
  REQUIRE(at != std::string::npos);
  CHECK(heat.substr(heat.find('>', at) + 1, 3) == "210");

  eval::ClassRoc c;
  c.label = 2;
  c.points = {{0, 0, 1e300}, {0.25, 0.5, 0.7}, {1, 1, 0.1}};
  const std::vector<eval::ClassRoc> curves = {c};
  const auto chart = svg::roc_chart(curves, "roc <test>");
  CHECK(chart.find("roc &lt;test&gt;") != std::string::npos);
  const auto& f = svg::kRocFrame;
  std::string expect;
  for (const auto& p : c.points)
    expect += (expect.empty() ? "" : " ") + eval::format_double(f.x(p.fpr)) + "," + eval::format_double(f.y(p.tpr));
  CHECK(chart.find("data-class=\"neutral\"") != std::string::npos);
  CHECK(chart.find("points=\"" + expect + "\"") != std::string::npos);
  CHECK(expect.rfind("70,400 160,220 430,40", 0) == 0);

  CHECK_THROWS_AS(svg::roc_chart(std::vector<eval::ClassRoc>{}, "x"), DataError);
  c.points.clear();
  CHECK_THROWS_AS(svg::roc_chart(std::vector<eval::ClassRoc>{c}, "x"), DataError);
}

TEST_CASE("t-SNE csv round trip") {
  Matrix m(2, 2);
  m << 0.5, -1.25, 3, 1e-7;
  const std::vector<int> labels = {2, 0};
  Matrix back;
  std::vector<int> lb;
  report::read_tsne_csv(report::tsne_csv(m, labels), back, lb);
  CHECK(back == m);
  CHECK(lb == labels);
}
