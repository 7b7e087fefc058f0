#include "xmb/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "xmb/error.hpp"
#include "xmb/store.hpp"
#include "xmb/svg.hpp"
#include "xmb/text/csv.hpp"

namespace xmb::report {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
  return buf;
}

}  // namespace

std::string table2_csv(const runner::ResultsTable& table) {
  std::vector<std::string> columns;  // fe/dr in table order
  std::vector<std::string> classifiers;
  std::map<std::pair<std::string, std::string>, const runner::ResultRow*> cell;
  for (const auto& r : table.rows) {
    const auto col = r.fe + "/" + r.dr;
    if (std::find(columns.begin(), columns.end(), col) == columns.end()) columns.push_back(col);
    if (std::find(classifiers.begin(), classifiers.end(), r.classifier) == classifiers.end())
      classifiers.push_back(r.classifier);
    cell[{r.classifier, col}] = &r;
  }
  std::vector<std::string> header = {"classifier"};
  for (const auto& c : columns)
    for (const char* m : {"accuracy", "precision", "recall", "f1"}) header.push_back(c + " " + m);
  std::string out = csv::join(header) + "\n";
  for (const auto& name : classifiers) {
    std::vector<std::string> fields = {name};
    for (const auto& c : columns) {
      auto it = cell.find({name, c});
      if (it == cell.end() || it->second->status != "ok") {
        const std::string v = it == cell.end() ? "" : "failed";
        fields.insert(fields.end(), 4, v);
        continue;
      }
      const auto& r = *it->second;
      for (double v : {r.accuracy, r.precision, r.recall, r.f1}) fields.push_back(pct(v));
    }
    out += csv::join(fields) + "\n";
  }
  return out;
}

fs::path emit_table(const fs::path& run_dir) {
  const auto table = runner::parse_results_csv(read_file(run_dir / "results.csv"));
  const auto out = run_dir / "table2.csv";
  write_file_atomic(out, table2_csv(table));
  return out;
}

std::string tsne_csv(const Matrix& coords, std::span<const int> labels) {
  if (coords.cols() != 2 || static_cast<std::size_t>(coords.rows()) != labels.size())
    throw DataError("tsne csv: need n x 2 coordinates and n labels");
  std::string out = "x,y,label\n";
  for (Eigen::Index i = 0; i < coords.rows(); ++i)
    out += eval::format_double(coords(i, 0)) + "," + eval::format_double(coords(i, 1)) + "," +
           std::to_string(labels[static_cast<std::size_t>(i)]) + "\n";
  return out;
}

void read_tsne_csv(std::string_view text, Matrix& coords, std::vector<int>& labels) {
  const auto rows = csv::parse(text);
  if (rows.empty() || rows[0].fields != std::vector<std::string>{"x", "y", "label"})
    throw DataError("tsne csv: missing header x,y,label");
  coords.resize(static_cast<Eigen::Index>(rows.size() - 1), 2);
  labels.clear();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    if (f.size() != 3) throw DataError("line " + std::to_string(rows[i].line) + ": expected 3 fields");
    coords(static_cast<Eigen::Index>(i - 1), 0) = parse_double(f[0], "x");
    coords(static_cast<Eigen::Index>(i - 1), 1) = parse_double(f[1], "y");
    const auto l = parse_int(f[2], "label");
    if (l < 0 || l >= kNumLabels) throw DataError("line " + std::to_string(rows[i].line) + ": bad label");
    labels.push_back(static_cast<int>(l));
  }
}

std::vector<fs::path> emit_plots(const PlotInputs& in) {
  std::vector<fs::path> written;
  const fs::path plots = in.run_dir / "plots";
  auto emit = [&](const std::string& name, const std::string& svg) {
    write_file_atomic(plots / name, svg);
    written.push_back(plots / name);
  };

  const auto table = runner::parse_results_csv(read_file(in.run_dir / "results.csv"));
  for (const auto& row : table.rows) {
    if (row.status != "ok") continue;
    const auto cell = runner::cell_name(row);
    const auto dir = in.run_dir / "cells" / cell;
    for (const char* f : {"confusion.csv", "roc.csv"})
      if (!fs::exists(dir / f)) throw DataError("cell " + cell + ": missing " + f);
    const auto title = row.classifier + " / " + row.fe + " / " + row.dr;
    emit(cell + ".confusion.svg", svg::confusion_heatmap(eval::parse_confusion_csv(read_file(dir / "confusion.csv")), title));
    const auto curves = eval::parse_roc_csv(read_file(dir / "roc.csv"));
    if (curves.empty()) throw DataError("cell " + cell + ": empty ROC list");
    emit(cell + ".roc.svg", svg::roc_chart(curves, title));
  }

  std::optional<fs::path> corpus_path = in.corpus;
  if (!corpus_path && fs::exists(in.run_dir / "run_manifest.json")) {
    const auto m = nlohmann::json::parse(read_file(in.run_dir / "run_manifest.json"));
    if (m.contains("corpus") && m["corpus"].contains("path")) corpus_path = m["corpus"]["path"].get<std::string>();
  }
  if (corpus_path) {
    const auto corpus = load_corpus(*corpus_path);
    const auto dist = class_distribution(corpus);
    emit("class_distribution.svg",
         svg::bar_chart({"Negative", "Positive", "Neutral"},
                        {static_cast<double>(dist[0]), static_cast<double>(dist[1]), static_cast<double>(dist[2])},
                        "Class distribution"));
    emit("text_lengths.svg",
         svg::histogram(text_length_histogram(corpus, in.bin_width), in.bin_width, "Text length distribution"));
  }

  std::optional<fs::path> tsne = in.tsne;
  if (!tsne && fs::exists(in.run_dir / "tsne.csv")) tsne = in.run_dir / "tsne.csv";
  if (tsne) {
    Matrix coords;
    std::vector<int> labels;
    read_tsne_csv(read_file(*tsne), coords, labels);
    emit("tsne.svg", svg::scatter(coords, labels, "t-SNE"));
  }
  return written;
}

}  // namespace xmb::report
