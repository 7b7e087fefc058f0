#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xmb/matrix.hpp"
#include "xmb/runner.hpp"

namespace xmb::report {

// Pivot of the results table: one row per classifier, four percentage
// columns (accuracy, precision, recall, F1) per feature technique and DR
// option, e.g. "xmb/pca accuracy". Failed cells read "failed".
std::string table2_csv(const runner::ResultsTable& table);

// Reads <run_dir>/results.csv and writes <run_dir>/table2.csv.
std::filesystem::path emit_table(const std::filesystem::path& run_dir);

// t-SNE coordinates as CSV with header x,y,label.
std::string tsne_csv(const Matrix& coords, std::span<const int> labels);
void read_tsne_csv(std::string_view text, Matrix& coords, std::vector<int>& labels);

struct PlotInputs {
  std::filesystem::path run_dir;
  std::optional<std::filesystem::path> corpus;    // default: corpus path in the run manifest
  std::optional<std::filesystem::path> tsne;      // default: <run_dir>/tsne.csv when present
  std::size_t bin_width = 10;
};

/// Writes SVGs under <run_dir>/plots/: <cell>.confusion.svg and
/// <cell>.roc.svg for every successful cell of results.csv, plus
/// class_distribution.svg, text_lengths.svg and tsne.svg when their inputs
/// are available. Throws DataError naming the cell when an artifact CSV is
/// missing.
std::vector<std::filesystem::path> emit_plots(const PlotInputs& inputs);

}  // namespace xmb::report
