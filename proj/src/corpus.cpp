#include "xmb/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "xmb/digest.hpp"
#include "xmb/error.hpp"
#include "xmb/random.hpp"
#include "xmb/text/csv.hpp"
#include "xmb/text/utf8.hpp"

namespace xmb {

SentimentLabel label_from_code(int c) {
  if (c < 0 || c >= kNumLabels) throw DataError("invalid label code " + std::to_string(c));
  return static_cast<SentimentLabel>(c);
}

std::string_view label_name(SentimentLabel l) {
  switch (l) {
    case SentimentLabel::Negative: return "negative";
    case SentimentLabel::Positive: return "positive";
    case SentimentLabel::Neutral: return "neutral";
  }
  return "negative";
}

std::optional<SentimentLabel> parse_label(std::string_view s) {
  std::string lower;
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (SentimentLabel l : kAllLabels)
    if (lower == label_name(l)) return l;
  return std::nullopt;
}

std::string corpus_digest(const std::vector<CommentRecord>& records) {
  Sha256 h;
  for (const auto& r : records) {
    h.update(std::to_string(r.id));
    h.update("\x1F");
    h.update(r.text);
    h.update("\x1F");
    h.update(label_name(r.label));
    h.update("\x1E");
  }
  return h.hex();
}

Corpus::Corpus(std::vector<CommentRecord> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].id != i)
      throw DataError("record " + std::to_string(i) + " has id " + std::to_string(records_[i].id) +
                      "; ids must be 0..n-1 in order");
    if (records_[i].text.empty()) throw DataError("record " + std::to_string(i) + " has empty text");
  }
  digest_ = corpus_digest(records_);
}

std::vector<int> Corpus::label_codes() const {
  std::vector<int> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(code(r.label));
  return out;
}

Corpus parse_corpus(std::string_view text) {
  if (!utf8::is_valid(text)) throw DataError("corpus is not valid UTF-8");
  auto rows = csv::parse(text);
  if (rows.empty()) throw DataError("missing header");
  const auto& header = rows.front().fields;
  if (header != std::vector<std::string>{"id", "text", "label"})
    throw DataError("line 1: header must be id,text,label");
  if (rows.size() == 1) throw DataError("empty corpus");

  std::vector<CommentRecord> records;
  std::unordered_set<std::uint64_t> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = "line " + std::to_string(row.line);
    if (row.fields.size() != 3)
      throw DataError(where + ": expected 3 fields, found " + std::to_string(row.fields.size()));
    const std::string& id_s = row.fields[0];
    std::uint64_t id = 0;
    auto [ptr, ec] = std::from_chars(id_s.data(), id_s.data() + id_s.size(), id);
    if (ec != std::errc() || ptr != id_s.data() + id_s.size() || id_s.empty())
      throw DataError(where + ": malformed id '" + id_s + "'");
    if (!seen.insert(id).second) throw DataError(where + ": duplicate id " + id_s);
    if (id != records.size())
      throw DataError(where + ": id " + id_s + " out of order (expected " + std::to_string(records.size()) + ")");
    if (row.fields[1].empty()) throw DataError(where + ": empty text");
    auto label = parse_label(row.fields[2]);
    if (!label) throw DataError(where + ": unknown label '" + row.fields[2] + "'");
    records.push_back({id, row.fields[1], *label});
  }
  return Corpus(std::move(records));
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_corpus(ss.str());
}

std::string format_corpus(const Corpus& corpus) {
  std::string out = "id,text,label\n";
  for (const auto& r : corpus.records()) {
    out += csv::join({std::to_string(r.id), r.text, std::string(label_name(r.label))});
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write corpus " + path.string());
  out << format_corpus(corpus);
}

std::array<std::size_t, kNumLabels> class_distribution(const Corpus& corpus) {
  std::array<std::size_t, kNumLabels> counts{};
  for (const auto& r : corpus.records()) ++counts[static_cast<std::size_t>(code(r.label))];
  return counts;
}

std::vector<std::size_t> text_length_histogram(const Corpus& corpus, std::size_t bin_width) {
  if (bin_width == 0) throw ConfigError("bin_width must be >= 1");
  std::vector<std::size_t> bins;
  for (const auto& r : corpus.records()) {
    std::size_t b = utf8::length(r.text) / bin_width;
    if (b >= bins.size()) bins.resize(b + 1, 0);
    ++bins[b];
  }
  return bins;
}

SplitIndices stratified_split(const Corpus& corpus, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must lie in (0, 1)");
  std::array<std::vector<std::size_t>, kNumLabels> by_class;
  for (const auto& r : corpus.records()) by_class[static_cast<std::size_t>(code(r.label))].push_back(r.id);

  SplitIndices split;
  split.seed = seed;
  split.ratio = ratio;
  Rng rng(seed);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& ids = by_class[c];
    if (ids.empty()) continue;
    if (ids.size() < 2)
      throw DataError("class too small to stratify: " + std::string(label_name(label_from_code(static_cast<int>(c)))));
    rng.shuffle(ids);
    const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(ids.size()) + 1e-9));
    split.train_ids.insert(split.train_ids.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test_ids.insert(split.test_ids.end(), ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  }
  std::sort(split.train_ids.begin(), split.train_ids.end());
  std::sort(split.test_ids.begin(), split.test_ids.end());
  return split;
}

}  // namespace xmb
