#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace xmb {

// Integer codes are frozen: Negative = 0, Positive = 1, Neutral = 2.
enum class SentimentLabel : int { Negative = 0, Positive = 1, Neutral = 2 };

inline constexpr int kNumLabels = 3;
inline constexpr std::array<SentimentLabel, kNumLabels> kAllLabels = {
    SentimentLabel::Negative, SentimentLabel::Positive, SentimentLabel::Neutral};

constexpr int code(SentimentLabel l) { return static_cast<int>(l); }
SentimentLabel label_from_code(int code);
std::string_view label_name(SentimentLabel l);            // "negative", ...
std::optional<SentimentLabel> parse_label(std::string_view s);  // case-insensitive

struct CommentRecord {
  std::uint64_t id = 0;
  std::string text;
  SentimentLabel label = SentimentLabel::Negative;
};

class Corpus {
 public:
  Corpus() = default;
  // Validates ids (0..n-1 in order) and non-empty texts, then computes the digest.
  explicit Corpus(std::vector<CommentRecord> records);

  const std::vector<CommentRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const CommentRecord& operator[](std::size_t i) const { return records_[i]; }
  const std::string& digest() const { return digest_; }

  std::vector<int> label_codes() const;

 private:
  std::vector<CommentRecord> records_;
  std::string digest_;
};

// SHA-256 over "id\x1Ftext\x1Flabel\x1E" per record, label spelled lowercase.
std::string corpus_digest(const std::vector<CommentRecord>& records);

Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::string_view csv_text);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
std::string format_corpus(const Corpus& corpus);

std::array<std::size_t, kNumLabels> class_distribution(const Corpus& corpus);

// Bin b counts records whose code-point length lies in [b*bin_width, (b+1)*bin_width).
std::vector<std::size_t> text_length_histogram(const Corpus& corpus, std::size_t bin_width);

struct SplitIndices {
  std::vector<std::size_t> train_ids;  // ascending
  std::vector<std::size_t> test_ids;   // ascending
  std::uint64_t seed = 0;
  double ratio = 0.8;
};

// Per-class split. Classes are visited in code order; each class's ids
// (ascending) are shuffled with one Rng(seed) shared across classes, and the
// first floor(ratio * count + 1e-9) shuffled ids go to train, the rest to test.
SplitIndices stratified_split(const Corpus& corpus, double ratio, std::uint64_t seed);

}  // namespace xmb
