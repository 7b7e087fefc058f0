#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "xmb/config.hpp"
#include "xmb/corpus.hpp"

namespace xmb::preproc {

enum class Stage { Tokenize, StopwordRemoval, PunctDigitRemoval, Stem, Normalize };

std::string_view stage_name(Stage s);  // tokenize, stopwords, punct_digits, stem, normalize
Stage parse_stage(std::string_view name);

struct TokenStream {
  std::vector<std::string> tokens;
  std::uint64_t source_id = 0;
  // Set when the input produced tokens but cleaning removed all of them.
  bool emptied = false;
};

// Suffixes ordered longest-first (by code points); ties keep file order.
using SuffixRules = std::vector<std::u32string>;

struct PreprocessConfig {
  std::vector<Stage> stages = {Stage::Tokenize, Stage::StopwordRemoval, Stage::PunctDigitRemoval, Stage::Stem,
                               Stage::Normalize};
  std::set<std::string> stopwords;  // normalized
  SuffixRules stem_rules;
  std::size_t min_stem_length = 2;

  // Shipped tables from the data directory.
  static PreprocessConfig defaults();
  // Reads keys stages, stopwords, stem_rules, min_stem_length (optionally
  // prefixed with "preproc."); unspecified tables fall back to the shipped ones.
  static PreprocessConfig from_config(const KeyValueConfig& cfg);

  void validate() const;
};

std::filesystem::path data_dir();

// One word per line, UTF-8; blank lines and '#' comments skipped. Entries are normalized.
std::set<std::string> load_stopwords(const std::filesystem::path& path);
SuffixRules load_stem_rules(const std::filesystem::path& path);
SuffixRules sort_rules(SuffixRules rules);

// Splits on Unicode White_Space; danda (U+0964) and double danda (U+0965)
// are boundaries and are dropped.
TokenStream tokenize(std::string_view text, std::uint64_t source_id = 0);

TokenStream remove_stopwords(const TokenStream& stream, const std::set<std::string>& stopwords);

// Removes every code point of general category P* or N*; drops tokens left empty.
TokenStream strip_punct_digits(const TokenStream& stream);

/// Single-pass suffix stripping.
///
/// Rules are tried in order; a rule fires when the token ends with the
/// suffix, the remainder has at least min_len code points, and the remainder
/// itself is not strippable by any rule. The first firing rule wins. Tokens
/// shorter than min_len are returned unchanged. Because a result is never
/// strippable, stem(stem(t)) == stem(t).
std::string stem(std::string_view token, const SuffixRules& rules, std::size_t min_len);

/// Text normalization, in this order:
///   1. fold: U+200B and U+FEFF are removed; U+200C (ZWNJ) and U+200D (ZWJ)
///      are kept only directly after U+09CD (hasanta), where they select the
///      conjunct form, and removed elsewhere;
///   2. Unicode NFC;
///   3. every run of White_Space collapses to one U+0020.
std::string normalize(std::string_view text);
std::u32string fold_zero_width(std::u32string_view text);
// Token form: each token normalized; tokens that become empty are dropped.
TokenStream normalize(const TokenStream& stream);

TokenStream preprocess(std::string_view text, const PreprocessConfig& config, std::uint64_t source_id = 0);

struct CleanedCorpus {
  std::vector<TokenStream> streams;
  std::size_t emptied_count = 0;
  std::string digest;  // sha256 over cleaned texts, same framing as the corpus digest
};

CleanedCorpus preprocess_corpus(const Corpus& corpus, const PreprocessConfig& config);
std::string join_tokens(const std::vector<std::string>& tokens);
// CSV with header id,text,label,empty_after_cleaning.
void write_cleaned_csv(const Corpus& corpus, const CleanedCorpus& cleaned, const std::filesystem::path& path);

}  // namespace xmb::preproc
