#include "xmb/preproc.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "xmb/digest.hpp"
#include "xmb/error.hpp"
#include "xmb/text/csv.hpp"
#include "xmb/text/utf8.hpp"

namespace xmb::preproc {

namespace {

constexpr char32_t kDanda = 0x0964;
constexpr char32_t kDoubleDanda = 0x0965;
constexpr char32_t kHasanta = 0x09CD;
constexpr char32_t kZwnj = 0x200C;
constexpr char32_t kZwj = 0x200D;
constexpr char32_t kZwsp = 0x200B;
constexpr char32_t kBom = 0xFEFF;

std::vector<std::string> read_table_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open table " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!utf8::is_valid(t)) throw DataError(path.string() + ": invalid UTF-8 entry");
    out.push_back(t);
  }
  return out;
}

bool ends_with(std::u32string_view s, std::u32string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool strippable(std::u32string_view s, const SuffixRules& rules, std::size_t min_len) {
  for (const auto& r : rules)
    if (!r.empty() && ends_with(s, r) && s.size() - r.size() >= min_len) return true;
  return false;
}

}  // namespace

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::Tokenize: return "tokenize";
    case Stage::StopwordRemoval: return "stopwords";
    case Stage::PunctDigitRemoval: return "punct_digits";
    case Stage::Stem: return "stem";
    case Stage::Normalize: return "normalize";
  }
  return "tokenize";
}

Stage parse_stage(std::string_view name) {
  for (Stage s : {Stage::Tokenize, Stage::StopwordRemoval, Stage::PunctDigitRemoval, Stage::Stem, Stage::Normalize})
    if (stage_name(s) == name) return s;
  throw ConfigError("unknown preprocessing stage '" + std::string(name) + "'");
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("XMB_DATA_DIR"); env && *env) return env;
  return XMB_DATA_DIR;
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::set<std::string> out;
  for (const auto& w : read_table_lines(path)) {
    auto n = normalize(w);
    if (!n.empty()) out.insert(n);
  }
  return out;
}

SuffixRules sort_rules(SuffixRules rules) {
  std::stable_sort(rules.begin(), rules.end(),
                   [](const std::u32string& a, const std::u32string& b) { return a.size() > b.size(); });
  return rules;
}

SuffixRules load_stem_rules(const std::filesystem::path& path) {
  SuffixRules rules;
  for (const auto& s : read_table_lines(path)) rules.push_back(utf8::decode(utf8::nfc(s)));
  return sort_rules(std::move(rules));
}

PreprocessConfig PreprocessConfig::defaults() {
  PreprocessConfig c;
  c.stopwords = load_stopwords(data_dir() / "stopwords_bn.txt");
  c.stem_rules = load_stem_rules(data_dir() / "stem_rules_bn.txt");
  return c;
}

PreprocessConfig PreprocessConfig::from_config(const KeyValueConfig& cfg) {
  auto lookup = [&](const std::string& k) -> std::optional<std::string> {
    if (auto v = cfg.get("preproc." + k)) return v;
    return cfg.get(k);
  };
  PreprocessConfig c;
  if (auto v = lookup("stages")) {
    c.stages.clear();
    for (const auto& s : split_list(*v)) c.stages.push_back(parse_stage(s));
  }
  auto sw = lookup("stopwords");
  c.stopwords = load_stopwords(sw ? cfg.resolve_path(*sw) : data_dir() / "stopwords_bn.txt");
  auto sr = lookup("stem_rules");
  c.stem_rules = load_stem_rules(sr ? cfg.resolve_path(*sr) : data_dir() / "stem_rules_bn.txt");
  if (auto v = lookup("min_stem_length")) {
    auto n = parse_int(*v, "min_stem_length");
    if (n < 1) throw ConfigError("min_stem_length must be >= 1");
    c.min_stem_length = static_cast<std::size_t>(n);
  }
  c.validate();
  return c;
}

void PreprocessConfig::validate() const {
  if (stages.empty()) throw ConfigError("preprocessing needs at least one stage");
  if (min_stem_length < 1) throw ConfigError("min_stem_length must be >= 1");
  auto tok = std::find(stages.begin(), stages.end(), Stage::Tokenize);
  if (tok == stages.end()) throw ConfigError("preprocessing stages must include tokenize");
  if (std::count(stages.begin(), stages.end(), Stage::Tokenize) > 1)
    throw ConfigError("tokenize may appear only once");
  for (auto it = stages.begin(); it != tok; ++it)
    if (*it != Stage::Normalize)
      throw ConfigError("stage '" + std::string(stage_name(*it)) + "' needs tokens; place it after tokenize");
}

TokenStream tokenize(std::string_view text, std::uint64_t source_id) {
  TokenStream out;
  out.source_id = source_id;
  std::u32string current;
  auto flush = [&] {
    if (!current.empty()) out.tokens.push_back(utf8::encode(current));
    current.clear();
  };
  for (char32_t c : utf8::decode(text)) {
    if (utf8::is_whitespace(c) || c == kDanda || c == kDoubleDanda) flush();
    else current.push_back(c);
  }
  flush();
  return out;
}

TokenStream remove_stopwords(const TokenStream& stream, const std::set<std::string>& stopwords) {
  TokenStream out;
  out.source_id = stream.source_id;
  for (const auto& t : stream.tokens)
    if (!stopwords.count(t)) out.tokens.push_back(t);
  out.emptied = stream.emptied || (!stream.tokens.empty() && out.tokens.empty());
  return out;
}

TokenStream strip_punct_digits(const TokenStream& stream) {
  TokenStream out;
  out.source_id = stream.source_id;
  for (const auto& t : stream.tokens) {
    std::u32string kept;
    for (char32_t c : utf8::decode(t))
      if (!utf8::is_punct_or_number(c)) kept.push_back(c);
    if (!kept.empty()) out.tokens.push_back(utf8::encode(kept));
  }
  out.emptied = stream.emptied || (!stream.tokens.empty() && out.tokens.empty());
  return out;
}

std::string stem(std::string_view token, const SuffixRules& rules, std::size_t min_len) {
  auto cps = utf8::decode(token);
  if (cps.size() < min_len) return std::string(token);
  for (const auto& r : rules) {
    if (r.empty() || !ends_with(cps, r) || cps.size() - r.size() < min_len) continue;
    std::u32string_view rest(cps.data(), cps.size() - r.size());
    if (strippable(rest, rules, min_len)) continue;
    return utf8::encode(rest);
  }
  return std::string(token);
}

std::u32string fold_zero_width(std::u32string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (char32_t c : text) {
    if (c == kZwsp || c == kBom) continue;
    if (c == kZwnj || c == kZwj) {
      if (!out.empty() && out.back() == kHasanta) out.push_back(c);
      continue;
    }
    out.push_back(c);
  }
  return out;
}

std::string normalize(std::string_view text) {
  auto folded = utf8::encode(fold_zero_width(utf8::decode(text)));
  auto composed = utf8::decode(utf8::nfc(folded));
  std::u32string out;
  out.reserve(composed.size());
  bool in_space = false;
  for (char32_t c : composed) {
    if (utf8::is_whitespace(c)) {
      if (!in_space) out.push_back(U' ');
      in_space = true;
    } else {
      out.push_back(c);
      in_space = false;
    }
  }
  return utf8::encode(out);
}

TokenStream normalize(const TokenStream& stream) {
  TokenStream out;
  out.source_id = stream.source_id;
  for (const auto& t : stream.tokens) {
    auto n = normalize(t);
    // A token holds no whitespace, so normalization cannot introduce a split.
    if (!n.empty()) out.tokens.push_back(std::move(n));
  }
  out.emptied = stream.emptied || (!stream.tokens.empty() && out.tokens.empty());
  return out;
}

TokenStream preprocess(std::string_view text, const PreprocessConfig& config, std::uint64_t source_id) {
  config.validate();
  std::string pre_text(text);
  TokenStream stream;
  bool tokenized = false;
  for (Stage s : config.stages) {
    switch (s) {
      case Stage::Tokenize:
        stream = tokenize(pre_text, source_id);
        tokenized = true;
        break;
      case Stage::Normalize:
        if (tokenized) stream = normalize(stream);
        else pre_text = normalize(pre_text);
        break;
      case Stage::StopwordRemoval:
        stream = remove_stopwords(stream, config.stopwords);
        break;
      case Stage::PunctDigitRemoval:
        stream = strip_punct_digits(stream);
        break;
      case Stage::Stem: {
        TokenStream next;
        next.source_id = stream.source_id;
        next.emptied = stream.emptied;
        for (const auto& t : stream.tokens) next.tokens.push_back(stem(t, config.stem_rules, config.min_stem_length));
        stream = std::move(next);
        break;
      }
    }
  }
  return stream;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

CleanedCorpus preprocess_corpus(const Corpus& corpus, const PreprocessConfig& config) {
  CleanedCorpus out;
  out.streams.reserve(corpus.size());
  Sha256 h;
  for (const auto& r : corpus.records()) {
    auto s = preprocess(r.text, config, r.id);
    if (s.tokens.empty()) s.emptied = true;
    if (s.emptied) ++out.emptied_count;
    h.update(std::to_string(r.id));
    h.update("\x1F");
    h.update(join_tokens(s.tokens));
    h.update("\x1F");
    h.update(label_name(r.label));
    h.update("\x1E");
    out.streams.push_back(std::move(s));
  }
  out.digest = h.hex();
  return out;
}

void write_cleaned_csv(const Corpus& corpus, const CleanedCorpus& cleaned, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "id,text,label,empty_after_cleaning\n";
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& r = corpus[i];
    out << csv::join({std::to_string(r.id), join_tokens(cleaned.streams[i].tokens), std::string(label_name(r.label)),
                      cleaned.streams[i].emptied ? "1" : "0"})
        << '\n';
  }
}

}  // namespace xmb::preproc
