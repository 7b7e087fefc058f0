#include "xmb/store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "xmb/error.hpp"

namespace xmb {

namespace {

const char* kRequiredKeys[] = {"model_id", "dim", "count", "corpus_digest", "dtype", "source_order"};

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

nlohmann::json StoreManifest::to_json() const {
  nlohmann::json j = extra.is_object() ? extra : nlohmann::json::object();
  j["model_id"] = model_id;
  j["dim"] = dim;
  j["count"] = count;
  j["corpus_digest"] = corpus_digest;
  j["dtype"] = dtype;
  j["source_order"] = source_order;
  return j;
}

StoreManifest StoreManifest::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("manifest is not a JSON object");
  for (const char* k : kRequiredKeys)
    if (!j.contains(k)) throw DataError(std::string("manifest missing key '") + k + "'");
  StoreManifest m;
  try {
    m.model_id = j.at("model_id").get<std::string>();
    m.dim = j.at("dim").get<std::size_t>();
    m.count = j.at("count").get<std::size_t>();
    m.corpus_digest = j.at("corpus_digest").get<std::string>();
    m.dtype = j.at("dtype").get<std::string>();
    m.source_order = j.at("source_order").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
  if (m.dtype != "f32le") throw DataError("unsupported dtype '" + m.dtype + "'");
  if (m.dim == 0 || m.count == 0) throw DataError("manifest dim and count must be positive");
  m.extra = nlohmann::json::object();
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool required = false;
    for (const char* k : kRequiredKeys) required = required || it.key() == k;
    if (!required) m.extra[it.key()] = it.value();
  }
  return m;
}

EmbeddingStore::EmbeddingStore(StoreManifest manifest, std::vector<float> values)
    : manifest_(std::move(manifest)), values_(std::move(values)) {
  if (values_.size() != manifest_.count * manifest_.dim) throw DataError("matrix size mismatch");
}

std::span<const float> EmbeddingStore::row(std::size_t i) const {
  return std::span<const float>(values_).subspan(i * manifest_.dim, manifest_.dim);
}

Matrix EmbeddingStore::to_matrix() const {
  Matrix m(static_cast<Eigen::Index>(count()), static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < values_.size(); ++i) m.data()[i] = values_[i];
  return m;
}

Matrix EmbeddingStore::rows(std::span<const std::size_t> ids) const {
  Matrix m(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(dim()));
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= count()) throw DataError("row " + std::to_string(ids[r]) + " out of range");
    auto src = row(ids[r]);
    for (std::size_t c = 0; c < dim(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = src[c];
  }
  return m;
}

std::filesystem::path manifest_path(const std::filesystem::path& base) {
  return base.string() + ".manifest.json";
}
std::filesystem::path matrix_path(const std::filesystem::path& base) { return base.string() + ".f32"; }

std::string manifest_text(const StoreManifest& m) { return m.to_json().dump(2) + "\n"; }

std::string matrix_bytes(std::span<const float> values) {
  std::string out(values.size() * 4, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(values[i]);
    for (int b = 0; b < 4; ++b) out[i * 4 + static_cast<std::size_t>(b)] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  return out;
}

EmbeddingStore read_store(const std::filesystem::path& base, const std::optional<std::string>& expected_digest) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(manifest_path(base)));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(manifest_path(base).string() + ": " + e.what());
  }
  StoreManifest m = StoreManifest::from_json(j);
  std::string bytes = read_file(matrix_path(base));
  if (bytes.size() != m.count * m.dim * 4)
    throw DataError("matrix size mismatch: " + matrix_path(base).string() + " has " + std::to_string(bytes.size()) +
                    " bytes, manifest implies " + std::to_string(m.count * m.dim * 4));
  std::vector<float> values(m.count * m.dim);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b)
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + static_cast<std::size_t>(b)]))
              << (8 * b);
    values[i] = std::bit_cast<float>(bits);
    if (!std::isfinite(values[i]))
      throw DataError("non-finite value at row " + std::to_string(i / m.dim) + ", column " +
                      std::to_string(i % m.dim) + " in " + matrix_path(base).string());
  }
  if (expected_digest && *expected_digest != m.corpus_digest)
    throw DataError("corpus digest mismatch for store " + base.string() + ": manifest " + m.corpus_digest +
                    ", corpus " + *expected_digest);
  return EmbeddingStore(std::move(m), std::move(values));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_store(const EmbeddingStore& store, const std::filesystem::path& base) {
  for (std::size_t i = 0; i < store.values().size(); ++i)
    if (!std::isfinite(store.values()[i]))
      throw DataError("non-finite value at row " + std::to_string(i / store.dim()) + ", column " +
                      std::to_string(i % store.dim()));
  write_file_atomic(matrix_path(base), matrix_bytes(store.values()));
  write_file_atomic(manifest_path(base), manifest_text(store.manifest()));
}

EmbeddingStore fuse_concat(const std::string& output_model_id, std::span<const EmbeddingStore> stores) {
  if (stores.size() < 2) throw ConfigError("fusion needs at least two input stores");
  const auto& first = stores.front().manifest();
  std::size_t total_dim = 0;
  StoreManifest out;
  out.model_id = output_model_id;
  out.count = first.count;
  out.corpus_digest = first.corpus_digest;
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& s : stores) {
    const auto& m = s.manifest();
    if (m.count != first.count)
      throw DataError("count mismatch: " + m.model_id + " has " + std::to_string(m.count) + " rows, " +
                      first.model_id + " has " + std::to_string(first.count));
    if (m.corpus_digest != first.corpus_digest)
      throw DataError("corpus digest mismatch between " + first.model_id + " and " + m.model_id);
    total_dim += m.dim;
    // Fused inputs contribute their own sources so nesting flattens.
    if (m.source_order.empty()) {
      out.source_order.push_back(m.model_id);
      dims.push_back(m.dim);
    } else {
      out.source_order.insert(out.source_order.end(), m.source_order.begin(), m.source_order.end());
      if (m.extra.contains("source_dims"))
        for (const auto& d : m.extra["source_dims"]) dims.push_back(d);
      else
        dims.push_back(m.dim);
    }
    if (m.extra.contains("preprocess_digest") && !out.extra.contains("preprocess_digest"))
      out.extra["preprocess_digest"] = m.extra["preprocess_digest"];
  }
  out.dim = total_dim;
  out.extra["source_dims"] = dims;

  std::vector<float> values(out.count * out.dim);
  for (std::size_t r = 0; r < out.count; ++r) {
    std::size_t offset = r * out.dim;
    for (const auto& s : stores) {
      auto row = s.row(r);
      std::memcpy(values.data() + offset, row.data(), row.size() * sizeof(float));
      offset += row.size();
    }
  }
  return EmbeddingStore(std::move(out), std::move(values));
}

EmbeddingStore fuse_concat(const FusionSpec& spec, std::span<const EmbeddingStore> stores) {
  if (spec.inputs.size() != stores.size()) throw ConfigError("fusion spec and store list differ in length");
  return fuse_concat(spec.output_model_id, stores);
}

AlignmentReport verify_alignment(const EmbeddingStore& store, const Corpus& corpus) {
  AlignmentReport r;
  r.count_matches = store.count() == corpus.size();
  r.digest_matches = store.manifest().corpus_digest == corpus.digest();
  r.aligned = r.count_matches && r.digest_matches;
  if (!r.count_matches)
    r.details += "count " + std::to_string(store.count()) + " != corpus size " + std::to_string(corpus.size()) + "; ";
  if (!r.digest_matches)
    r.details += "digest " + store.manifest().corpus_digest + " != corpus digest " + corpus.digest();
  return r;
}

}  // namespace xmb
