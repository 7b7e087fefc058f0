#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xmb/corpus.hpp"
#include "xmb/matrix.hpp"

namespace xmb {

struct StoreManifest {
  std::string model_id;
  std::size_t dim = 0;
  std::size_t count = 0;
  std::string corpus_digest;
  std::string dtype = "f32le";
  std::vector<std::string> source_order;  // empty for non-fused stores
  // Keys beyond the required six (preprocess_digest, source_dims, ...), kept verbatim.
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json to_json() const;
  static StoreManifest from_json(const nlohmann::json& j);
};

/// Row-major count x dim single-precision matrix bound to a corpus.
///
/// On disk: `<base>.manifest.json` and `<base>.f32` (little-endian IEEE-754,
/// row-major, no header). Row i belongs to corpus record i.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(StoreManifest manifest, std::vector<float> values);

  const StoreManifest& manifest() const { return manifest_; }
  std::span<const float> values() const { return values_; }
  std::span<const float> row(std::size_t i) const;
  std::size_t count() const { return manifest_.count; }
  std::size_t dim() const { return manifest_.dim; }

  Matrix to_matrix() const;
  Matrix rows(std::span<const std::size_t> ids) const;

 private:
  StoreManifest manifest_;
  std::vector<float> values_;
};

std::filesystem::path manifest_path(const std::filesystem::path& base);
std::filesystem::path matrix_path(const std::filesystem::path& base);

// Throws DataError on size mismatch, non-finite values, or (when given) a
// corpus digest that differs from the manifest's.
EmbeddingStore read_store(const std::filesystem::path& base,
                          const std::optional<std::string>& expected_digest = std::nullopt);
void write_store(const EmbeddingStore& store, const std::filesystem::path& base);

std::string manifest_text(const StoreManifest& m);
std::string matrix_bytes(std::span<const float> values);

struct FusionSpec {
  std::vector<std::filesystem::path> inputs;
  std::string output_model_id;
};

// Row i of the result is row i of every input laid end to end, in input order.
EmbeddingStore fuse_concat(const std::string& output_model_id, std::span<const EmbeddingStore> stores);
EmbeddingStore fuse_concat(const FusionSpec& spec, std::span<const EmbeddingStore> stores);

struct AlignmentReport {
  bool aligned = false;
  bool count_matches = false;
  bool digest_matches = false;
  std::string details;
};

AlignmentReport verify_alignment(const EmbeddingStore& store, const Corpus& corpus);

// Writes a file through a sibling temp file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace xmb
