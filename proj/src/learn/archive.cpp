#include "xmb/learn/archive.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "xmb/error.hpp"
#include "xmb/store.hpp"

namespace xmb::learn {

void ArchiveWriter::put(const std::string& name, std::span<const double> values) {
  blocks_.push_back({{"name", name}, {"offset", data_.size()}, {"count", values.size()}});
  data_.insert(data_.end(), values.begin(), values.end());
}

void ArchiveWriter::put(const std::string& name, const Matrix& m) {
  put(name, std::span<const double>(m.data(), static_cast<std::size_t>(m.size())));
}

void ArchiveWriter::put(const std::string& name, const Vector& v) {
  put(name, std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

void ArchiveWriter::put_ints(const std::string& name, std::span<const int> values) {
  std::vector<double> d(values.begin(), values.end());
  put(name, d);
}

void ArchiveWriter::save(const std::filesystem::path& base) const {
  nlohmann::json j;
  j["format"] = "xmb-model";
  j["version"] = kArchiveVersion;
  j["dtype"] = "f64le";
  j["meta"] = meta_;
  j["blocks"] = blocks_;
  std::string bytes(data_.size() * 8, '\0');
  for (std::size_t i = 0; i < data_.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(data_[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + static_cast<std::size_t>(b)] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  write_file_atomic(base.string() + ".model.f64", bytes);
  write_file_atomic(base.string() + ".model.json", j.dump(1) + "\n");
}

ArchiveReader ArchiveReader::load(const std::filesystem::path& base) {
  ArchiveReader r;
  std::ifstream mj(base.string() + ".model.json", std::ios::binary);
  if (!mj) throw DataError("cannot open " + base.string() + ".model.json");
  nlohmann::json j;
  try {
    mj >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model manifest: ") + e.what());
  }
  if (j.value("format", "") != "xmb-model") throw DataError("not a model archive: " + base.string());
  if (j.value("version", 0) != kArchiveVersion)
    throw DataError("unsupported model archive version " + std::to_string(j.value("version", 0)));
  r.meta_ = j.at("meta");
  std::size_t total = 0;
  for (const auto& b : j.at("blocks")) {
    auto off = b.at("offset").get<std::size_t>();
    auto cnt = b.at("count").get<std::size_t>();
    r.index_[b.at("name").get<std::string>()] = {off, cnt};
    total = std::max(total, off + cnt);
  }
  std::ifstream in(base.string() + ".model.f64", std::ios::binary);
  if (!in) throw DataError("cannot open " + base.string() + ".model.f64");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  if (bytes.size() % 8 != 0 || bytes.size() / 8 < total) throw DataError("model block file size mismatch");
  r.data_.resize(bytes.size() / 8);
  for (std::size_t i = 0; i < r.data_.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + static_cast<std::size_t>(b)]))
              << (8 * b);
    r.data_[i] = std::bit_cast<double>(bits);
  }
  return r;
}

std::vector<double> ArchiveReader::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw DataError("model archive has no block '" + name + "'");
  auto [off, cnt] = it->second;
  return std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(off),
                             data_.begin() + static_cast<std::ptrdiff_t>(off + cnt));
}

Matrix ArchiveReader::get_matrix(const std::string& name, Eigen::Index rows, Eigen::Index cols) const {
  auto v = get(name);
  if (static_cast<Eigen::Index>(v.size()) != rows * cols) throw DataError("block '" + name + "' has wrong size");
  return Eigen::Map<Matrix>(v.data(), rows, cols);
}

Vector ArchiveReader::get_vector(const std::string& name) const {
  auto v = get(name);
  return Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<int> ArchiveReader::get_ints(const std::string& name) const {
  auto v = get(name);
  return std::vector<int>(v.begin(), v.end());
}

}  // namespace xmb::learn
