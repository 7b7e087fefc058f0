#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xmb/matrix.hpp"

namespace xmb::learn {

inline constexpr int kArchiveVersion = 1;

/// Versioned model container: `<base>.model.json` (structure, spec, block
/// table) and `<base>.model.f64` (concatenated little-endian f64 blocks).
/// Parameters are stored in double precision so a reloaded model predicts
/// bit-identically to the one that was saved.
class ArchiveWriter {
 public:
  void put(const std::string& name, std::span<const double> values);
  void put(const std::string& name, const Matrix& m);
  void put(const std::string& name, const Vector& v);
  void put_ints(const std::string& name, std::span<const int> values);

  nlohmann::json& meta() { return meta_; }
  void save(const std::filesystem::path& base) const;

 private:
  nlohmann::json meta_ = nlohmann::json::object();
  nlohmann::json blocks_ = nlohmann::json::array();
  std::vector<double> data_;
};

class ArchiveReader {
 public:
  static ArchiveReader load(const std::filesystem::path& base);

  const nlohmann::json& meta() const { return meta_; }
  std::vector<double> get(const std::string& name) const;
  Matrix get_matrix(const std::string& name, Eigen::Index rows, Eigen::Index cols) const;
  Vector get_vector(const std::string& name) const;
  std::vector<int> get_ints(const std::string& name) const;

 private:
  nlohmann::json meta_;
  std::map<std::string, std::pair<std::size_t, std::size_t>> index_;  // offset, count
  std::vector<double> data_;
};

}  // namespace xmb::learn
