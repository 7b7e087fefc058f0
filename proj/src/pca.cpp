#include "xmb/pca.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "xmb/error.hpp"
#include "xmb/store.hpp"

namespace xmb {

PcaModel fit_pca(const Matrix& train, const PcaTarget& target) {
  const auto n = train.rows();
  const auto d = train.cols();
  if (n < 2) throw DataError("PCA needs at least 2 rows");
  if (d < 1) throw DataError("PCA needs at least 1 column");
  if (!train.allFinite()) throw DataError("PCA input contains non-finite values");
  const auto max_k = static_cast<std::size_t>(std::min<Eigen::Index>(n - 1, d));

  PcaModel model;
  model.mean = train.colwise().mean();
  Matrix centered = train.rowwise() - model.mean;
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);

  const double total = cov.trace();
  const double scale = std::max(1.0, train.cwiseAbs2().mean());
  if (!(total > 1e-24 * scale)) throw DataError("degenerate covariance");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw DataError("covariance eigendecomposition failed");
  // Ascending from Eigen; reverse to descending and clamp round-off negatives.
  Vector values = eig.eigenvalues().reverse().cwiseMax(0.0);
  Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();

  std::size_t rank = 0;
  while (rank < static_cast<std::size_t>(d) && values(static_cast<Eigen::Index>(rank)) > 1e-12 * values(0)) ++rank;
  rank = std::min(rank, max_k);

  std::size_t k = 0;
  if (const auto* c = std::get_if<ComponentCount>(&target)) {
    if (c->k < 1 || c->k > max_k)
      throw ConfigError("PCA component count " + std::to_string(c->k) + " outside [1, " + std::to_string(max_k) + "]");
    k = c->k;
  } else {
    const double f = std::get<VarianceFraction>(target).fraction;
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("PCA variance fraction must lie in (0, 1]");
    double cumulative = 0.0;
    while (k < rank) {
      cumulative += values(static_cast<Eigen::Index>(k)) / total;
      ++k;
      if (cumulative >= f - 1e-12) break;
    }
    k = std::max<std::size_t>(k, 1);
  }

  const auto kk = static_cast<Eigen::Index>(k);
  model.components.resize(kk, d);
  model.explained_variance.resize(kk);
  model.explained_ratio.resize(kk);
  for (Eigen::Index i = 0; i < kk; ++i) {
    Eigen::VectorXd v = vectors.col(i);
    Eigen::Index arg = 0;
    for (Eigen::Index j = 1; j < d; ++j)
      if (std::abs(v(j)) > std::abs(v(arg))) arg = j;
    if (v(arg) < 0) v = -v;
    model.components.row(i) = v.transpose();
    model.explained_variance(i) = values(i);
    model.explained_ratio(i) = values(i) / total;
  }
  return model;
}

Matrix transform_pca(const PcaModel& model, const Matrix& x) {
  if (x.cols() != model.components.cols())
    throw DataError("PCA transform: width " + std::to_string(x.cols()) + " != model width " +
                    std::to_string(model.components.cols()));
  return (x.rowwise() - model.mean) * model.components.transpose();
}

Matrix inverse_pca(const PcaModel& model, const Matrix& reduced) {
  if (reduced.cols() != model.components.rows())
    throw DataError("PCA inverse: width " + std::to_string(reduced.cols()) + " != k " +
                    std::to_string(model.components.rows()));
  Matrix out = reduced * model.components;
  out.rowwise() += model.mean;
  return out;
}

namespace {

std::vector<float> to_f32(const double* p, std::size_t n) {
  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<float>(p[i]);
  return out;
}

std::vector<double> read_f32(const std::filesystem::path& p, std::size_t expected) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  if (bytes.size() != expected * 4) throw DataError("matrix size mismatch: " + p.string());
  std::vector<double> out(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b)
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + static_cast<std::size_t>(b)]))
              << (8 * b);
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

}  // namespace

void save_pca(const PcaModel& model, const std::filesystem::path& base) {
  nlohmann::json j;
  j["model_id"] = "pca";
  j["dtype"] = "f32le";
  j["input_dim"] = model.input_dim();
  j["output_dim"] = model.output_dim();
  std::vector<double> ratio(model.explained_ratio.data(), model.explained_ratio.data() + model.explained_ratio.size());
  j["explained_ratio"] = ratio;
  const auto s = base.string();
  write_file_atomic(s + ".mean.f32", matrix_bytes(to_f32(model.mean.data(), static_cast<std::size_t>(model.mean.size()))));
  write_file_atomic(s + ".components.f32",
                    matrix_bytes(to_f32(model.components.data(), static_cast<std::size_t>(model.components.size()))));
  write_file_atomic(s + ".variance.f32", matrix_bytes(to_f32(model.explained_variance.data(),
                                                             static_cast<std::size_t>(model.explained_variance.size()))));
  write_file_atomic(s + ".manifest.json", j.dump(2) + "\n");
}

PcaModel load_pca(const std::filesystem::path& base) {
  const auto s = base.string();
  std::ifstream in(s + ".manifest.json");
  if (!in) throw DataError("cannot open " + s + ".manifest.json");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed PCA manifest: ") + e.what());
  }
  const auto d = j.at("input_dim").get<std::size_t>();
  const auto k = j.at("output_dim").get<std::size_t>();
  PcaModel m;
  auto mean = read_f32(s + ".mean.f32", d);
  auto comps = read_f32(s + ".components.f32", k * d);
  auto var = read_f32(s + ".variance.f32", k);
  auto ratio = j.at("explained_ratio").get<std::vector<double>>();
  if (ratio.size() != k) throw DataError("PCA manifest explained_ratio length mismatch");
  m.mean = Eigen::Map<RowVector>(mean.data(), static_cast<Eigen::Index>(d));
  m.components = Eigen::Map<Matrix>(comps.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
  m.explained_variance = Eigen::Map<Vector>(var.data(), static_cast<Eigen::Index>(k));
  m.explained_ratio = Eigen::Map<Vector>(ratio.data(), static_cast<Eigen::Index>(k));
  return m;
}

}  // namespace xmb
