#pragma once

#include <cstddef>
#include <filesystem>
#include <variant>

#include "xmb/matrix.hpp"

namespace xmb {

struct ComponentCount {
  std::size_t k;
};
struct VarianceFraction {
  double fraction;
};
using PcaTarget = std::variant<ComponentCount, VarianceFraction>;

struct PcaModel {
  RowVector mean;             // 1 x d
  Matrix components;          // k x d, orthonormal rows
  Vector explained_variance;  // k, non-increasing (n - 1 denominator)
  Vector explained_ratio;     // k, share of total variance

  std::size_t input_dim() const { return static_cast<std::size_t>(components.cols()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(components.rows()); }
};

/// Principal components of the rows of `train` via the covariance eigensolve.
///
/// Each component's sign is fixed so that its largest-magnitude entry is
/// positive (the first such entry on exact ties). With a VarianceFraction
/// target, k is the smallest prefix whose cumulative ratio reaches the
/// fraction, capped at the numerical rank and at min(n - 1, d).
PcaModel fit_pca(const Matrix& train, const PcaTarget& target);

Matrix transform_pca(const PcaModel& model, const Matrix& x);
Matrix inverse_pca(const PcaModel& model, const Matrix& reduced);

// Same codec as embedding stores: <base>.manifest.json plus f32 blocks
// <base>.mean.f32, <base>.components.f32, <base>.variance.f32.
void save_pca(const PcaModel& model, const std::filesystem::path& base);
PcaModel load_pca(const std::filesystem::path& base);

}  // namespace xmb
