#pragma once

#include <span>

#include "xmb/learn/model.hpp"

namespace xmb::learn {

struct LogRegParams {
  double lambda = 1e-4;
  int max_epochs = 500;
  double tolerance = 1e-5;
  int memory = 10;
  bool standardize = true;
};

/// Mean multinomial cross-entropy plus (lambda / 2) * ||W||_F^2 (bias not
/// penalized). `theta` packs W (classes x d, row-major) followed by the
/// bias. Labels are indices in [0, classes).
double logreg_objective(const Matrix& x, std::span<const int> y, int classes, const Vector& theta, double lambda,
                        Vector* gradient);

/// Multinomial logistic regression fit by full-batch L-BFGS.
class LogRegModel final : public Model {
 public:
  static LogRegModel zero(std::size_t features, std::size_t classes);
  static LogRegModel train(const LogRegParams& params, const Matrix& x, std::span<const int> y, int classes);
  static LogRegModel load(const ArchiveReader& in, const std::string& prefix);

  std::size_t num_features() const override { return static_cast<std::size_t>(weights_.cols()); }
  std::size_t num_classes() const override { return static_cast<std::size_t>(weights_.rows()); }
  Matrix scores(const Matrix& x) const override;
  void save(ArchiveWriter& out, const std::string& prefix) const override;

  const Matrix& weights() const { return weights_; }
  const Vector& bias() const { return bias_; }
  int iterations() const { return iterations_; }
  double final_gradient_norm() const { return grad_norm_; }  // max-norm, standardized space

 private:
  Standardizer standardizer_;
  Matrix weights_;
  Vector bias_;
  int iterations_ = 0;
  double grad_norm_ = 0.0;
};

}  // namespace xmb::learn
