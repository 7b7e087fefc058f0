#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "xmb/matrix.hpp"

namespace xmb {

struct TsneConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  int exaggeration_iterations = 250;  // also the momentum switch point
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  double init_sigma = 1e-4;
  std::uint64_t seed = 42;

  void validate(std::size_t n) const;
};

struct Affinities {
  Matrix conditional;            // row i: p_{j|i}, zero diagonal
  std::vector<double> entropy;   // achieved entropy in bits per row
  std::vector<double> beta;      // precision 1/(2 sigma^2) per row
};

// Per-row Gaussian bandwidth by bisection on the precision until the row
// entropy (bits) is within `tolerance` of log2(perplexity).
Affinities conditional_affinities(const Matrix& x, double perplexity, double tolerance = 1e-5, int max_steps = 200);

// (P + P^T) / 2n, floored at 1e-12.
Matrix joint_affinities(const Matrix& conditional);

struct TsneResult {
  Matrix coords;  // n x 2
  double kl = 0.0;
  std::vector<std::pair<int, double>> kl_trace;  // (iteration, KL) every 50 iterations and at the end
  Matrix joint;                                  // symmetric P actually optimized
};

double kl_divergence(const Matrix& joint, const Matrix& coords);

/// Exact O(n^2) t-SNE into two dimensions.
///
/// Gradient descent with momentum and per-coordinate gains; the first
/// `exaggeration_iterations` steps use exaggerated P and the initial momentum.
TsneResult tsne_embed(const Matrix& x, const TsneConfig& config);

}  // namespace xmb
