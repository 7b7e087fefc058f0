#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "xmb/corpus.hpp"
#include "xmb/matrix.hpp"
#include "xmb/metrics.hpp"
#include "xmb/store.hpp"

namespace fixture {

struct Labeled {
  xmb::Matrix x;
  std::vector<int> y;
};

// Class c (c = i % 3) is N(center_c, I) with center_c = spacing / sqrt(2) * e_c,
// so the centers are `spacing` standard deviations apart pairwise.
Labeled blobs(std::size_t n, std::size_t d, double spacing, std::uint64_t seed);

// 3-class blobs, n = 300, d = 10, 5 sigma apart, seed 0.
Labeled blob_fixture();
// 3 clusters, n = 60, d = 10, 10 sigma apart, seed 1.
Labeled tsne_fixture();

struct Split {
  Labeled train;
  Labeled test;
};
// Stratified 80:20 split of a labeled set, via a placeholder corpus.
Split split(const Labeled& data, double ratio = 0.8, std::uint64_t seed = 0);

xmb::Corpus placeholder_corpus(const std::vector<int>& labels);

xmb::Matrix select_rows(const xmb::Matrix& x, const std::vector<std::size_t>& ids);

// A fresh empty directory under the system temp directory.
std::filesystem::path temp_dir(const std::string& tag);

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& s);

xmb::EmbeddingStore make_store(const std::string& model_id, const xmb::Matrix& x, const std::string& digest);

// Independent reference computations.
namespace oracle {

// Cyclic Jacobi eigensolve of a symmetric matrix; eigenvalues descending,
// eigenvectors as matching columns.
std::pair<xmb::Vector, xmb::Matrix> jacobi_eigen(const xmb::Matrix& a);

// Covariance with n - 1 denominator.
xmb::Matrix covariance(const xmb::Matrix& x);

// P(score of a random positive > score of a random negative), ties 1/2.
double pairwise_auc(const std::vector<int>& y, const std::vector<double>& s, int positive);

// ROC points from every threshold: {+inf} plus each distinct score, points
// (FP(s >= t)/N, TP(s >= t)/P) in descending threshold order.
std::vector<std::pair<double, double>> brute_force_roc(const std::vector<int>& y, const std::vector<double>& s,
                                                       int positive);

double silhouette(const xmb::Matrix& coords, const std::vector<int>& labels);

// Uniform draw in [0, bound) by rejection on raw 64-bit engine output.
std::uint64_t ref_index(std::mt19937_64& eng, std::uint64_t bound);
// Fisher-Yates: i from n-1 down to 1, swap v[i] with v[ref_index(i + 1)].
void ref_shuffle(std::vector<std::size_t>& v, std::mt19937_64& eng);

}  // namespace oracle
}  // namespace fixture
