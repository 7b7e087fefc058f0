#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <unistd.h>

#include "xmb/random.hpp"

namespace fixture {

using xmb::Matrix;
using xmb::Vector;

Labeled blobs(std::size_t n, std::size_t d, double spacing, std::uint64_t seed) {
  xmb::Rng rng(seed);
  Labeled out;
  out.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  const double offset = spacing / std::sqrt(2.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % 3);
    out.y.push_back(c);
    for (std::size_t j = 0; j < d; ++j)
      out.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rng.normal() + (j == static_cast<std::size_t>(c) ? offset : 0.0);
  }
  return out;
}

Labeled blob_fixture() { return blobs(300, 10, 5.0, 0); }
Labeled tsne_fixture() { return blobs(60, 10, 10.0, 1); }

xmb::Corpus placeholder_corpus(const std::vector<int>& labels) {
  std::vector<xmb::CommentRecord> records;
  for (std::size_t i = 0; i < labels.size(); ++i)
    records.push_back({i, "r" + std::to_string(i), xmb::label_from_code(labels[i])});
  return xmb::Corpus(std::move(records));
}

Matrix select_rows(const Matrix& x, const std::vector<std::size_t>& ids) {
  Matrix out(static_cast<Eigen::Index>(ids.size()), x.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(ids[i]));
  return out;
}

Split split(const Labeled& data, double ratio, std::uint64_t seed) {
  const auto s = xmb::stratified_split(placeholder_corpus(data.y), ratio, seed);
  Split out;
  out.train.x = select_rows(data.x, s.train_ids);
  out.test.x = select_rows(data.x, s.test_ids);
  for (auto i : s.train_ids) out.train.y.push_back(data.y[i]);
  for (auto i : s.test_ids) out.test.y.push_back(data.y[i]);
  return out;
}

std::filesystem::path temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  auto p = std::filesystem::temp_directory_path() /
           ("xmb_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::filesystem::path& p, const std::string& s) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << s;
}

xmb::EmbeddingStore make_store(const std::string& model_id, const Matrix& x, const std::string& digest) {
  xmb::StoreManifest m;
  m.model_id = model_id;
  m.dim = static_cast<std::size_t>(x.cols());
  m.count = static_cast<std::size_t>(x.rows());
  m.corpus_digest = digest;
  std::vector<float> v;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) v.push_back(static_cast<float>(x(i, j)));
  return xmb::EmbeddingStore(m, std::move(v));
}

namespace oracle {

std::pair<Vector, Matrix> jacobi_eigen(const Matrix& input) {
  const auto n = input.rows();
  Matrix a = input;
  Matrix v = Matrix::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) > a(j, j); });
  Vector values(n);
  Matrix vectors(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  return {values, vectors};
}

Matrix covariance(const Matrix& x) {
  const auto n = x.rows();
  Matrix c = Matrix::Zero(x.cols(), x.cols());
  for (Eigen::Index p = 0; p < x.cols(); ++p) {
    double mp = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) mp += x(i, p);
    mp /= static_cast<double>(n);
    for (Eigen::Index q = 0; q < x.cols(); ++q) {
      double mq = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) mq += x(i, q);
      mq /= static_cast<double>(n);
      double s = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) s += (x(i, p) - mp) * (x(i, q) - mq);
      c(p, q) = s / static_cast<double>(n - 1);
    }
  }
  return c;
}

double pairwise_auc(const std::vector<int>& y, const std::vector<double>& s, int positive) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != positive) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] == positive) continue;
      ++pairs;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

std::vector<std::pair<double, double>> brute_force_roc(const std::vector<int>& y, const std::vector<double>& s,
                                                       int positive) {
  std::set<double, std::greater<>> thresholds(s.begin(), s.end());
  std::vector<double> ts = {INFINITY};
  ts.insert(ts.end(), thresholds.begin(), thresholds.end());
  double pos = 0, neg = 0;
  for (int v : y) (v == positive ? pos : neg) += 1;
  std::vector<std::pair<double, double>> out;
  for (double t : ts) {
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (s[i] >= t) (y[i] == positive ? tp : fp) += 1;
    out.emplace_back(fp / neg, tp / pos);
  }
  return out;
}

double silhouette(const Matrix& coords, const std::vector<int>& labels) {
  const auto n = coords.rows();
  std::set<int> classes(labels.begin(), labels.end());
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::map<int, std::pair<double, int>> by_class;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      auto& e = by_class[labels[static_cast<std::size_t>(j)]];
      e.first += (coords.row(i) - coords.row(j)).norm();
      e.second += 1;
    }
    const int own = labels[static_cast<std::size_t>(i)];
    const double a = by_class[own].second ? by_class[own].first / by_class[own].second : 0.0;
    double b = INFINITY;
    for (int c : classes)
      if (c != own && by_class[c].second) b = std::min(b, by_class[c].first / by_class[c].second);
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(n);
}

std::uint64_t ref_index(std::mt19937_64& eng, std::uint64_t bound) {
  // accept r below the largest multiple of bound not exceeding 2^64
  const unsigned __int128 span = static_cast<unsigned __int128>(1) << 64;
  const unsigned __int128 limit = span - span % bound;
  for (;;) {
    const std::uint64_t r = eng();
    if (r < limit) return r % bound;
  }
}

void ref_shuffle(std::vector<std::size_t>& v, std::mt19937_64& eng) {
  for (std::size_t i = v.size(); i-- > 1;) std::swap(v[i], v[ref_index(eng, i + 1)]);
}

}  // namespace oracle
}  // namespace fixture
