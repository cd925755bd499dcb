#include "ci_test.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "errors.hpp"

namespace spc {

namespace {

constexpr double kRhoClamp = 1.0 - 1e-12;

void check_test_args(std::size_t n, Node i, Node j, const NodeSet& conditioning) {
  if (i >= n || j >= n) throw Error(ErrorCode::kIndex, "test endpoint out of range");
  if (i == j) throw Error(ErrorCode::kInvalidArgument, "test of a variable against itself");
  for (Node s : conditioning) {
    if (s >= n) throw Error(ErrorCode::kIndex, "conditioning variable out of range");
    if (s == i || s == j) {
      throw Error(ErrorCode::kInvalidArgument, "endpoint inside the conditioning set");
    }
  }
}

}  // namespace

void validate(const CITestConfig& config) {
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1)");
  }
}

Eigen::MatrixXd correlation_matrix(const Dataset& data) {
  const Eigen::Index n = data.values.rows();
  const Eigen::Index d = data.values.cols();
  if (n < 2) throw Error(ErrorCode::kInsufficientSamples, "correlation needs at least 2 rows");
  const Eigen::RowVectorXd mean = data.values.colwise().mean();
  const Eigen::MatrixXd centered = data.values.rowwise() - mean;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n);
  Eigen::VectorXd sd(d);
  for (Eigen::Index c = 0; c < d; ++c) {
    sd(c) = std::sqrt(cov(c, c));
    if (!(sd(c) > 1e-12 * std::max(1.0, std::abs(mean(c))))) {
      throw Error(ErrorCode::kDegenerateColumn, "column " + std::to_string(c) + " has zero variance");
    }
  }
  Eigen::MatrixXd corr(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    corr(a, a) = 1.0;
    for (Eigen::Index b = a + 1; b < d; ++b) {
      const double r = std::clamp(cov(a, b) / (sd(a) * sd(b)), -1.0, 1.0);
      corr(a, b) = r;
      corr(b, a) = r;
    }
  }
  return corr;
}

double partial_correlation(const Eigen::MatrixXd& corr, Node i, Node j, const NodeSet& conditioning) {
  check_test_args(static_cast<std::size_t>(corr.rows()), i, j, conditioning);
  const auto ii = static_cast<Eigen::Index>(i);
  const auto jj = static_cast<Eigen::Index>(j);
  if (conditioning.empty()) return corr(ii, jj);

  std::vector<Eigen::Index> idx{ii, jj};
  for (Node s : conditioning) idx.push_back(static_cast<Eigen::Index>(s));
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd sub(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = corr(idx[a], idx[b]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::kSingularMatrix, "correlation submatrix is singular (collinear variables)");
  }
  const Eigen::MatrixXd precision = lu.inverse();
  const double denom = std::sqrt(precision(0, 0) * precision(1, 1));
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw Error(ErrorCode::kSingularMatrix, "correlation submatrix is not positive definite");
  }
  return std::clamp(-precision(0, 1) / denom, -1.0, 1.0);
}

double fisher_z_pvalue(double partial_corr, std::size_t num_samples, std::size_t conditioning_size) {
  if (num_samples <= conditioning_size + 3) {
    throw Error(ErrorCode::kInsufficientSamples,
                "Fisher z needs more than |S| + 3 samples (n=" + std::to_string(num_samples) +
                    ", |S|=" + std::to_string(conditioning_size) + ")");
  }
  const double rho = std::clamp(partial_corr, -kRhoClamp, kRhoClamp);
  const double z = std::atanh(std::abs(rho));
  const double dof = static_cast<double>(num_samples - conditioning_size - 3);
  const double statistic = std::sqrt(dof) * z;
  // 2 * (1 - Phi(t)) == erfc(t / sqrt(2)), without cancellation for large t.
  return std::clamp(std::erfc(statistic / std::sqrt(2.0)), 0.0, 1.0);
}

double fisher_z(const Eigen::MatrixXd& corr, std::size_t num_samples, Node i, Node j,
                const NodeSet& conditioning) {
  if (num_samples <= conditioning.size() + 3) {
    throw Error(ErrorCode::kInsufficientSamples, "Fisher z needs more than |S| + 3 samples");
  }
  return fisher_z_pvalue(partial_correlation(corr, i, j, conditioning), num_samples,
                         conditioning.size());
}

FisherZTest::FisherZTest(const Dataset& data)
    : corr_(correlation_matrix(data)), num_samples_(data.num_samples()) {}

FisherZTest::FisherZTest(Eigen::MatrixXd corr, std::size_t num_samples)
    : corr_(std::move(corr)), num_samples_(num_samples) {
  if (corr_.rows() != corr_.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "correlation matrix must be square");
  }
}

double FisherZTest::test(Node i, Node j, const NodeSet& conditioning) const {
  // Symmetric by construction: always evaluate with the smaller index first.
  try {
    return fisher_z(corr_, num_samples_, std::min(i, j), std::max(i, j), conditioning);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kSingularMatrix) throw;
    // Collinear variables: the limit |rho| -> 1 of the clamped statistic.
    return 0.0;
  }
}

double OracleTest::test(Node i, Node j, const NodeSet& conditioning) const {
  check_test_args(truth_.num_nodes(), i, j, conditioning);
  return d_separated(truth_, i, j, conditioning) ? 1.0 : 0.0;
}

OracleTest oracle_cit(const Dag& truth) { return OracleTest(truth); }

// ---------------------------------------------------------------------------
// Cache

TestKey::TestKey(Node a, Node b, NodeSet s)
    : lo(std::min(a, b)), hi(std::max(a, b)), conditioning(make_node_set(std::move(s))) {}

std::size_t TestKeyHash::operator()(const TestKey& key) const noexcept {
  std::size_t h = std::hash<Node>{}(key.lo) * 0x9E3779B97F4A7C15ULL;
  h ^= std::hash<Node>{}(key.hi) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  for (Node s : key.conditioning) h ^= std::hash<Node>{}(s) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  return h;
}

std::optional<double> PValueCache::find(const TestKey& key) const {
  std::shared_lock lock(mutex_);
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void PValueCache::insert(const TestKey& key, double p) {
  std::unique_lock lock(mutex_);
  values_.insert_or_assign(key, p);
}

std::size_t PValueCache::size() const {
  std::shared_lock lock(mutex_);
  return values_.size();
}

double CachedTest::test(Node i, Node j, const NodeSet& conditioning) const {
  TestKey key(i, j, conditioning);
  if (auto hit = cache_.find(key)) return *hit;
  const double p = inner_.test(key.lo, key.hi, key.conditioning);
  ++evaluations_;
  cache_.insert(key, p);
  return p;
}

}  // namespace spc
