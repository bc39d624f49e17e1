#include "deep_oracles.hpp"
#include "proxrl/deep/lipschitz.hpp"

#include <gtest/gtest.h>

#include "proxrl/errors.hpp"

#include <Eigen/SVD>

namespace proxrl::deep {
namespace {

Vector one_hot(Eigen::Index dim, Eigen::Index i) { return Vector::Unit(dim, i); }

/// Largest |Q(s,a;p) - Q(s,a;p')| over every one-hot state and action.
double max_output_change(const std::vector<std::size_t>& sizes, const Vector& p, const Vector& q) {
  double worst = 0.0;
  const auto dim = static_cast<Eigen::Index>(sizes.front());
  for (Eigen::Index s = 0; s < dim; ++s) {
    const Vector x = one_hot(dim, s);
    worst = std::max(worst, (testing::reference_forward(sizes, p, x) - testing::reference_forward(sizes, q, x))
                                .cwiseAbs()
                                .maxCoeff());
  }
  return worst;
}

TEST(SpectralNorm, MatchesSvd) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix w = Eigen::Map<const Matrix>(testing::random_params({12, 7}, rng).data(), 7, 12);
    const double exact = Eigen::JacobiSVD<Matrix>(w).singularValues()(0);
    EXPECT_NEAR(spectral_norm(w), exact, 1e-6 * exact);
  }
  EXPECT_EQ(spectral_norm(Matrix::Zero(3, 3)), 0.0);
  Matrix rank_one = Matrix::Zero(2, 2);
  rank_one(0, 1) = 3.0;  // start vector (1,1)/sqrt2 is not in the null space
  EXPECT_NEAR(spectral_norm(rank_one), 3.0, 1e-12);
  Matrix null_start(1, 2);
  null_start << 1.0, -1.0;  // W * ones = 0
  EXPECT_NEAR(spectral_norm(null_start), std::sqrt(2.0), 1e-12);
}

TEST(LipschitzBound, ZeroWeightsOnlyBiasPath) {
  const std::vector<std::size_t> sizes{6, 5, 3};
  Vector p = Vector::Zero(static_cast<Eigen::Index>(QNetwork::param_count(sizes)));
  const QNetwork net(sizes, p);
  // H = (1, ||b1|| = 0); G = (||W2|| = 0, 1): L^2 = 0 * 2 + 1 * (0 + 1).
  EXPECT_NEAR(lipschitz_upper_bound(net), 1.0, 1e-15);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1e-3);
  for (int trial = 0; trial < 200; ++trial) {
    Vector q = p;
    for (Eigen::Index i = 0; i < q.size(); ++i) q(i) += g(rng);
    const double bound = lipschitz_upper_bound(net, QNetwork(sizes, q));
    EXPECT_LE(max_output_change(sizes, p, q), bound * (q - p).norm() + 1e-9);
  }
}

TEST(LipschitzBound, SingleLinearLayer) {
  // Q(s,a) = W_a . x + b_a is linear in the parameters with gradient norm
  // sqrt(||x||^2 + 1) = sqrt(2) for one-hot inputs, independent of W.
  std::mt19937_64 rng(3);
  const std::vector<std::size_t> sizes{8, 4};
  const Vector p = testing::random_params(sizes, rng);
  EXPECT_NEAR(lipschitz_upper_bound(QNetwork(sizes, p)), std::sqrt(2.0), 1e-15);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vector q = p + testing::random_params(sizes, rng, 0.1);
    EXPECT_LE(max_output_change(sizes, p, q), std::sqrt(2.0) * (q - p).norm() + 1e-9);
  }
}

TEST(LipschitzBound, RandomDeepNetsSampled) {
  std::mt19937_64 rng(4);
  const std::vector<std::size_t> sizes{10, 12, 9, 4};
  for (int net_i = 0; net_i < 5; ++net_i) {
    const Vector p = testing::random_params(sizes, rng, 0.4);
    for (int trial = 0; trial < 200; ++trial) {
      Vector delta = testing::random_params(sizes, rng, 1.0);
      delta *= (0.01 + 0.99 * (trial % 10) / 9.0) / delta.norm();
      const Vector q = p + delta;
      const double bound = lipschitz_upper_bound(QNetwork(sizes, p), QNetwork(sizes, q));
      EXPECT_LE(max_output_change(sizes, p, q), bound * delta.norm() + 1e-9);
    }
  }
}

TEST(LipschitzBound, BoundGrowsWithEndpoint) {
  std::mt19937_64 rng(5);
  const std::vector<std::size_t> sizes{5, 6, 3};
  const QNetwork a(sizes, testing::random_params(sizes, rng));
  const QNetwork b(sizes, 3.0 * a.params());
  EXPECT_GE(lipschitz_upper_bound(a, b), lipschitz_upper_bound(a));
  EXPECT_GE(lipschitz_upper_bound(a, b), lipschitz_upper_bound(b) - 1e-12);
  EXPECT_THROW(lipschitz_upper_bound(a, QNetwork({5, 3})), InvalidArgument);
}

}  // namespace
}  // namespace proxrl::deep
