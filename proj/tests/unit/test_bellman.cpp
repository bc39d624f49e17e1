#include "oracles.hpp"
#include "proxrl/bellman.hpp"
#include "proxrl/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace proxrl {
namespace {

using testing::loop_sup;
using testing::random_vector;

Matrix random_psd(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  Matrix a(n, n);
  std::normal_distribution<double> g(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = g(rng);
  Matrix q = a * a.transpose();
  q /= q.norm();  // Frobenius >= spectral, so ||Q||_2 <= 1 before scaling
  q *= scale;
  return 0.5 * (q + q.transpose());
}

TEST(ProximalConfig, Validation) {
  EXPECT_THROW(ProximalConfig::l2(0.0), InvalidArgument);
  EXPECT_THROW(ProximalConfig::l2(-1.0), InvalidArgument);
  EXPECT_THROW(ProximalConfig::l2(1.0, 0), InvalidArgument);
  EXPECT_THROW(ProximalConfig::from_beta(1.0), InvalidArgument);
  Matrix asym = Matrix::Identity(2, 2);
  asym(0, 1) = 1e-6;
  EXPECT_THROW(ProximalConfig::quadratic(1.0, asym), InvalidArgument);
  EXPECT_THROW(ProximalConfig::quadratic(1.0, -Matrix::Identity(2, 2)), InvalidArgument);
  EXPECT_NO_THROW(ProximalConfig::quadratic(1.0, Matrix::Zero(2, 2)));
}

TEST(ProximalConfig, Beta) {
  EXPECT_EQ(ProximalConfig::l2(1.0).beta(), 0.5);
  EXPECT_EQ(ProximalConfig::l2(kNoProximal).beta(), 0.0);
  EXPECT_TRUE(ProximalConfig::from_beta(0.0).unregularized());
  EXPECT_NEAR(ProximalConfig::from_beta(0.3).beta(), 0.3, 1e-15);
  EXPECT_NEAR(ProximalConfig::l2(4.0).beta(), 0.2, 1e-15);
}

TEST(BellmanBackup, TwoStateChainFromZero) {
  const Vector out = bellman_backup(testing::two_state_chain(0.5), Policy::constant(2, 0), Vector::Zero(2));
  EXPECT_EQ(out, (Vector(2) << 1, 0).finished());
}

TEST(BellmanBackup, FixedPointAndZeroGamma) {
  std::mt19937_64 rng(1);
  const TabularMdp mdp = make_random_mdp(8, 3, 0.9, rng);
  const Policy pi = testing::random_policy(mdp, rng);
  const Vector v_pi = evaluate_policy_exact(mdp, pi);
  EXPECT_LE(sup_distance(bellman_backup(mdp, pi, v_pi), v_pi), 1e-10);

  const TabularMdp myopic = mdp.with_gamma(0.0);
  EXPECT_EQ(bellman_backup(myopic, pi, random_vector(8, -5, 5, rng)), policy_matrices(myopic, pi).reward);
}

TEST(BellmanBackup, MatchesLoopAndIsMonotone) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const TabularMdp mdp = make_random_mdp(7, 3, 0.95, rng);
    const Policy pi = testing::random_policy(mdp, rng);
    const Vector v = random_vector(7, -3, 3, rng);
    const Vector u = v + random_vector(7, 0, 2, rng);
    EXPECT_LE(loop_sup(bellman_backup(mdp, pi, v), testing::loop_backup(mdp, pi, v)), 1e-13);
    EXPECT_TRUE(((bellman_backup(mdp, pi, u) - bellman_backup(mdp, pi, v)).array() >= 0.0).all());
  }
}

TEST(OptimalityBackup, FixedPointSingleActionAndScan) {
  std::mt19937_64 rng(3);
  const TabularMdp mdp = make_random_mdp(5, 4, 0.9, rng);
  const Vector v_star = solve_optimal(mdp).v_star;
  EXPECT_LE(sup_distance(optimality_backup(mdp, v_star), v_star), 1e-10);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector v = random_vector(5, -10, 10, rng);
    EXPECT_LE(loop_sup(optimality_backup(mdp, v), testing::loop_optimality_backup(mdp, v)), 1e-13);
  }
  const TabularMdp single({mdp.transition(2)}, mdp.reward().col(2), 0.9);
  const Vector v = random_vector(5, -1, 1, rng);
  EXPECT_EQ(optimality_backup(single, v), bellman_backup(single, Policy::constant(5, 0), v));
}

TEST(OptimalityBackup, SupNormContraction) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const TabularMdp mdp = make_random_mdp(6, 3, 0.8, rng);
    const Vector a = random_vector(6, -5, 5, rng);
    const Vector b = random_vector(6, -5, 5, rng);
    EXPECT_LE(sup_distance(optimality_backup(mdp, a), optimality_backup(mdp, b)),
              0.8 * sup_distance(a, b) + 1e-12);
  }
}

TEST(NStepBackup, Composition) {
  std::mt19937_64 rng(5);
  const TabularMdp mdp = make_random_mdp(6, 2, 0.9, rng);
  const Policy pi = testing::random_policy(mdp, rng);
  const Vector v = random_vector(6, -1, 1, rng);
  EXPECT_EQ(n_step_backup(mdp, pi, v, 1), bellman_backup(mdp, pi, v));
  const Vector three = testing::loop_backup(mdp, pi, testing::loop_backup(mdp, pi, testing::loop_backup(mdp, pi, v)));
  EXPECT_LE(loop_sup(n_step_backup(mdp, pi, v, 3), three), 1e-12);
  const Vector v_pi = evaluate_policy_exact(mdp, pi);
  for (std::size_t n : {1u, 4u, 17u}) EXPECT_LE(sup_distance(n_step_backup(mdp, pi, v_pi, n), v_pi), 1e-10);
  EXPECT_THROW(n_step_backup(mdp, pi, v, 0), InvalidArgument);
}

TEST(ProximalBackupL2, MidpointExample) {
  const Vector out = proximal_backup_l2(testing::two_state_chain(0.5), Policy::constant(2, 0), Vector::Zero(2),
                                        ProximalConfig::l2(1.0));
  EXPECT_EQ(out, (Vector(2) << 0.5, 0).finished());
}

TEST(ProximalBackupL2, InfiniteCIsPlainNStepBitwise) {
  std::mt19937_64 rng(6);
  const TabularMdp mdp = make_random_mdp(9, 3, 0.9, rng);
  const Policy pi = testing::random_policy(mdp, rng);
  const Vector v = random_vector(9, -2, 2, rng);
  for (std::size_t n : {1u, 3u})
    EXPECT_EQ(proximal_backup_l2(mdp, pi, v, ProximalConfig::l2(kNoProximal, n)), n_step_backup(mdp, pi, v, n));
}

TEST(ProximalBackupL2, MatchesArgminOracle) {
  std::mt19937_64 rng(7);
  const TabularMdp mdp = make_random_mdp(8, 3, 0.9, rng);
  const Policy pi = testing::random_policy(mdp, rng);
  const Vector v = random_vector(8, -2, 2, rng);
  const ProximalConfig cfg = ProximalConfig::l2(0.2);
  const Vector oracle = proximal_argmin_oracle(testing::loop_backup(mdp, pi, v), v, cfg);
  EXPECT_LE(loop_sup(proximal_backup_l2(mdp, pi, v, cfg), oracle), 1e-8);
}

TEST(ProximalBackupL2, StaysBetweenAnchorAndBackup) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const TabularMdp mdp = make_random_mdp(6, 3, 0.9, rng);
    const Policy pi = testing::random_policy(mdp, rng);
    const Vector v = random_vector(6, -3, 3, rng);
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 3);
    const Vector target = n_step_backup(mdp, pi, v, n);
    const Vector out = proximal_backup_l2(mdp, pi, v, ProximalConfig::l2(std::exp(random_vector(1, -3, 3, rng)(0)), n));
    for (Eigen::Index s = 0; s < 6; ++s) {
      EXPECT_GE(out(s), std::min(v(s), target(s)) - 1e-12);
      EXPECT_LE(out(s), std::max(v(s), target(s)) + 1e-12);
    }
  }
}

TEST(ProximalBackupQuadratic, TwoIdentityReducesToL2) {
  std::mt19937_64 rng(9);
  const TabularMdp mdp = make_random_mdp(7, 2, 0.9, rng);
  const Policy pi = testing::random_policy(mdp, rng);
  const Vector v = random_vector(7, -2, 2, rng);
  for (double c : {0.1, 1.0, 10.0}) {
    const Vector quad = proximal_backup_quadratic(mdp, pi, v, ProximalConfig::quadratic(c, 2.0 * Matrix::Identity(7, 7), 3));
    EXPECT_LE(sup_distance(quad, proximal_backup_l2(mdp, pi, v, ProximalConfig::l2(c, 3))), 1e-10);
  }
}

TEST(ProximalBackupQuadratic, ZeroMatrixIsPlainBackup) {
  std::mt19937_64 rng(10);
  const TabularMdp mdp = make_random_mdp(5, 2, 0.9, rng);
  const Policy pi = testing::random_policy(mdp, rng);
  const Vector v = random_vector(5, -2, 2, rng);
  const Vector quad = proximal_backup_quadratic(mdp, pi, v, ProximalConfig::quadratic(1.0, Matrix::Zero(5, 5), 2));
  EXPECT_LE(sup_distance(quad, n_step_backup(mdp, pi, v, 2)), 1e-14);
}

TEST(ProximalBackupQuadratic, DiagonalMatchesOracleAndIsStationary) {
  std::mt19937_64 rng(11);
  const TabularMdp mdp = make_random_mdp(6, 3, 0.9, rng);
  for (int trial = 0; trial < 10; ++trial) {
    const Policy pi = testing::random_policy(mdp, rng);
    const Vector v = random_vector(6, -2, 2, rng);
    const Matrix q = random_vector(6, 0, 1, rng).asDiagonal();
    const double c = trial % 2 == 0 ? 0.5 : 3.0;
    const ProximalConfig cfg = ProximalConfig::quadratic(c, q);
    const Vector closed = proximal_backup_quadratic(mdp, pi, v, cfg);
    const Vector target = testing::loop_backup(mdp, pi, v);
    EXPECT_LE(loop_sup(closed, proximal_argmin_oracle(target, v, cfg)), 1e-7);
    const Vector stationarity = 2.0 * (closed - target) + (q / c) * (closed - v);
    EXPECT_LE(stationarity.cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(ProximalBackupQuadratic, DenseStationarity) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const TabularMdp mdp = make_random_mdp(12, 3, 0.95, rng);
    const Policy pi = testing::random_policy(mdp, rng);
    const Vector v = random_vector(12, -20, 20, rng);
    const Matrix q = random_psd(12, rng, 5.0);
    const double c = 0.1;
    const Vector out = proximal_backup(mdp, pi, v, ProximalConfig::quadratic(c, q, 2));
    const Vector target = n_step_backup(mdp, pi, v, 2);
    EXPECT_LE((2.0 * (out - target) + (q / c) * (out - v)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(ProximalBackup, GeneratorMismatchThrows) {
  const TabularMdp mdp = testing::two_state_chain(0.5);
  const Policy pi = Policy::constant(2, 0);
  EXPECT_THROW(proximal_backup_l2(mdp, pi, Vector::Zero(2), ProximalConfig::quadratic(1.0, Matrix::Zero(2, 2))),
               InvalidArgument);
  EXPECT_THROW(proximal_backup_quadratic(mdp, pi, Vector::Zero(2), ProximalConfig::l2(1.0)), InvalidArgument);
  EXPECT_THROW(proximal_backup(mdp, pi, Vector::Zero(2), ProximalConfig::quadratic(1.0, Matrix::Zero(3, 3))),
               InvalidArgument);
}

TEST(ArgminOracle, TrivialCases) {
  std::mt19937_64 rng(13);
  const Vector target = random_vector(5, -1, 1, rng);
  const Vector anchor = random_vector(5, -1, 1, rng);
  EXPECT_LE(loop_sup(proximal_argmin_oracle(target, anchor, ProximalConfig::l2(kNoProximal)), target), 1e-9);
  const Vector mid = 0.5 * (target + anchor);
  EXPECT_LE(loop_sup(proximal_argmin_oracle(target, anchor, ProximalConfig::l2(1.0)), mid), 1e-9);
}

TEST(ArgminOracle, GradientNormAtReturnedPoint) {
  std::mt19937_64 rng(14);
  const Vector target = random_vector(10, -5, 5, rng);
  const Vector anchor = random_vector(10, -5, 5, rng);
  const ProximalConfig cfg = ProximalConfig::quadratic(0.5, random_psd(10, rng));
  const Vector x = proximal_argmin_oracle(target, anchor, cfg);
  EXPECT_LE(proximal_objective_gradient(x, target, anchor, cfg).norm(), 1e-9);
}

TEST(ArgminOracle, StepCapRaisesNonConvergence) {
  OracleSettings tight;
  tight.max_steps = 3;
  EXPECT_THROW(proximal_argmin_oracle(Vector::Ones(3), Vector::Zero(3), ProximalConfig::l2(1.0), tight), NonConvergence);
}

TEST(ProximalOptimalityBackup, SpecialCases) {
  std::mt19937_64 rng(15);
  const TabularMdp mdp = make_random_mdp(6, 3, 0.9, rng);
  const Vector v = random_vector(6, -2, 2, rng);
  EXPECT_EQ(proximal_optimality_backup(mdp, v, ProximalConfig::l2(kNoProximal)), optimality_backup(mdp, v));
  const double beta = ProximalConfig::l2(2.0).beta();
  EXPECT_LE(sup_distance(proximal_optimality_backup(mdp, v, ProximalConfig::l2(2.0)),
                         (1 - beta) * testing::loop_optimality_backup(mdp, v) + beta * v),
            1e-13);
  const Vector v_star = solve_optimal(mdp).v_star;
  EXPECT_LE(sup_distance(proximal_optimality_backup(mdp, v_star, ProximalConfig::l2(10.0)), v_star), 1e-10);
  EXPECT_THROW(proximal_optimality_backup(mdp, v, ProximalConfig::l2(10.0, 2)), InvalidArgument);
}

TEST(ProximalOptimalityBackup, IteratesToValueIterationFixedPoint) {
  std::mt19937_64 rng(16);
  const TabularMdp mdp = make_random_mdp(8, 3, 0.9, rng);
  const Vector v_star = value_iteration(mdp).v_star;
  Vector v = random_vector(8, -10, 10, rng);
  for (int k = 0; k < 5000; ++k) v = proximal_optimality_backup(mdp, v, ProximalConfig::l2(10.0));
  EXPECT_LE(sup_distance(v, v_star), 1e-6);
}

}  // namespace
}  // namespace proxrl
