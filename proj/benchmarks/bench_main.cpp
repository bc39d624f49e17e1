#include "proxrl/bellman.hpp"
#include "proxrl/deep/updates.hpp"
#include "proxrl/envs.hpp"
#include "proxrl/pmpi.hpp"

#include <benchmark/benchmark.h>

using namespace proxrl;

namespace {

TabularMdp random_mdp(std::size_t states) {
  std::mt19937_64 rng(states);
  return make_random_mdp(states, 4, 0.95, rng);
}

void BM_BellmanBackup(benchmark::State& state) {
  const TabularMdp mdp = random_mdp(static_cast<std::size_t>(state.range(0)));
  const Policy pi = greedy_policy(mdp, Vector::Zero(static_cast<Eigen::Index>(mdp.num_states())));
  const PolicyMatrices pm = policy_matrices(mdp, pi);
  Vector v = Vector::Ones(static_cast<Eigen::Index>(mdp.num_states()));
  for (auto _ : state) {
    v = bellman_backup(pm, mdp.gamma(), v);
    benchmark::DoNotOptimize(v.data());
  }
}
BENCHMARK(BM_BellmanBackup)->Arg(16)->Arg(64)->Arg(256);

void BM_OptimalityBackup(benchmark::State& state) {
  const TabularMdp mdp = random_mdp(static_cast<std::size_t>(state.range(0)));
  Vector v = Vector::Zero(static_cast<Eigen::Index>(mdp.num_states()));
  for (auto _ : state) {
    v = optimality_backup(mdp, v);
    benchmark::DoNotOptimize(v.data());
  }
}
BENCHMARK(BM_OptimalityBackup)->Arg(16)->Arg(64)->Arg(256);

void BM_QuadraticProximalBackup(benchmark::State& state) {
  const TabularMdp mdp = random_mdp(static_cast<std::size_t>(state.range(0)));
  const Eigen::Index n = static_cast<Eigen::Index>(mdp.num_states());
  const Policy pi = greedy_policy(mdp, Vector::Zero(n));
  const ProximalConfig cfg = ProximalConfig::quadratic(1.0, Matrix::Identity(n, n), 3);
  Vector v = Vector::Zero(n);
  for (auto _ : state) {
    v = proximal_backup(mdp, pi, v, cfg);
    benchmark::DoNotOptimize(v.data());
  }
}
BENCHMARK(BM_QuadraticProximalBackup)->Arg(16)->Arg(64);

void BM_PmpiRunFrozenLake(benchmark::State& state) {
  const TabularMdp mdp = frozen_lake({"SFFF", "FHFH", "FFFH", "HFFG"}, true);
  const ValueIterationResult opt = solve_optimal(mdp);
  PmpiConfig cfg;
  cfg.beta = 0.5;
  cfg.n = static_cast<std::size_t>(state.range(0));
  cfg.iterations = 100;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const PmpiTrace trace = pmpi_run(mdp, cfg, NoiseModel::uniform(0.3, seed++), opt);
    benchmark::DoNotOptimize(trace.final_gap());
  }
}
BENCHMARK(BM_PmpiRunFrozenLake)->Arg(1)->Arg(3);

void BM_TdLossAndGrad(benchmark::State& state) {
  std::mt19937_64 rng(7);
  const std::vector<std::size_t> sizes{37, 64, 64, 4};
  const deep::QNetwork online = deep::QNetwork::glorot(sizes, rng);
  const deep::QNetwork target = deep::QNetwork::glorot(sizes, rng);
  std::vector<deep::Transition> batch(static_cast<std::size_t>(state.range(0)));
  std::uniform_int_distribution<int> cell(0, 36);
  for (auto& t : batch) {
    t.state = Vector::Zero(37);
    t.next_state = Vector::Zero(37);
    t.state(cell(rng)) = 1.0;
    t.next_state(cell(rng)) = 1.0;
    t.action = static_cast<std::size_t>(cell(rng) % 4);
    t.reward = -0.01;
  }
  for (auto _ : state) {
    const deep::LossAndGrad lg = deep::td_loss_and_grad(online, target, batch, 0.99);
    benchmark::DoNotOptimize(lg.grad.data());
  }
}
BENCHMARK(BM_TdLossAndGrad)->Arg(32)->Arg(128);

}  // namespace
BENCHMARK_MAIN();
