#pragma once

#include "proxrl/mdp.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace proxrl {

/// Additive policy-evaluation noise: i.i.d. Uniform[-delta, delta] per state
/// per iteration, or none.
struct NoiseModel {
  enum class Kind { kNone, kUniformPerState };

  Kind kind = Kind::kNone;
  double delta = 0.0;
  std::uint64_t seed = 0;

  static NoiseModel none(std::uint64_t seed = 0) { return {Kind::kNone, 0.0, seed}; }
  static NoiseModel uniform(double delta, std::uint64_t seed) { return {Kind::kUniformPerState, delta, seed}; }
};

struct PmpiConfig {
  double beta = 0.0;
  std::size_t n = 1;
  std::size_t iterations = 100;
  /// Probability of replacing the greedy action in each state by a different
  /// uniformly chosen action (greedification error). 0 means error-free.
  double flip_prob = 0.0;

  void validate() const;
};

struct PmpiStep {
  Policy pi;                          // pi_k
  ValueFunction v;                    // v_k
  Vector epsilon;                     // eps_k
  std::vector<std::uint8_t> flipped;  // states whose greedy action was replaced
  double gap = 0.0;                   // ||v* - v^{pi_k}||_inf
};

struct PmpiTrace {
  double beta = 0.0;
  std::size_t n = 1;
  ValueFunction v0;
  ValueFunction v_star;
  Policy pi_star;
  std::vector<PmpiStep> steps;  // steps[k-1] holds iteration k

  double final_gap() const { return steps.empty() ? 0.0 : steps.back().gap; }
};

/// (1 - beta) ((T^pi)^n v + eps) + beta v.
ValueFunction noisy_proximal_backup(const TabularMdp& mdp, const Policy& pi, const ValueFunction& v, double beta,
                                    std::size_t n, const Vector& eps);

/// Runs PMPI from v0 = 0. `optimal` must be the result of solve_optimal(mdp).
PmpiTrace pmpi_run(const TabularMdp& mdp, const PmpiConfig& cfg, const NoiseModel& noise,
                   const ValueIterationResult& optimal);
PmpiTrace pmpi_run(const TabularMdp& mdp, const PmpiConfig& cfg, const NoiseModel& noise);

struct SweepSpec {
  std::vector<double> betas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};
  std::vector<double> deltas{0.0, 0.1, 0.3, 1.0};
  std::vector<std::size_t> ns{1, 3};
  std::vector<std::uint64_t> seeds;  // empty means 0..29
  std::size_t iterations = 100;
  unsigned jobs = 1;

  std::vector<std::uint64_t> resolved_seeds() const;
};

struct SweepCell {
  double beta = 0.0;
  double delta = 0.0;
  std::size_t n = 1;
  std::size_t seed_count = 0;
  double mean_gap = 0.0;
  double se_gap = 0.0;
};

/// Mean and standard error of the final gap for every (n, delta, beta) cell,
/// in that nesting order. Each run's noise stream is seeded from the hash of
/// (beta, delta, n, seed).
std::vector<SweepCell> pmpi_sweep(const TabularMdp& mdp, const SweepSpec& spec);

/// Header beta,delta,n,seed_count,mean_gap,se_gap.
std::string sweep_to_csv(const std::vector<SweepCell>& cells);

}  // namespace proxrl
