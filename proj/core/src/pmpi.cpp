#include "proxrl/pmpi.hpp"

#include "proxrl/bellman.hpp"
#include "proxrl/errors.hpp"
#include "proxrl/util.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace proxrl {

void PmpiConfig::validate() const {
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidArgument("PMPI beta must lie in [0, 1]");
  if (n == 0) throw InvalidArgument("PMPI backup depth n must be at least 1");
  if (iterations == 0) throw InvalidArgument("PMPI needs at least one iteration");
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) throw InvalidArgument("flip_prob must lie in [0, 1]");
}

ValueFunction noisy_proximal_backup(const TabularMdp& mdp, const Policy& pi, const ValueFunction& v, double beta,
                                    std::size_t n, const Vector& eps) {
  if (eps.size() != v.size()) throw InvalidArgument("noise vector length does not match |S|");
  if (beta == 1.0) return v;
  const ValueFunction target = n_step_backup(mdp, pi, v, n);
  return (1.0 - beta) * (target + eps) + beta * v;
}

PmpiTrace pmpi_run(const TabularMdp& mdp, const PmpiConfig& cfg, const NoiseModel& noise,
                   const ValueIterationResult& optimal) {
  cfg.validate();
  if (noise.kind == NoiseModel::Kind::kUniformPerState && !(noise.delta >= 0.0)) {
    throw InvalidArgument("noise delta must be non-negative");
  }
  const auto ns = static_cast<Eigen::Index>(mdp.num_states());
  const std::size_t na = mdp.num_actions();

  // Separate streams so that enabling flips leaves the evaluation noise unchanged.
  std::mt19937_64 noise_rng(derive_seed({noise.seed, 1}));
  std::mt19937_64 flip_rng(derive_seed({noise.seed, 2}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  PmpiTrace trace;
  trace.beta = cfg.beta;
  trace.n = cfg.n;
  trace.v0 = ValueFunction::Zero(ns);
  trace.v_star = optimal.v_star;
  trace.pi_star = optimal.pi_star;
  trace.steps.reserve(cfg.iterations);

  ValueFunction v = trace.v0;
  for (std::size_t k = 1; k <= cfg.iterations; ++k) {
    PmpiStep step;
    step.pi = greedy_policy(mdp, v);
    step.flipped.assign(mdp.num_states(), 0);
    if (cfg.flip_prob > 0.0 && na > 1) {
      std::uniform_int_distribution<std::size_t> other(0, na - 2);
      for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        if (unit(flip_rng) < cfg.flip_prob) {
          std::size_t a = other(flip_rng);
          if (a >= step.pi.action_of[s]) ++a;
          step.pi.action_of[s] = a;
          step.flipped[s] = 1;
        }
      }
    }

    step.epsilon = Vector::Zero(ns);
    if (noise.kind == NoiseModel::Kind::kUniformPerState && noise.delta > 0.0) {
      std::uniform_real_distribution<double> draw(-noise.delta, noise.delta);
      for (Eigen::Index s = 0; s < ns; ++s) step.epsilon(s) = draw(noise_rng);
    }

    v = noisy_proximal_backup(mdp, step.pi, v, cfg.beta, cfg.n, step.epsilon);
    step.v = v;
    step.gap = sup_distance(optimal.v_star, evaluate_policy_exact(mdp, step.pi));
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

PmpiTrace pmpi_run(const TabularMdp& mdp, const PmpiConfig& cfg, const NoiseModel& noise) {
  return pmpi_run(mdp, cfg, noise, solve_optimal(mdp));
}

std::vector<std::uint64_t> SweepSpec::resolved_seeds() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out(30);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

std::vector<SweepCell> pmpi_sweep(const TabularMdp& mdp, const SweepSpec& spec) {
  if (spec.betas.empty() || spec.deltas.empty() || spec.ns.empty()) {
    throw InvalidArgument("sweep grids must be non-empty");
  }
  const std::vector<std::uint64_t> seeds = spec.resolved_seeds();
  const ValueIterationResult optimal = solve_optimal(mdp);

  std::vector<SweepCell> cells;
  for (std::size_t n : spec.ns) {
    for (double delta : spec.deltas) {
      for (double beta : spec.betas) cells.push_back(SweepCell{beta, delta, n, seeds.size(), 0.0, 0.0});
    }
  }

  const std::size_t runs = cells.size() * seeds.size();
  std::vector<double> final_gap(runs, 0.0);
  parallel_for(runs, spec.jobs, [&](std::size_t idx) {
    const SweepCell& cell = cells[idx / seeds.size()];
    const std::uint64_t seed = seeds[idx % seeds.size()];
    PmpiConfig cfg;
    cfg.beta = cell.beta;
    cfg.n = cell.n;
    cfg.iterations = spec.iterations;
    const NoiseModel noise = NoiseModel::uniform(
        cell.delta, derive_seed({bits_of(cell.beta), bits_of(cell.delta), cell.n, seed}));
    final_gap[idx] = pmpi_run(mdp, cfg, noise, optimal).final_gap();
  });

  const double m = static_cast<double>(seeds.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    double sum = 0.0;
    for (std::size_t i = 0; i < seeds.size(); ++i) sum += final_gap[c * seeds.size() + i];
    const double mean = sum / m;
    double sq = 0.0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const double d = final_gap[c * seeds.size() + i] - mean;
      sq += d * d;
    }
    cells[c].mean_gap = mean;
    cells[c].se_gap = seeds.size() > 1 ? std::sqrt(sq / (m - 1.0)) / std::sqrt(m) : 0.0;
  }
  return cells;
}

std::string sweep_to_csv(const std::vector<SweepCell>& cells) {
  std::ostringstream out;
  out << "beta,delta,n,seed_count,mean_gap,se_gap\n";
  for (const SweepCell& c : cells) {
    out << format_double(c.beta) << ',' << format_double(c.delta) << ',' << c.n << ',' << c.seed_count << ','
        << format_double(c.mean_gap) << ',' << format_double(c.se_gap) << '\n';
  }
  return out.str();
}

}  // namespace proxrl
