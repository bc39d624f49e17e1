#pragma once

#include "proxrl/deep/qnetwork.hpp"
#include "proxrl/deep/updates.hpp"
#include "proxrl/envs.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace proxrl::deep {

enum class Variant {
  kDqn,           // plain semi-gradient step
  kDqnPro,        // proximal step toward the target parameters
  kValueSpacePro  // plain step on TD loss plus value-space proximity penalty
};

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

/// Toy-scale defaults; see the README for the mapping to the Atari settings.
struct AgentConfig {
  std::vector<std::size_t> hidden{64, 64};
  double alpha = 1e-3;
  double c_tilde = 0.2;
  TargetMode target_mode = TargetMode::periodic(200);
  std::optional<double> anneal_alpha_final;  // periodic mode only
  double epsilon_start = 1.0;
  double epsilon_train = 0.05;
  std::size_t epsilon_decay_steps = 2'000;
  double epsilon_eval = 0.001;
  std::size_t batch_size = 64;
  std::size_t updates_per_step = 1;
  std::size_t buffer_capacity = 10'000;
  std::size_t burn_in = 500;
  double gamma = 0.99;
  std::size_t total_steps = 30'000;
  std::size_t eval_every = 1'000;
  std::size_t eval_episodes = 5;
  /// Adam preconditioning of the gradient; the proximal combination is applied
  /// after it. Set false for raw-gradient SGD.
  bool adaptive = true;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  /// Larger than the textbook 1e-8: damps late-training oscillation of the greedy policy.
  double adam_epsilon = 1.5e-4;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CurvePoint {
  std::size_t step = 0;
  double eval_return_mean = 0.0;
  double eval_return_se = 0.0;
};

struct TrainResult {
  std::vector<CurvePoint> curve;
  /// ||theta_new - theta_old||_2 at each periodic synchronisation.
  std::vector<double> sync_distances;
  Vector final_params;
  std::vector<std::size_t> layer_sizes;
};

/// Epsilon for the given environment step: linear from epsilon_start to epsilon_train.
double epsilon_schedule(const AgentConfig& cfg, std::size_t step);

/// Runs the replay/target-network training loop. Deterministic given cfg.seed.
/// Evaluation returns are discounted with cfg.gamma and use a clone of env.
TrainResult train(const EpisodicEnv& env, const AgentConfig& cfg, Variant variant);

/// Discounted return of eval_episodes episodes of the epsilon-greedy policy.
std::vector<double> evaluate_policy(const QNetwork& net, const EpisodicEnv& env, std::size_t episodes, double eps,
                                    double gamma, std::mt19937_64& rng);

std::string curve_to_csv(const std::vector<CurvePoint>& curve);
std::string sync_distances_to_csv(const std::vector<double>& distances);

}  // namespace proxrl::deep
