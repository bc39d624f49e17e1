#pragma once

#include "proxrl/deep/qnetwork.hpp"
#include "proxrl/deep/replay_buffer.hpp"

#include <cstddef>
#include <limits>
#include <random>
#include <span>

namespace proxrl::deep {

inline constexpr double kNoProximalTerm = std::numeric_limits<double>::infinity();

struct LossAndGrad {
  double loss = 0.0;
  Vector grad;  // with respect to the online parameters only
};

/// Mean squared TD error h(theta, w) = mean (r + gamma max_a' Q(s',a';theta) - Q(s,a;w))^2
/// and its semi-gradient in w. Terminal transitions use target r; truncated ones bootstrap.
LossAndGrad td_loss_and_grad(const QNetwork& online, const QNetwork& target, std::span<const Transition> batch,
                             double gamma);

/// TD loss plus (1/c) mean (Q(s,a;w) - Q(s,a;theta))^2 over the batch's (s, a).
LossAndGrad value_space_prox_grad(const QNetwork& online, const QNetwork& target, std::span<const Transition> batch,
                                  double gamma, double c_tilde);

/// w - alpha * grad.
Vector dqn_step(const Vector& w, const Vector& grad, double alpha);

/// (1 - alpha/c) w + (alpha/c) theta - alpha grad; identical to dqn_step when c is infinite.
/// Emits a warning through the warning handler when alpha/c > 1.
Vector dqn_pro_step(const Vector& w, const Vector& theta, const Vector& grad, double alpha, double c_tilde);

struct TargetMode {
  enum class Kind { kPeriodic, kPolyak };
  Kind kind = Kind::kPeriodic;
  std::size_t period = 200;
  double tau = 0.005;

  static TargetMode periodic(std::size_t period) { return {Kind::kPeriodic, period, 0.0}; }
  static TargetMode polyak(double tau) { return {Kind::kPolyak, 1, tau}; }
  void validate() const;
};

/// Periodic: theta <- w when update_count % period == 0. Polyak: theta <- tau w + (1 - tau) theta.
Vector sync_target(const TargetMode& mode, const Vector& theta, const Vector& w, std::size_t update_count);

/// Linear interpolation from alpha0 to alpha_final across one target period.
double anneal_alpha(double alpha0, double alpha_final, std::size_t steps_since_sync, std::size_t period);

/// Index of the largest entry, lowest index on ties.
std::size_t argmax_action(const Vector& q);

/// With probability eps a uniform action, otherwise argmax_action(q).
std::size_t epsilon_greedy(const Vector& q, double eps, std::mt19937_64& rng);

}  // namespace proxrl::deep
