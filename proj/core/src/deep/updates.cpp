#include "proxrl/deep/updates.hpp"

#include "proxrl/errors.hpp"
#include "proxrl/util.hpp"

#include <string>

namespace proxrl::deep {

namespace {

struct BatchMatrices {
  Matrix states;
  Matrix next_states;
};

BatchMatrices stack(std::span<const Transition> batch, std::size_t dim) {
  const auto b = static_cast<Eigen::Index>(batch.size());
  BatchMatrices m{Matrix(static_cast<Eigen::Index>(dim), b), Matrix(static_cast<Eigen::Index>(dim), b)};
  for (Eigen::Index i = 0; i < b; ++i) {
    const Transition& t = batch[static_cast<std::size_t>(i)];
    if (static_cast<std::size_t>(t.state.size()) != dim || static_cast<std::size_t>(t.next_state.size()) != dim) {
      throw InvalidArgument("transition state dimension does not match the network");
    }
    m.states.col(i) = t.state;
    m.next_states.col(i) = t.next_state;
  }
  return m;
}

// Shared body; proximity weight 0 disables the value-space term.
LossAndGrad loss_and_grad(const QNetwork& online, const QNetwork& target, std::span<const Transition> batch,
                          double gamma, double proximity_weight) {
  if (batch.empty()) throw InvalidArgument("TD loss needs a non-empty batch");
  if (online.layer_sizes() != target.layer_sizes()) throw InvalidArgument("online/target architectures differ");
  const BatchMatrices m = stack(batch, online.input_dim());
  const Matrix next_q = target.forward_batch(m.next_states);
  const QNetwork::Cache cache = online.forward_cached(m.states);
  const Matrix& q = cache.output();
  Matrix anchor_q;
  if (proximity_weight > 0.0) anchor_q = target.forward_batch(m.states);

  const double inv_b = 1.0 / static_cast<double>(batch.size());
  Matrix out_grad = Matrix::Zero(q.rows(), q.cols());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < q.cols(); ++i) {
    const Transition& t = batch[static_cast<std::size_t>(i)];
    if (t.action >= online.num_actions()) throw InvalidArgument("transition action out of range");
    const auto a = static_cast<Eigen::Index>(t.action);
    const double bootstrap = t.terminal ? 0.0 : gamma * next_q.col(i).maxCoeff();
    const double td = q(a, i) - (t.reward + bootstrap);
    loss += td * td * inv_b;
    out_grad(a, i) += 2.0 * td * inv_b;
    if (proximity_weight > 0.0) {
      const double gap = q(a, i) - anchor_q(a, i);
      loss += proximity_weight * gap * gap * inv_b;
      out_grad(a, i) += 2.0 * proximity_weight * gap * inv_b;
    }
  }
  return {loss, online.backward(cache, out_grad)};
}

}  // namespace

LossAndGrad td_loss_and_grad(const QNetwork& online, const QNetwork& target, std::span<const Transition> batch,
                             double gamma) {
  return loss_and_grad(online, target, batch, gamma, 0.0);
}

LossAndGrad value_space_prox_grad(const QNetwork& online, const QNetwork& target, std::span<const Transition> batch,
                                  double gamma, double c_tilde) {
  if (!(c_tilde > 0.0)) throw InvalidArgument("c_tilde must be positive");
  const double weight = c_tilde == kNoProximalTerm ? 0.0 : 1.0 / c_tilde;
  return loss_and_grad(online, target, batch, gamma, weight);
}

Vector dqn_step(const Vector& w, const Vector& grad, double alpha) {
  if (w.size() != grad.size()) throw InvalidArgument("dqn_step: parameter/gradient length mismatch");
  return w - alpha * grad;
}

Vector dqn_pro_step(const Vector& w, const Vector& theta, const Vector& grad, double alpha, double c_tilde) {
  if (!(c_tilde > 0.0)) throw InvalidArgument("c_tilde must be positive");
  if (c_tilde == kNoProximalTerm) return dqn_step(w, grad, alpha);
  if (w.size() != theta.size() || w.size() != grad.size()) {
    throw InvalidArgument("dqn_pro_step: parameter/gradient length mismatch");
  }
  const double pull = alpha / c_tilde;
  if (pull > 1.0) {
    warn("alpha / c_tilde = " + format_double(pull) + " exceeds 1; the proximal step overshoots the target");
  }
  return (1.0 - pull) * w + pull * theta - alpha * grad;
}

void TargetMode::validate() const {
  if (kind == Kind::kPeriodic && period == 0) throw InvalidArgument("target period must be at least 1");
  if (kind == Kind::kPolyak && !(tau > 0.0 && tau <= 1.0)) throw InvalidArgument("Polyak tau must lie in (0, 1]");
}

Vector sync_target(const TargetMode& mode, const Vector& theta, const Vector& w, std::size_t update_count) {
  mode.validate();
  if (theta.size() != w.size()) throw InvalidArgument("sync_target: parameter length mismatch");
  if (mode.kind == TargetMode::Kind::kPeriodic) return update_count % mode.period == 0 ? w : theta;
  return mode.tau * w + (1.0 - mode.tau) * theta;
}

double anneal_alpha(double alpha0, double alpha_final, std::size_t steps_since_sync, std::size_t period) {
  if (period == 0) throw InvalidArgument("anneal period must be positive");
  if (steps_since_sync > period) throw InvalidArgument("steps_since_sync exceeds the period");
  const double frac = static_cast<double>(steps_since_sync) / static_cast<double>(period);
  return alpha0 + (alpha_final - alpha0) * frac;
}

std::size_t argmax_action(const Vector& q) {
  if (q.size() == 0) throw InvalidArgument("argmax of an empty action-value vector");
  Eigen::Index best = 0;
  for (Eigen::Index a = 1; a < q.size(); ++a) {
    if (q(a) > q(best)) best = a;
  }
  return static_cast<std::size_t>(best);
}

std::size_t epsilon_greedy(const Vector& q, double eps, std::mt19937_64& rng) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw InvalidArgument("epsilon must lie in [0, 1]");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < eps) {
    std::uniform_int_distribution<std::size_t> pick(0, static_cast<std::size_t>(q.size()) - 1);
    return pick(rng);
  }
  return argmax_action(q);
}

}  // namespace proxrl::deep
