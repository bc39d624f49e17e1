#include "proxrl/bellman.hpp"

#include "proxrl/errors.hpp"

#include <cmath>
#include <string>

namespace proxrl {

namespace {

void check_length(const TabularMdp& mdp, const ValueFunction& v) {
  if (v.size() != static_cast<Eigen::Index>(mdp.num_states())) {
    throw InvalidArgument("value function has length " + std::to_string(v.size()) + ", expected " +
                          std::to_string(mdp.num_states()));
  }
}

// Bregman matrix of the generator: D_f(x, y) = 1/2 (x-y)^T M (x-y).
Matrix bregman_matrix(const ProximalConfig& cfg, Eigen::Index n) {
  if (cfg.generator() == Generator::kL2) return 2.0 * Matrix::Identity(n, n);
  return cfg.q();
}

}  // namespace

ProximalConfig::ProximalConfig(double c, std::size_t n, Generator generator, Matrix q)
    : c_(c), n_(n), generator_(generator), q_(std::move(q)) {
  if (!(c_ > 0.0) || std::isnan(c_)) {
    throw InvalidArgument("proximal strength c must be positive, got " + std::to_string(c_));
  }
  if (n_ == 0) throw InvalidArgument("backup depth n must be at least 1");
}

ProximalConfig ProximalConfig::l2(double c, std::size_t n) { return ProximalConfig(c, n, Generator::kL2, Matrix()); }

ProximalConfig ProximalConfig::quadratic(double c, Matrix q, std::size_t n) {
  if (q.rows() != q.cols() || q.rows() == 0) throw InvalidArgument("Bregman matrix Q must be square and non-empty");
  if (!q.allFinite()) throw InvalidArgument("Bregman matrix Q has non-finite entries");
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidArgument("Bregman matrix Q must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10) {
    throw InvalidArgument("Bregman matrix Q must be positive semi-definite");
  }
  return ProximalConfig(c, n, Generator::kQuadratic, std::move(q));
}

ProximalConfig ProximalConfig::from_beta(double beta, std::size_t n) {
  if (!(beta >= 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in [0, 1)");
  if (beta == 0.0) return l2(kNoProximal, n);
  return l2(1.0 / beta - 1.0, n);
}

double ProximalConfig::beta() const { return unregularized() ? 0.0 : 1.0 / (1.0 + c_); }

ProximalConfig ProximalConfig::with_n(std::size_t n) const { return ProximalConfig(c_, n, generator_, q_); }

ValueFunction bellman_backup(const PolicyMatrices& pm, double gamma, const ValueFunction& v) {
  ValueFunction out = pm.reward;
  out.noalias() += gamma * (pm.transition * v);
  return out;
}

ValueFunction bellman_backup(const TabularMdp& mdp, const Policy& pi, const ValueFunction& v) {
  check_length(mdp, v);
  return bellman_backup(policy_matrices(mdp, pi), mdp.gamma(), v);
}

ValueFunction optimality_backup(const TabularMdp& mdp, const ValueFunction& v) {
  return action_values(mdp, v).rowwise().maxCoeff();
}

ValueFunction n_step_backup(const PolicyMatrices& pm, double gamma, const ValueFunction& v, std::size_t n) {
  if (n == 0) throw InvalidArgument("n_step_backup needs n >= 1");
  ValueFunction out = v;
  for (std::size_t i = 0; i < n; ++i) out = bellman_backup(pm, gamma, out);
  return out;
}

ValueFunction n_step_backup(const TabularMdp& mdp, const Policy& pi, const ValueFunction& v, std::size_t n) {
  check_length(mdp, v);
  return n_step_backup(policy_matrices(mdp, pi), mdp.gamma(), v, n);
}

ValueFunction proximal_step(const ValueFunction& target, const ValueFunction& anchor, const ProximalConfig& cfg) {
  if (target.size() != anchor.size()) throw InvalidArgument("proximal_step: target/anchor length mismatch");
  if (cfg.unregularized()) return target;
  if (cfg.generator() == Generator::kL2) {
    const double beta = cfg.beta();
    return (1.0 - beta) * target + beta * anchor;
  }
  const Matrix& q = cfg.q();
  if (q.rows() != target.size()) throw InvalidArgument("Bregman matrix Q does not match |S|");
  const auto n = target.size();
  const Matrix scaled = q / cfg.c();
  const Matrix lhs = 2.0 * Matrix::Identity(n, n) + scaled;
  const Vector rhs = 2.0 * target + scaled * anchor;
  Eigen::LLT<Matrix> llt(lhs);
  if (llt.info() != Eigen::Success) throw NumericalError("proximal quadratic system is not positive definite");
  ValueFunction out = llt.solve(rhs);
  if (!out.allFinite()) throw NumericalError("proximal quadratic solve produced non-finite values");
  return out;
}

Vector proximal_objective_gradient(const ValueFunction& point, const ValueFunction& target,
                                   const ValueFunction& anchor, const ProximalConfig& cfg) {
  Vector grad = 2.0 * (point - target);
  if (!cfg.unregularized()) grad += bregman_matrix(cfg, point.size()) * (point - anchor) / cfg.c();
  return grad;
}

ValueFunction proximal_backup_l2(const TabularMdp& mdp, const Policy& pi, const ValueFunction& v,
                                 const ProximalConfig& cfg) {
  if (cfg.generator() != Generator::kL2) throw InvalidArgument("proximal_backup_l2 needs the L2 generator");
  const ValueFunction target = n_step_backup(mdp, pi, v, cfg.n());
  if (cfg.unregularized()) return target;
  return proximal_step(target, v, cfg);
}

ValueFunction proximal_backup_quadratic(const TabularMdp& mdp, const Policy& pi, const ValueFunction& v,
                                        const ProximalConfig& cfg) {
  if (cfg.generator() != Generator::kQuadratic) {
    throw InvalidArgument("proximal_backup_quadratic needs the quadratic generator");
  }
  const ValueFunction target = n_step_backup(mdp, pi, v, cfg.n());
  return proximal_step(target, v, cfg);
}

ValueFunction proximal_backup(const TabularMdp& mdp, const Policy& pi, const ValueFunction& v,
                              const ProximalConfig& cfg) {
  return cfg.generator() == Generator::kL2 ? proximal_backup_l2(mdp, pi, v, cfg)
                                           : proximal_backup_quadratic(mdp, pi, v, cfg);
}

ValueFunction proximal_argmin_oracle(const ValueFunction& target, const ValueFunction& anchor,
                                     const ProximalConfig& cfg, const OracleSettings& settings) {
  if (target.size() != anchor.size()) throw InvalidArgument("oracle: target/anchor length mismatch");
  const auto n = target.size();
  const double weight = cfg.unregularized() ? 0.0 : 1.0 / cfg.c();
  const Matrix m = weight * bregman_matrix(cfg, n);
  ValueFunction x = anchor;
  Vector grad(n);
  for (std::size_t step = 0; step < settings.max_steps; ++step) {
    grad = 2.0 * (x - target) + m * (x - anchor);
    if (grad.norm() < settings.gradient_tol) return x;
    x -= settings.step * grad;
  }
  grad = 2.0 * (x - target) + m * (x - anchor);
  if (grad.norm() > 1e-9) {
    throw NonConvergence("proximal argmin oracle stalled with gradient norm " + std::to_string(grad.norm()));
  }
  return x;
}

ValueFunction proximal_optimality_backup(const TabularMdp& mdp, const ValueFunction& v, const ProximalConfig& cfg) {
  if (cfg.n() != 1) throw InvalidArgument("proximal_optimality_backup is defined for n = 1 only");
  return proximal_backup(mdp, greedy_policy(mdp, v), v, cfg);
}

}  // namespace proxrl
