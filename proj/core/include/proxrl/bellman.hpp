#pragma once

#include "proxrl/mdp.hpp"

#include <cstddef>
#include <limits>

namespace proxrl {

/// Value of c meaning "no proximal term".
inline constexpr double kNoProximal = std::numeric_limits<double>::infinity();

enum class Generator {
  /// f(v) = ||v||^2, so D_f(v', v) = ||v' - v||^2. Gives the beta-interpolation form.
  kL2,
  /// f(v) = 1/2 <v, Q v> with Q symmetric PSD, D_f(v', v) = 1/2 (v'-v)^T Q (v'-v).
  kQuadratic,
};

/// Proximal knobs: strength c, backup depth n and the Bregman generator.
class ProximalConfig {
 public:
  static ProximalConfig l2(double c, std::size_t n = 1);
  static ProximalConfig quadratic(double c, Matrix q, std::size_t n = 1);
  /// L2 config from the interpolation weight; beta = 0 maps to c = +inf.
  static ProximalConfig from_beta(double beta, std::size_t n = 1);

  double c() const { return c_; }
  std::size_t n() const { return n_; }
  Generator generator() const { return generator_; }
  const Matrix& q() const { return q_; }
  bool unregularized() const { return c_ == kNoProximal; }

  /// 1 / (1 + c), and exactly 0 when c is infinite.
  double beta() const;

  ProximalConfig with_n(std::size_t n) const;

 private:
  ProximalConfig(double c, std::size_t n, Generator generator, Matrix q);

  double c_;
  std::size_t n_;
  Generator generator_;
  Matrix q_;
};

/// T^pi v = R^pi + gamma P^pi v.
ValueFunction bellman_backup(const TabularMdp& mdp, const Policy& pi, const ValueFunction& v);
ValueFunction bellman_backup(const PolicyMatrices& pm, double gamma, const ValueFunction& v);

/// T* v, the per-state max of one-step lookahead values.
ValueFunction optimality_backup(const TabularMdp& mdp, const ValueFunction& v);

/// (T^pi)^n v.
ValueFunction n_step_backup(const TabularMdp& mdp, const Policy& pi, const ValueFunction& v, std::size_t n);
ValueFunction n_step_backup(const PolicyMatrices& pm, double gamma, const ValueFunction& v, std::size_t n);

/// Closed-form minimiser of ||v' - target||^2 + (1/c) D_f(v', anchor).
ValueFunction proximal_step(const ValueFunction& target, const ValueFunction& anchor, const ProximalConfig& cfg);

/// Gradient in v' of ||v' - target||^2 + (1/c) D_f(v', anchor).
Vector proximal_objective_gradient(const ValueFunction& point, const ValueFunction& target,
                                   const ValueFunction& anchor, const ProximalConfig& cfg);

/// (1 - beta) (T^pi)^n v + beta v. Requires the L2 generator.
ValueFunction proximal_backup_l2(const TabularMdp& mdp, const Policy& pi, const ValueFunction& v,
                                 const ProximalConfig& cfg);

/// Solves (2I + Q/c) v' = 2 (T^pi)^n v + (Q/c) v. Requires the quadratic generator.
ValueFunction proximal_backup_quadratic(const TabularMdp& mdp, const Policy& pi, const ValueFunction& v,
                                        const ProximalConfig& cfg);

/// Dispatches on the generator.
ValueFunction proximal_backup(const TabularMdp& mdp, const Policy& pi, const ValueFunction& v,
                              const ProximalConfig& cfg);

struct OracleSettings {
  double step = 1e-2;
  std::size_t max_steps = 200'000;
  double gradient_tol = 1e-12;
};

/// Minimises the proximal objective by plain gradient descent from the anchor.
/// Independent of proximal_step; used to check the closed forms. Throws
/// NonConvergence if the final gradient norm exceeds 1e-9.
ValueFunction proximal_argmin_oracle(const ValueFunction& target, const ValueFunction& anchor,
                                     const ProximalConfig& cfg, const OracleSettings& settings = {});

/// Greedy policy of v followed by the proximal one-step backup. Requires n == 1.
ValueFunction proximal_optimality_backup(const TabularMdp& mdp, const ValueFunction& v, const ProximalConfig& cfg);

}  // namespace proxrl
