#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace proxrl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// State-value function, one entry per state.
using ValueFunction = Eigen::VectorXd;

/// Deterministic policy: one action index per state.
struct Policy {
  std::vector<std::size_t> action_of;

  std::size_t size() const { return action_of.size(); }
  std::size_t operator[](std::size_t s) const { return action_of[s]; }
  bool operator==(const Policy&) const = default;

  static Policy constant(std::size_t num_states, std::size_t action) {
    return Policy{std::vector<std::size_t>(num_states, action)};
  }
};

/// Finite discounted MDP <S, A, R, P, gamma> with dense transitions.
///
/// Transitions are stored per action as |S|x|S| row-stochastic matrices, so
/// transition(a)(s, s') = P(s' | s, a). Rewards are an |S|x|A| matrix.
/// The constructor validates stochasticity (1e-12), non-negativity,
/// finiteness of rewards and 0 <= gamma < 1; it throws InvalidArgument.
class TabularMdp {
 public:
  TabularMdp(std::vector<Matrix> transition, Matrix reward, double gamma);

  std::size_t num_states() const { return static_cast<std::size_t>(reward_.rows()); }
  std::size_t num_actions() const { return transition_.size(); }
  double gamma() const { return gamma_; }

  const Matrix& reward() const { return reward_; }
  double reward(std::size_t s, std::size_t a) const {
    return reward_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
  }
  const Matrix& transition(std::size_t a) const { return transition_[a]; }
  double probability(std::size_t s, std::size_t a, std::size_t next) const {
    return transition_[a](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(next));
  }

  TabularMdp with_gamma(double gamma) const;

 private:
  std::vector<Matrix> transition_;
  Matrix reward_;
  double gamma_;
};

struct PolicyMatrices {
  Vector reward;      // R^pi
  Matrix transition;  // P^pi
};

/// Throws InvalidPolicy unless pi has |S| entries, each < |A|.
void validate_policy(const TabularMdp& mdp, const Policy& pi);

PolicyMatrices policy_matrices(const TabularMdp& mdp, const Policy& pi);

/// Solves (I - gamma P^pi) v = R^pi.
ValueFunction evaluate_policy_exact(const TabularMdp& mdp, const Policy& pi);

/// |S|x|A| matrix of one-step lookahead values R(s,a) + gamma sum_s' P(s,a,s') v(s').
Matrix action_values(const TabularMdp& mdp, const ValueFunction& v);

/// Greedy policy; ties go to the lowest action index.
Policy greedy_policy(const TabularMdp& mdp, const ValueFunction& v);

struct ValueIterationResult {
  ValueFunction v_star;
  Policy pi_star;
  std::size_t iterations = 0;
};

/// Optimality backups from zero until ||v - T* v||_inf <= tol.
ValueIterationResult value_iteration(const TabularMdp& mdp, double tol = 1e-10,
                                     std::size_t max_iterations = 1'000'000);

/// Optimal policy and its exactly evaluated value. The returned value is a
/// fixed point of T^{pi*} to solver precision, which the error-propagation
/// checks rely on.
ValueIterationResult solve_optimal(const TabularMdp& mdp, double tol = 1e-10);

double sup_distance(const Vector& a, const Vector& b);

/// Random MDP with Dirichlet(1)-like rows and rewards uniform in [0, 1).
TabularMdp make_random_mdp(std::size_t num_states, std::size_t num_actions, double gamma,
                           std::mt19937_64& rng);

}  // namespace proxrl
