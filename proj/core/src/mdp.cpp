#include "proxrl/mdp.hpp"

#include "proxrl/errors.hpp"

#include <cmath>
#include <string>

namespace proxrl {

namespace {

constexpr double kStochasticTol = 1e-12;

}  // namespace

TabularMdp::TabularMdp(std::vector<Matrix> transition, Matrix reward, double gamma)
    : transition_(std::move(transition)), reward_(std::move(reward)), gamma_(gamma) {
  if (!(gamma_ >= 0.0 && gamma_ < 1.0)) {
    throw InvalidArgument("gamma must lie in [0, 1), got " + std::to_string(gamma_));
  }
  const auto num_s = reward_.rows();
  if (num_s == 0 || transition_.empty()) {
    throw InvalidArgument("MDP needs at least one state and one action");
  }
  if (reward_.cols() != static_cast<Eigen::Index>(transition_.size())) {
    throw InvalidArgument("reward has " + std::to_string(reward_.cols()) + " columns but there are " +
                          std::to_string(transition_.size()) + " actions");
  }
  if (!reward_.allFinite()) {
    throw InvalidArgument("reward entries must be finite");
  }
  for (std::size_t a = 0; a < transition_.size(); ++a) {
    const Matrix& p = transition_[a];
    if (p.rows() != num_s || p.cols() != num_s) {
      throw InvalidArgument("transition matrix for action " + std::to_string(a) + " is not |S|x|S|");
    }
    if (!p.allFinite() || (p.array() < 0.0).any()) {
      throw InvalidArgument("transition probabilities must be finite and non-negative (action " +
                            std::to_string(a) + ")");
    }
    for (Eigen::Index s = 0; s < num_s; ++s) {
      const double row_sum = p.row(s).sum();
      if (std::abs(row_sum - 1.0) > kStochasticTol) {
        throw InvalidArgument("P[" + std::to_string(s) + "][" + std::to_string(a) + "] sums to " +
                              std::to_string(row_sum));
      }
    }
  }
}

TabularMdp TabularMdp::with_gamma(double gamma) const { return TabularMdp(transition_, reward_, gamma); }

void validate_policy(const TabularMdp& mdp, const Policy& pi) {
  if (pi.size() != mdp.num_states()) {
    throw InvalidPolicy("policy covers " + std::to_string(pi.size()) + " states, MDP has " +
                        std::to_string(mdp.num_states()));
  }
  for (std::size_t s = 0; s < pi.size(); ++s) {
    if (pi[s] >= mdp.num_actions()) {
      throw InvalidPolicy("policy picks action " + std::to_string(pi[s]) + " in state " + std::to_string(s) +
                          " but only " + std::to_string(mdp.num_actions()) + " actions exist");
    }
  }
}

PolicyMatrices policy_matrices(const TabularMdp& mdp, const Policy& pi) {
  validate_policy(mdp, pi);
  const auto n = static_cast<Eigen::Index>(mdp.num_states());
  PolicyMatrices out{Vector(n), Matrix(n, n)};
  for (Eigen::Index s = 0; s < n; ++s) {
    const std::size_t a = pi[static_cast<std::size_t>(s)];
    out.reward(s) = mdp.reward(static_cast<std::size_t>(s), a);
    out.transition.row(s) = mdp.transition(a).row(s);
  }
  return out;
}

ValueFunction evaluate_policy_exact(const TabularMdp& mdp, const Policy& pi) {
  const PolicyMatrices pm = policy_matrices(mdp, pi);
  const auto n = pm.reward.size();
  const Matrix system = Matrix::Identity(n, n) - mdp.gamma() * pm.transition;
  Eigen::PartialPivLU<Matrix> lu(system);
  ValueFunction v = lu.solve(pm.reward);
  if (!v.allFinite()) {
    throw NumericalError("policy evaluation produced non-finite values");
  }
  return v;
}

Matrix action_values(const TabularMdp& mdp, const ValueFunction& v) {
  if (v.size() != static_cast<Eigen::Index>(mdp.num_states())) {
    throw InvalidArgument("value function length does not match |S|");
  }
  Matrix q = mdp.reward();
  for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
    q.col(static_cast<Eigen::Index>(a)).noalias() += mdp.gamma() * (mdp.transition(a) * v);
  }
  return q;
}

Policy greedy_policy(const TabularMdp& mdp, const ValueFunction& v) {
  const Matrix q = action_values(mdp, v);
  Policy pi{std::vector<std::size_t>(mdp.num_states(), 0)};
  for (Eigen::Index s = 0; s < q.rows(); ++s) {
    std::size_t best = 0;
    for (Eigen::Index a = 1; a < q.cols(); ++a) {
      if (q(s, a) > q(s, static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(a);
    }
    pi.action_of[static_cast<std::size_t>(s)] = best;
  }
  return pi;
}

ValueIterationResult value_iteration(const TabularMdp& mdp, double tol, std::size_t max_iterations) {
  if (!(tol > 0.0)) throw InvalidArgument("value_iteration tolerance must be positive");
  ValueFunction v = ValueFunction::Zero(static_cast<Eigen::Index>(mdp.num_states()));
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    ValueFunction next = action_values(mdp, v).rowwise().maxCoeff();
    const double residual = (next - v).lpNorm<Eigen::Infinity>();
    v = std::move(next);
    // ||v - T*v|| <= gamma * ||previous residual||, so stop on the contracted bound.
    if (mdp.gamma() * residual <= tol) {
      return {v, greedy_policy(mdp, v), it};
    }
  }
  throw NonConvergence("value_iteration did not reach tolerance within " + std::to_string(max_iterations) +
                       " iterations");
}

ValueIterationResult solve_optimal(const TabularMdp& mdp, double tol) {
  ValueIterationResult vi = value_iteration(mdp, tol);
  vi.v_star = evaluate_policy_exact(mdp, vi.pi_star);
  return vi;
}

double sup_distance(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("sup_distance on vectors of length " + std::to_string(a.size()) + " and " +
                          std::to_string(b.size()));
  }
  if (a.size() == 0) return 0.0;
  return (a - b).lpNorm<Eigen::Infinity>();
}

TabularMdp make_random_mdp(std::size_t num_states, std::size_t num_actions, double gamma,
                           std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  const auto n = static_cast<Eigen::Index>(num_states);
  std::vector<Matrix> transition(num_actions, Matrix(n, n));
  Matrix reward(n, static_cast<Eigen::Index>(num_actions));
  for (auto& p : transition) {
    for (Eigen::Index s = 0; s < n; ++s) {
      for (Eigen::Index t = 0; t < n; ++t) p(s, t) = expo(rng);
      p.row(s) /= p.row(s).sum();
    }
  }
  for (Eigen::Index s = 0; s < n; ++s) {
    for (Eigen::Index a = 0; a < reward.cols(); ++a) reward(s, a) = unit(rng);
  }
  return TabularMdp(std::move(transition), std::move(reward), gamma);
}

}  // namespace proxrl
