#include "proxrl/bounds.hpp"

#include "proxrl/errors.hpp"
#include "proxrl/util.hpp"

#include <json.hpp>

#include <cmath>
#include <random>

namespace proxrl {

namespace {

// (1 - beta) (gamma P)^n z + beta z
Vector interpolated_power(const Matrix& gamma_p, std::size_t n, double beta, const Vector& z) {
  Vector power = z;
  for (std::size_t j = 0; j < n; ++j) power = gamma_p * power;
  return (1.0 - beta) * power + beta * z;
}

// eps'_k on perturbed states of step k, measured against v_{k-1}.
Vector greedification_error(const TabularMdp& mdp, const PmpiStep& step, const ValueFunction& v_prev) {
  Vector eps = Vector::Zero(static_cast<Eigen::Index>(mdp.num_states()));
  bool any = false;
  for (auto f : step.flipped) any = any || f;
  if (!any) return eps;
  const Matrix q = action_values(mdp, v_prev);
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    if (!step.flipped[s]) continue;
    const auto si = static_cast<Eigen::Index>(s);
    eps(si) = q.row(si).maxCoeff() - q(si, static_cast<Eigen::Index>(step.pi[s]));
  }
  return eps;
}

}  // namespace

Vector bellman_residual(const TabularMdp& mdp, const ValueFunction& v, const Policy& pi_next) {
  return v - bellman_backup(mdp, pi_next, v);
}

BoundTrace theorem2_trace(const TabularMdp& mdp, const PmpiTrace& trace, const ValueFunction& v_star,
                          const Policy& pi_star) {
  const std::size_t iters = trace.steps.size();
  if (iters == 0) throw InvalidArgument("theorem2_trace needs a non-empty PMPI trace");
  const auto ns = static_cast<Eigen::Index>(mdp.num_states());
  if (v_star.size() != ns || trace.v0.size() != ns) throw InvalidArgument("trace does not match the MDP");
  const double gamma = mdp.gamma();
  const double beta = trace.beta;
  const std::size_t n = trace.n;

  // values[k] = v_k, policies[k] = pi_k (policies[0] unused).
  std::vector<const ValueFunction*> values{&trace.v0};
  std::vector<Policy> policies{Policy{}};
  for (const PmpiStep& st : trace.steps) {
    values.push_back(&st.v);
    policies.push_back(st.pi);
  }
  policies.push_back(greedy_policy(mdp, *values[iters]));  // pi_{K+1}

  std::vector<PolicyMatrices> pm;
  pm.reserve(iters + 2);
  pm.push_back(PolicyMatrices{});
  for (std::size_t k = 1; k <= iters + 1; ++k) pm.push_back(policy_matrices(mdp, policies[k]));

  // eps'_k for k = 1..K+1; the final policy is exactly greedy.
  std::vector<Vector> eps_prime(iters + 2, Vector::Zero(ns));
  for (std::size_t k = 1; k <= iters; ++k) {
    eps_prime[k] = greedification_error(mdp, trace.steps[k - 1], *values[k - 1]);
  }

  std::vector<Vector> b(iters + 1);
  for (std::size_t k = 0; k <= iters; ++k) b[k] = *values[k] - bellman_backup(pm[k + 1], gamma, *values[k]);

  const Matrix gamma_p_star = gamma * policy_matrices(mdp, pi_star).transition;

  BoundTrace out;
  out.beta = beta;
  out.n = n;
  out.b0 = b[0];
  out.steps.reserve(iters);
  for (std::size_t k = 1; k <= iters; ++k) {
    const PmpiStep& st = trace.steps[k - 1];
    const ValueFunction& v_prev = *values[k - 1];
    const Matrix gamma_p = gamma * pm[k].transition;
    const Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(ns, ns) - gamma_p);

    const ValueFunction u = beta == 1.0 ? v_prev : ValueFunction((1.0 - beta) * n_step_backup(pm[k], gamma, v_prev, n) +
                                                                 beta * v_prev);
    const ValueFunction v_pi = lu.solve(pm[k].reward);
    if (!v_pi.allFinite()) throw NumericalError("policy evaluation failed inside theorem2_trace");

    BoundStep step;
    step.k = k;
    step.b = b[k];
    step.d = v_star - u;
    step.s = u - v_pi;
    step.x = st.epsilon - gamma_p * st.epsilon;
    step.y = gamma_p_star * st.epsilon;
    step.eps_prime = eps_prime[k];
    step.value_gap = v_star - v_pi;

    step.rhs_b = interpolated_power(gamma_p, n, beta, b[k - 1]) + (1.0 - beta) * step.x + eps_prime[k + 1];
    const Vector resolvent = lu.solve(b[k - 1]);
    step.rhs_s = interpolated_power(gamma_p, n, beta, resolvent);

    if (k >= 2) {
      const BoundStep& prev = out.steps.back();
      Vector lookahead = Vector::Zero(ns);
      Vector power = b[k - 1];
      for (std::size_t j = 1; j < n; ++j) {
        power = gamma_p * power;
        lookahead += power;
      }
      step.rhs_d = Vector(gamma_p_star * prev.d - ((1.0 - beta) * prev.y + beta * b[k - 1]) +
                          (1.0 - beta) * lookahead + eps_prime[k]);
    }
    out.steps.push_back(std::move(step));
  }
  return out;
}

RecursionReport check_recursions(const BoundTrace& trace, double tol) {
  if (!(tol >= 0.0)) throw InvalidArgument("check_recursions tolerance must be non-negative");
  RecursionReport report;
  auto check = [&](std::size_t k, char which, const Vector& lhs, const Vector& rhs) {
    for (Eigen::Index s = 0; s < lhs.size(); ++s) {
      const double slack = lhs(s) - rhs(s);
      ++report.checks;
      report.worst_slack = std::max(report.worst_slack, slack);
      if (!(slack <= tol)) report.violations.push_back({k, which, static_cast<std::size_t>(s), slack});
    }
  };
  for (const BoundStep& st : trace.steps) {
    check(st.k, 'b', st.b, st.rhs_b);
    check(st.k, 's', st.s, st.rhs_s);
    if (st.rhs_d) check(st.k, 'd', st.d, *st.rhs_d);
  }
  return report;
}

double decomposition_residual(const BoundTrace& trace) {
  double worst = 0.0;
  for (const BoundStep& st : trace.steps) {
    worst = std::max(worst, (st.value_gap - (st.d + st.s)).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

namespace {

void check_probe_precondition(const TabularMdp& mdp, double c) {
  const double threshold = 2.0 / (1.0 - mdp.gamma());
  if (!(c > threshold) || c == kNoProximal) {
    throw InvalidArgument("contraction probe needs finite c > 2/(1-gamma) = " + format_double(threshold) +
                          ", got c = " + format_double(c));
  }
}

void accumulate_ratio(const TabularMdp& mdp, const ProximalConfig& cfg, const Vector& v1, const Vector& v2,
                      ContractionProbeResult& out) {
  const Vector diff_in = v1 - v2;
  const double denom = diff_in.norm();
  if (denom == 0.0) return;
  const Vector diff_out = proximal_optimality_backup(mdp, v1, cfg) - proximal_optimality_backup(mdp, v2, cfg);
  out.max_ratio = std::max(out.max_ratio, diff_out.norm() / denom);
  out.max_ratio_sup =
      std::max(out.max_ratio_sup, diff_out.lpNorm<Eigen::Infinity>() / diff_in.lpNorm<Eigen::Infinity>());
  ++out.trials;
}

}  // namespace

ContractionProbeResult contraction_probe(const TabularMdp& mdp, double c, std::size_t trials, std::uint64_t seed) {
  check_probe_precondition(mdp, c);
  const ProximalConfig cfg = ProximalConfig::l2(c, 1);
  ContractionProbeResult out;
  out.modulus_bound = (mdp.gamma() * c + 1.0) / (c - 1.0);
  const double scale = 1.0 / (1.0 - mdp.gamma());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> draw(-scale, scale);
  const auto ns = static_cast<Eigen::Index>(mdp.num_states());
  Vector v1(ns), v2(ns);
  while (out.trials < trials) {
    for (Eigen::Index s = 0; s < ns; ++s) v1(s) = draw(rng);
    for (Eigen::Index s = 0; s < ns; ++s) v2(s) = draw(rng);
    accumulate_ratio(mdp, cfg, v1, v2, out);
  }
  return out;
}

ContractionProbeResult contraction_probe_pairs(const TabularMdp& mdp, double c,
                                               const std::vector<std::pair<Vector, Vector>>& pairs) {
  check_probe_precondition(mdp, c);
  const ProximalConfig cfg = ProximalConfig::l2(c, 1);
  ContractionProbeResult out;
  out.modulus_bound = (mdp.gamma() * c + 1.0) / (c - 1.0);
  for (const auto& [v1, v2] : pairs) accumulate_ratio(mdp, cfg, v1, v2, out);
  return out;
}

ValueFunction proximal_fixed_point(const TabularMdp& mdp, const ValueFunction& start, const ProximalConfig& cfg,
                                   double tol, std::size_t max_iterations) {
  ValueFunction v = start;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    ValueFunction next = proximal_optimality_backup(mdp, v, cfg);
    const double step = sup_distance(next, v);
    v = std::move(next);
    if (step <= tol) return v;
  }
  throw NonConvergence("proximal optimality iteration did not settle within " + std::to_string(max_iterations) +
                       " iterations");
}

std::string bound_report_to_json(const RecursionReport& report, const ContractionProbeResult* probe) {
  using nlohmann::json;
  json doc;
  json violations = json::array();
  for (const Violation& v : report.violations) {
    violations.push_back({{"k", v.k}, {"which", std::string(1, v.which)}, {"state", v.state}, {"slack", v.slack}});
  }
  doc["violations"] = std::move(violations);
  doc["checks"] = report.checks;
  doc["worst_slack"] = report.checks > 0 ? json(report.worst_slack) : json(nullptr);
  doc["max_ratio"] = probe ? json(probe->max_ratio) : json(nullptr);
  doc["modulus_bound"] = probe ? json(probe->modulus_bound) : json(nullptr);
  return doc.dump(2);
}

}  // namespace proxrl
