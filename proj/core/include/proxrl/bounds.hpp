#pragma once

#include "proxrl/bellman.hpp"
#include "proxrl/mdp.hpp"
#include "proxrl/pmpi.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace proxrl {

/// Quantities of the PMPI error-propagation recursions at iteration k >= 1.
///
/// With u_k = (1-beta)(T^{pi_k})^n v_{k-1} + beta v_{k-1} (the noise-free part of v_k):
///   b_k = v_k - T^{pi_{k+1}} v_k,   d_k = v* - u_k,   s_k = u_k - v^{pi_k},
///   x_k = (I - gamma P^{pi_k}) eps_k,   y_k = gamma P^{pi*} eps_k.
/// The rhs_* vectors are the recursion bounds built from iteration k-1.
struct BoundStep {
  std::size_t k = 0;
  Vector b, d, s, x, y;
  Vector eps_prime;  // eps'_k; zero unless greedification was perturbed
  Vector value_gap;  // v* - v^{pi_k}
  Vector rhs_b, rhs_s;
  std::optional<Vector> rhs_d;  // needs d_{k-1}, so absent at k = 1
};

struct BoundTrace {
  double beta = 0.0;
  std::size_t n = 1;
  Vector b0;  // v_0 - T^{pi_1} v_0
  std::vector<BoundStep> steps;
};

/// v - T^{pi_next} v.
Vector bellman_residual(const TabularMdp& mdp, const ValueFunction& v, const Policy& pi_next);

/// Recomputes every left-hand side exactly and every right-hand side from the
/// previous iteration's quantities and the recorded noise. When the trace has
/// flipped states, eps'_k is the tightest valid bound max_a T^a v_{k-1} - T^{pi_k} v_{k-1}
/// on those states.
BoundTrace theorem2_trace(const TabularMdp& mdp, const PmpiTrace& trace, const ValueFunction& v_star,
                          const Policy& pi_star);

struct Violation {
  std::size_t k = 0;
  char which = 'b';  // 'b', 'd' or 's'
  std::size_t state = 0;
  double slack = 0.0;  // lhs - rhs, positive when violated
};

struct RecursionReport {
  std::vector<Violation> violations;
  /// Largest lhs - rhs seen over all checks (negative when every bound is strict).
  double worst_slack = -std::numeric_limits<double>::infinity();
  std::size_t checks = 0;

  bool ok() const { return violations.empty(); }
};

/// Flags every component where lhs > rhs + tol, for k >= 1.
RecursionReport check_recursions(const BoundTrace& trace, double tol);

/// max_k ||(v* - v^{pi_k}) - (d_k + s_k)||_inf.
double decomposition_residual(const BoundTrace& trace);

struct ContractionProbeResult {
  double max_ratio = 0.0;      // Euclidean
  double max_ratio_sup = 0.0;  // sup norm, logged only
  double modulus_bound = 0.0;  // (gamma c + 1) / (c - 1)
  std::size_t trials = 0;
};

/// Samples random pairs with entries Uniform[-1/(1-gamma), 1/(1-gamma)] and
/// measures ||T*_c v1 - T*_c v2|| / ||v1 - v2|| for the L2 proximal operator.
/// Throws InvalidArgument unless c > 2 / (1 - gamma).
ContractionProbeResult contraction_probe(const TabularMdp& mdp, double c, std::size_t trials, std::uint64_t seed);

/// Same probe on caller-supplied pairs (used for structured directions).
ContractionProbeResult contraction_probe_pairs(const TabularMdp& mdp, double c,
                                               const std::vector<std::pair<Vector, Vector>>& pairs);

/// Iterates proximal_optimality_backup until successive iterates differ by at
/// most tol in sup norm. Throws NonConvergence after max_iterations.
ValueFunction proximal_fixed_point(const TabularMdp& mdp, const ValueFunction& start, const ProximalConfig& cfg,
                                   double tol = 1e-12, std::size_t max_iterations = 1'000'000);

/// {"violations": [...], "worst_slack", "checks", "max_ratio", "modulus_bound"}; the
/// probe fields are null when no probe is given.
std::string bound_report_to_json(const RecursionReport& report, const ContractionProbeResult* probe);

}  // namespace proxrl
