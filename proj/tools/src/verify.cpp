#include "proxrl/bellman.hpp"
#include "proxrl/cli/cli.hpp"
#include "proxrl/deep/updates.hpp"
#include "proxrl/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

namespace proxrl::cli {

namespace {

// Suite identifiers mixed into derived seeds.
enum SuiteId : std::uint64_t { kOracles = 1, kClosedForms, kFixedPoint, kContraction, kRecursions, kGradients, kSteps };

/// Accumulates "observed vs allowed" checks for one suite.
class Tally {
 public:
  explicit Tally(std::string name) { result_.name = std::move(name); result_.worst_slack = -std::numeric_limits<double>::infinity(); }

  void check(double observed, double allowed, const std::string& what) {
    const double slack = observed - allowed;
    ++result_.checks;
    result_.worst_slack = std::max(result_.worst_slack, std::isnan(slack) ? std::numeric_limits<double>::infinity() : slack);
    if (!(slack <= 0.0)) fail(what + ": " + format_double(observed) + " > " + format_double(allowed));
  }

  void require(bool ok, const std::string& what) {
    ++result_.checks;
    if (!ok) {
      result_.worst_slack = std::max(result_.worst_slack, 1.0);
      fail(what);
    }
  }

  void fail(const std::string& what) {
    if (result_.passed) result_.detail = what;
    result_.passed = false;
  }

  void note(const std::string& text) {
    if (result_.passed) result_.detail = text;
  }

  SuiteResult done() {
    if (result_.checks == 0) result_.worst_slack = 0.0;
    return result_;
  }

 private:
  SuiteResult result_;
};

double loop_lookahead(const TabularMdp& mdp, std::size_t s, std::size_t a, const Vector& v) {
  double acc = 0.0;
  for (std::size_t t = 0; t < mdp.num_states(); ++t) acc += mdp.probability(s, a, t) * v(static_cast<Eigen::Index>(t));
  return mdp.reward(s, a) + mdp.gamma() * acc;
}

Vector uniform_vector(Eigen::Index n, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

Policy random_policy(const TabularMdp& mdp, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, mdp.num_actions() - 1);
  Policy pi{std::vector<std::size_t>(mdp.num_states())};
  for (auto& a : pi.action_of) a = pick(rng);
  return pi;
}

SuiteResult oracle_suite(const VerifyConfig& cfg) {
  Tally t("oracle_equivalences");
  for (std::size_t i = 0; i < cfg.oracle_instances; ++i) {
    std::mt19937_64 rng(derive_seed({cfg.common.seed, kOracles, i}));
    const std::size_t ns = 2 + i % 12, na = 1 + i % 4;
    const TabularMdp mdp = make_random_mdp(ns, na, 0.5 + 0.45 * static_cast<double>(i % 10) / 9.0, rng);
    const Vector v = uniform_vector(static_cast<Eigen::Index>(ns), -5.0, 5.0, rng);
    const Policy pi = random_policy(mdp, rng);

    const Vector backup = bellman_backup(mdp, pi, v);
    const Vector best = optimality_backup(mdp, v);
    const Policy greedy = greedy_policy(mdp, v);
    double backup_err = 0.0, best_err = 0.0;
    bool greedy_ok = true;
    for (std::size_t s = 0; s < ns; ++s) {
      const auto si = static_cast<Eigen::Index>(s);
      backup_err = std::max(backup_err, std::abs(backup(si) - loop_lookahead(mdp, s, pi[s], v)));
      double top = -std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t a = 0; a < na; ++a) {
        const double q = loop_lookahead(mdp, s, a, v);
        if (q > top) top = q, arg = a;
      }
      best_err = std::max(best_err, std::abs(best(si) - top));
      greedy_ok = greedy_ok && greedy[s] == arg;
    }
    t.check(backup_err, 1e-12, "bellman_backup vs loop");
    t.check(best_err, 1e-12, "optimality_backup vs loop");
    t.require(greedy_ok, "greedy_policy vs exhaustive scan");

    Vector seq = v;
    for (int k = 0; k < 3; ++k) seq = bellman_backup(mdp, pi, seq);
    t.check(sup_distance(n_step_backup(mdp, pi, v, 3), seq), 1e-12, "n_step_backup vs repeated backups");
    const Vector v_pi = evaluate_policy_exact(mdp, pi);
    t.check(sup_distance(bellman_backup(mdp, pi, v_pi), v_pi), 1e-10, "evaluate_policy_exact fixed point");
  }
  return t.done();
}

Matrix random_psd(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = g(rng);
  Matrix q = a * a.transpose();
  q /= q.norm();
  return 0.5 * (q + q.transpose());
}

SuiteResult closed_form_suite(const VerifyConfig& cfg) {
  Tally t("proximal_closed_forms");
  const double cs[] = {0.1, 1.0, 10.0};
  const std::size_t ns_opts[] = {1, 3};
  for (std::size_t i = 0; i < cfg.closed_form.instances; ++i) {
    std::mt19937_64 rng(derive_seed({cfg.common.seed, kClosedForms, i}));
    std::uniform_int_distribution<std::size_t> size(2, std::max<std::size_t>(2, cfg.closed_form.max_states));
    const std::size_t states = size(rng);
    const TabularMdp mdp = make_random_mdp(states, 3, 0.9, rng);
    const Policy pi = random_policy(mdp, rng);
    const Vector v = uniform_vector(static_cast<Eigen::Index>(states), -10.0, 10.0, rng);
    const double c = cs[i % 3];
    const std::size_t n = ns_opts[(i / 3) % 2];
    const bool quadratic = (i / 6) % 2 == 1;
    const ProximalConfig pc = quadratic
                                  ? ProximalConfig::quadratic(c, random_psd(static_cast<Eigen::Index>(states), rng), n)
                                  : ProximalConfig::l2(c, n);
    const Vector closed = proximal_backup(mdp, pi, v, pc);
    const Vector oracle = proximal_argmin_oracle(n_step_backup(mdp, pi, v, n), v, pc);
    t.check(sup_distance(closed, oracle), 1e-8, std::string(quadratic ? "quadratic" : "L2") + " closed form vs argmin");
  }
  return t.done();
}

SuiteResult fixed_point_suite(const VerifyConfig& cfg) {
  Tally t("theorem1_fixed_point");
  const auto& fp = cfg.fixed_point;
  for (std::size_t m = 0; m < fp.num_mdps; ++m) {
    std::mt19937_64 rng(derive_seed({cfg.common.seed, kFixedPoint, m}));
    const TabularMdp mdp = make_random_mdp(fp.num_states, fp.num_actions, fp.gamma, rng);
    const Vector v_star = value_iteration(mdp).v_star;
    const double scale = 1.0 / (1.0 - fp.gamma);
    for (std::size_t s = 0; s < fp.starts; ++s) {
      const Vector start = uniform_vector(static_cast<Eigen::Index>(fp.num_states), -scale, scale, rng);
      const Vector limit = proximal_fixed_point(mdp, start, ProximalConfig::l2(fp.c));
      t.check(sup_distance(limit, v_star), 1e-6, "proximal iteration limit vs value iteration");
    }
  }
  return t.done();
}

SuiteResult contraction_suite(const VerifyConfig& cfg) {
  Tally t("theorem1_contraction");
  const auto& ct = cfg.contraction;
  double worst_ratio = 0.0, bound = 0.0;
  for (std::size_t m = 0; m < ct.num_mdps; ++m) {
    std::mt19937_64 rng(derive_seed({cfg.common.seed, kContraction, m}));
    const TabularMdp mdp = make_random_mdp(ct.num_states, ct.num_actions, ct.gamma, rng);
    const ContractionProbeResult r = contraction_probe(mdp, ct.c, ct.trials, derive_seed({cfg.common.seed, kContraction, m, 1}));
    t.check(r.max_ratio, r.modulus_bound + 1e-9, "Euclidean ratio vs modulus");
    // Constant shifts: greedy policies coincide, so the ratio is the affine part only.
    std::vector<std::pair<Vector, Vector>> shifted;
    for (int k = 0; k < 10; ++k) {
      const Vector a = uniform_vector(static_cast<Eigen::Index>(ct.num_states), -10, 10, rng);
      shifted.emplace_back(a, (a.array() + 1.0 + k).matrix());
    }
    const ContractionProbeResult s = contraction_probe_pairs(mdp, ct.c, shifted);
    t.check(s.max_ratio, s.modulus_bound + 1e-9, "constant-shift ratio vs modulus");
    worst_ratio = std::max({worst_ratio, r.max_ratio, s.max_ratio});
    bound = r.modulus_bound;
  }
  t.note("max_ratio " + format_double(worst_ratio) + ", modulus_bound " + format_double(bound));
  return t.done();
}

SuiteResult recursion_suite(const VerifyConfig& cfg) {
  Tally t("theorem2_recursions");
  const auto& rc = cfg.recursions;
  const TabularMdp mdp = rc.env.build();
  const ValueIterationResult opt = solve_optimal(mdp);

  struct Job {
    double beta, delta;
    std::size_t n, seed_index;
  };
  std::vector<Job> jobs;
  for (std::size_t n : rc.ns)
    for (double delta : rc.deltas)
      for (double beta : rc.betas)
        for (std::size_t s = 0; s < rc.num_seeds; ++s) jobs.push_back({beta, delta, n, s});

  struct Outcome {
    RecursionReport report;
    double decomposition = 0.0;
  };
  std::vector<Outcome> outcomes(jobs.size());
  parallel_for(jobs.size(), cfg.common.jobs, [&](std::size_t i) {
    const Job& j = jobs[i];
    PmpiConfig pc;
    pc.beta = j.beta;
    pc.n = j.n;
    pc.iterations = rc.iterations;
    pc.flip_prob = rc.flip_prob;
    const std::uint64_t seed =
        derive_seed({cfg.common.seed, kRecursions, bits_of(j.beta), bits_of(j.delta), j.n, j.seed_index});
    const NoiseModel noise = j.delta > 0.0 ? NoiseModel::uniform(j.delta, seed) : NoiseModel::none(seed);
    const BoundTrace bt = theorem2_trace(mdp, pmpi_run(mdp, pc, noise, opt), opt.v_star, opt.pi_star);
    outcomes[i] = {check_recursions(bt, cfg.tolerance), decomposition_residual(bt)};
  });

  std::size_t violations = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Outcome& o = outcomes[i];
    const Job& j = jobs[i];
    const std::string tag = "beta " + format_double(j.beta) + " delta " + format_double(j.delta) + " n " +
                            std::to_string(j.n) + " seed " + std::to_string(j.seed_index);
    // One aggregated check per run; the worst componentwise slack carries the detail.
    t.check(o.report.worst_slack, cfg.tolerance, "recursion inequality (" + tag + ")");
    t.check(o.decomposition, 1e-10, "decomposition v* - v^pi = d + s (" + tag + ")");
    violations += o.report.violations.size();
  }
  t.note(std::to_string(jobs.size()) + " runs, " + std::to_string(violations) + " componentwise violations");
  return t.done();
}

double max_relative_error(const Vector& a, const Vector& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a(i)), std::abs(b(i)), 1e-6});
    worst = std::max(worst, std::abs(a(i) - b(i)) / scale);
  }
  return worst;
}

std::vector<deep::Transition> random_batch(std::size_t dim, std::size_t actions, std::size_t size,
                                           std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, actions - 1);
  std::uniform_int_distribution<int> kind(0, 2);
  std::vector<deep::Transition> batch(size);
  for (deep::Transition& t : batch) {
    t.state = Vector(static_cast<Eigen::Index>(dim));
    t.next_state = Vector(static_cast<Eigen::Index>(dim));
    for (Eigen::Index j = 0; j < t.state.size(); ++j) t.state(j) = g(rng), t.next_state(j) = g(rng);
    t.action = pick(rng);
    t.reward = g(rng);
    const int k = kind(rng);
    t.terminal = k == 1;
    t.truncated = k == 2;
  }
  return batch;
}

SuiteResult gradient_suite(const VerifyConfig& cfg) {
  Tally t("gradients");
  const std::vector<std::size_t> sizes{5, 8, 6, 3};
  const double h = 1e-5;
  for (std::size_t i = 0; i < cfg.gradient_instances; ++i) {
    std::mt19937_64 rng(derive_seed({cfg.common.seed, kGradients, i}));
    std::normal_distribution<double> g(0.0, 0.5);
    Vector pw(static_cast<Eigen::Index>(deep::QNetwork::param_count(sizes)));
    Vector pt(pw.size());
    for (Eigen::Index k = 0; k < pw.size(); ++k) pw(k) = g(rng), pt(k) = g(rng);
    const deep::QNetwork target(sizes, pt);
    const auto batch = random_batch(5, 3, 8, rng);
    const double c_tilde = 0.2 + 0.1 * static_cast<double>(i);
    for (bool value_space : {false, true}) {
      auto loss_and_grad = [&](const Vector& w) {
        const deep::QNetwork online(sizes, w);
        return value_space ? deep::value_space_prox_grad(online, target, batch, 0.95, c_tilde)
                           : deep::td_loss_and_grad(online, target, batch, 0.95);
      };
      const Vector grad = loss_and_grad(pw).grad;
      Vector fd(pw.size());
      Vector probe = pw;
      for (Eigen::Index k = 0; k < pw.size(); ++k) {
        probe(k) = pw(k) + h;
        const double up = loss_and_grad(probe).loss;
        probe(k) = pw(k) - h;
        const double down = loss_and_grad(probe).loss;
        probe(k) = pw(k);
        fd(k) = (up - down) / (2.0 * h);
      }
      t.check(max_relative_error(grad, fd), 1e-4,
              std::string(value_space ? "value-space proximal" : "TD") + " gradient vs finite differences");
    }
  }
  return t.done();
}

bool same_bits(const Vector& a, const Vector& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

SuiteResult step_suite(const VerifyConfig& cfg, const VerifyHooks& hooks) {
  Tally t("step_algebra");
  const ProStepFn pro = hooks.dqn_pro_step ? hooks.dqn_pro_step : ProStepFn(deep::dqn_pro_step);
  {
    const Vector w = (Vector(2) << 1, 1).finished();
    const Vector g = (Vector(2) << 1, -1).finished();
    const Vector out = pro(w, Vector::Zero(2), g, 0.1, 0.2);
    t.check(sup_distance(out, (Vector(2) << 0.4, 0.6).finished()), 1e-15, "worked example");
  }
  for (std::size_t i = 0; i < cfg.step_instances; ++i) {
    std::mt19937_64 rng(derive_seed({cfg.common.seed, kSteps, i}));
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(i % 31);
    const Vector w = uniform_vector(n, -3, 3, rng);
    const Vector theta = uniform_vector(n, -3, 3, rng);
    const Vector grad = uniform_vector(n, -3, 3, rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double alpha = 1e-4 + unit(rng);
    const double c_tilde = alpha / (0.01 + 0.99 * unit(rng));  // alpha / c_tilde in (0, 1]

    t.require(same_bits(pro(w, theta, grad, alpha, deep::kNoProximalTerm), deep::dqn_step(w, grad, alpha)),
              "infinite c_tilde reduces to the plain step bitwise");
    const double s = alpha / c_tilde;
    const Vector expected = (1.0 - s) * w + s * theta;
    t.require(same_bits(pro(w, theta, Vector::Zero(n), alpha, c_tilde), expected),
              "zero-gradient step is the exact convex combination");
  }
  return t.done();
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed; });
}

VerifyReport run_verify(const VerifyConfig& cfg, const VerifyHooks& hooks) {
  validate(cfg);
  VerifyReport report;
  report.suites.push_back(oracle_suite(cfg));
  report.suites.push_back(closed_form_suite(cfg));
  report.suites.push_back(fixed_point_suite(cfg));
  report.suites.push_back(contraction_suite(cfg));
  report.suites.push_back(recursion_suite(cfg));
  report.suites.push_back(gradient_suite(cfg));
  report.suites.push_back(step_suite(cfg, hooks));
  return report;
}

std::string verify_report_to_json(const VerifyReport& report) {
  using nlohmann::json;
  json suites = json::array();
  for (const SuiteResult& s : report.suites) {
    suites.push_back({{"name", s.name},
                      {"passed", s.passed},
                      {"checks", s.checks},
                      {"worst_slack", std::isfinite(s.worst_slack) ? json(s.worst_slack) : json(nullptr)},
                      {"detail", s.detail}});
  }
  json doc = {{"passed", report.passed()}, {"suites", suites}};
  return doc.dump(2) + "\n";
}

}  // namespace proxrl::cli
