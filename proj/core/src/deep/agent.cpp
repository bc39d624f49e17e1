#include "proxrl/deep/agent.hpp"

#include "proxrl/errors.hpp"
#include "proxrl/util.hpp"

#include <cmath>
#include <sstream>

namespace proxrl::deep {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kDqn:
      return "dqn";
    case Variant::kDqnPro:
      return "dqn_pro";
    case Variant::kValueSpacePro:
      return "value_space_pro";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& name) {
  if (name == "dqn") return Variant::kDqn;
  if (name == "dqn_pro") return Variant::kDqnPro;
  if (name == "value_space_pro") return Variant::kValueSpacePro;
  throw InvalidArgument("unknown agent variant '" + name + "'");
}

void AgentConfig::validate() const {
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  if (!(c_tilde > 0.0)) throw InvalidArgument("c_tilde must be positive");
  target_mode.validate();
  for (double e : {epsilon_start, epsilon_train, epsilon_eval}) {
    if (!(e >= 0.0 && e <= 1.0)) throw InvalidArgument("epsilons must lie in [0, 1]");
  }
  if (batch_size == 0 || updates_per_step == 0 || buffer_capacity == 0) {
    throw InvalidArgument("batch size, updates per step and buffer capacity must be positive");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("gamma must lie in [0, 1)");
  if (eval_every == 0 || eval_episodes == 0) throw InvalidArgument("evaluation cadence must be positive");
  if (anneal_alpha_final && target_mode.kind != TargetMode::Kind::kPeriodic) {
    throw InvalidArgument("learning-rate annealing needs a periodic target");
  }
  if (anneal_alpha_final && !(*anneal_alpha_final > 0.0)) throw InvalidArgument("alpha_final must be positive");
}

double epsilon_schedule(const AgentConfig& cfg, std::size_t step) {
  if (cfg.epsilon_decay_steps == 0 || step >= cfg.epsilon_decay_steps) return cfg.epsilon_train;
  const double frac = static_cast<double>(step) / static_cast<double>(cfg.epsilon_decay_steps);
  return cfg.epsilon_start + (cfg.epsilon_train - cfg.epsilon_start) * frac;
}

std::vector<double> evaluate_policy(const QNetwork& net, const EpisodicEnv& env, std::size_t episodes, double eps,
                                    double gamma, std::mt19937_64& rng) {
  std::unique_ptr<EpisodicEnv> eval_env = env.clone();
  std::vector<double> returns;
  returns.reserve(episodes);
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    Vector s = eval_env->reset();
    double ret = 0.0;
    double discount = 1.0;
    for (;;) {
      const StepResult r = eval_env->step(epsilon_greedy(net.forward(s), eps, rng));
      ret += discount * r.reward;
      discount *= gamma;
      if (r.terminal || r.truncated) break;
      s = r.state;
    }
    returns.push_back(ret);
  }
  return returns;
}

namespace {

CurvePoint summarise(std::size_t step, const std::vector<double>& returns) {
  const double m = static_cast<double>(returns.size());
  double mean = 0.0;
  for (double r : returns) mean += r;
  mean /= m;
  double sq = 0.0;
  for (double r : returns) sq += (r - mean) * (r - mean);
  const double se = returns.size() > 1 ? std::sqrt(sq / (m - 1.0)) / std::sqrt(m) : 0.0;
  return {step, mean, se};
}

class Adam {
 public:
  Adam(Eigen::Index n, const AgentConfig& cfg)
      : m_(Vector::Zero(n)), v_(Vector::Zero(n)), b1_(cfg.adam_beta1), b2_(cfg.adam_beta2), eps_(cfg.adam_epsilon) {}

  Vector direction(const Vector& grad) {
    ++t_;
    m_ = b1_ * m_ + (1.0 - b1_) * grad;
    v_ = b2_ * v_ + (1.0 - b2_) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    return (m_ / c1).array() / ((v_ / c2).array().sqrt() + eps_);
  }

 private:
  Vector m_, v_;
  double b1_, b2_, eps_;
  std::size_t t_ = 0;
};

}  // namespace

TrainResult train(const EpisodicEnv& env_template, const AgentConfig& cfg, Variant variant) {
  cfg.validate();
  std::vector<std::size_t> sizes{env_template.state_dim()};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(env_template.num_actions());

  std::mt19937_64 init_rng(derive_seed({cfg.seed, 11}));
  std::mt19937_64 act_rng(derive_seed({cfg.seed, 12}));
  std::mt19937_64 eval_rng(derive_seed({cfg.seed, 13}));
  ReplayBuffer buffer(cfg.buffer_capacity, derive_seed({cfg.seed, 14}));

  QNetwork online = QNetwork::glorot(sizes, init_rng);
  QNetwork target = online;
  std::optional<Adam> adam;
  if (cfg.adaptive) adam.emplace(online.params().size(), cfg);

  std::unique_ptr<EpisodicEnv> env = env_template.clone();
  TrainResult result;
  result.layer_sizes = sizes;

  const bool periodic = cfg.target_mode.kind == TargetMode::Kind::kPeriodic;
  std::size_t num_updates = 0;
  Vector state = env->reset();
  for (std::size_t step = 1; step <= cfg.total_steps; ++step) {
    const std::size_t action = epsilon_greedy(online.forward(state), epsilon_schedule(cfg, step - 1), act_rng);
    StepResult out = env->step(action);
    const bool episode_over = out.terminal || out.truncated;
    buffer.add(Transition{state, action, out.reward, out.state, out.terminal, out.truncated});
    state = episode_over ? env->reset() : std::move(out.state);

    if (buffer.size() >= cfg.burn_in) {
      for (std::size_t u = 0; u < cfg.updates_per_step; ++u) {
        const std::vector<Transition> batch = buffer.sample(cfg.batch_size);
        const LossAndGrad lg = variant == Variant::kValueSpacePro
                                   ? value_space_prox_grad(online, target, batch, cfg.gamma, cfg.c_tilde)
                                   : td_loss_and_grad(online, target, batch, cfg.gamma);
        const double alpha = cfg.anneal_alpha_final
                                 ? anneal_alpha(cfg.alpha, *cfg.anneal_alpha_final,
                                                num_updates % cfg.target_mode.period, cfg.target_mode.period)
                                 : cfg.alpha;
        const Vector direction = adam ? adam->direction(lg.grad) : lg.grad;
        Vector next = variant == Variant::kDqnPro
                          ? dqn_pro_step(online.params(), target.params(), direction, alpha, cfg.c_tilde)
                          : dqn_step(online.params(), direction, alpha);
        online.set_params(std::move(next));
        ++num_updates;

        const Vector& previous = target.params();
        Vector synced = sync_target(cfg.target_mode, previous, online.params(), num_updates);
        if (periodic && num_updates % cfg.target_mode.period == 0) {
          result.sync_distances.push_back((synced - previous).norm());
        }
        target.set_params(std::move(synced));
      }
    }

    if (step % cfg.eval_every == 0) {
      result.curve.push_back(
          summarise(step, evaluate_policy(online, *env, cfg.eval_episodes, cfg.epsilon_eval, cfg.gamma, eval_rng)));
    }
  }
  result.final_params = online.params();
  return result;
}

std::string curve_to_csv(const std::vector<CurvePoint>& curve) {
  std::ostringstream out;
  out << "step,eval_return_mean,eval_return_se\n";
  for (const CurvePoint& p : curve) {
    out << p.step << ',' << format_double(p.eval_return_mean) << ',' << format_double(p.eval_return_se) << '\n';
  }
  return out.str();
}

std::string sync_distances_to_csv(const std::vector<double>& distances) {
  std::ostringstream out;
  out << "sync_index,l2_distance\n";
  for (std::size_t i = 0; i < distances.size(); ++i) out << i << ',' << format_double(distances[i]) << '\n';
  return out.str();
}

}  // namespace proxrl::deep
