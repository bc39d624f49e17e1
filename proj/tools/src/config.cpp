#include "proxrl/cli/cli.hpp"

#include "proxrl/util.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <set>

namespace proxrl::cli {

using nlohmann::json;

namespace {

/// Reads keys out of one JSON object and remembers which ones were used, so
/// that leftovers can be reported as unknown.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const char* key) const { return obj_.contains(key); }
  bool is_null(const char* key) const { return obj_.contains(key) && obj_.at(key).is_null(); }
  void mark(const char* key) { seen_.insert(key); }

  template <class T>
  void get(const char* key, T& dst) {
    if (!obj_.contains(key)) return;
    seen_.insert(key);
    const json& v = obj_.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        dst = to_real(v);
      } else if constexpr (std::is_same_v<T, std::vector<double>>) {
        if (!v.is_array()) throw ConfigError("expected an array");
        dst.clear();
        for (const json& e : v) dst.push_back(to_real(e));
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("expected true or false");
        dst = v.get<bool>();
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_unsigned()) throw ConfigError("expected a non-negative integer");
        dst = v.get<T>();
      } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
        if (!v.is_array()) throw ConfigError("expected an array");
        dst.clear();
        for (const json& e : v) {
          if (!e.is_number_unsigned()) throw ConfigError("expected non-negative integers");
          dst.push_back(e.get<std::size_t>());
        }
      } else {
        dst = v.get<T>();
      }
    } catch (const ConfigError& e) {
      throw ConfigError(where(key) + ": " + e.what());
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  void get_cell(const char* key, Cell& dst) {
    if (!obj_.contains(key)) return;
    seen_.insert(key);
    dst = to_cell(obj_.at(key), where(key));
  }

  void get_cells(const char* key, std::vector<Cell>& dst) {
    if (!obj_.contains(key)) return;
    seen_.insert(key);
    const json& v = obj_.at(key);
    if (!v.is_array()) throw ConfigError(where(key) + ": expected an array of [row, col] pairs");
    dst.clear();
    for (const json& e : v) dst.push_back(to_cell(e, where(key)));
  }

  /// Nested object; call finish() on it before the parent's finish().
  Reader child(const char* key) {
    seen_.insert(key);
    return Reader(obj_.at(key), where(key));
  }

  void finish() const {
    for (const auto& item : obj_.items()) {
      if (!seen_.count(item.key())) throw ConfigError("unknown key '" + item.key() + "' in " + where());
    }
  }

 private:
  static double to_real(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string() && v.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw ConfigError("expected a number or \"inf\"");
  }

  static Cell to_cell(const json& v, const std::string& at) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
      throw ConfigError(at + ": expected a [row, col] pair");
    }
    return Cell{v[0].get<int>(), v[1].get<int>()};
  }

  std::string where() const { return path_.empty() ? "the config" : "'" + path_ + "'"; }
  std::string where(const char* key) const { return "'" + (path_.empty() ? key : path_ + "." + key) + "'"; }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

json parse_document(const std::string& text) {
  try {
    json doc = json::parse(text);
    if (!doc.is_object()) throw ConfigError("config document must be a JSON object");
    return doc;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

json real(double x) { return std::isinf(x) ? json(x > 0 ? "inf" : "-inf") : json(x); }

json reals(const std::vector<double>& xs) {
  json arr = json::array();
  for (double x : xs) arr.push_back(real(x));
  return arr;
}

json cell(Cell c) { return json::array({c.row, c.col}); }

void read_common(Reader& r, CommonOptions& c) {
  std::string out = c.out.string();
  r.get("out", out);
  c.out = out;
  r.get("jobs", c.jobs);
  r.get("seed", c.seed);
}

json common_json(const CommonOptions& c) { return {{"out", c.out.string()}, {"jobs", c.jobs}, {"seed", c.seed}}; }

void read_lake(Reader r, FrozenLakeSettings& env) {
  r.get("map", env.map);
  r.get("slippery", env.slippery);
  r.get("gamma", env.gamma);
  r.finish();
}

json lake_json(const FrozenLakeSettings& env) {
  return {{"map", env.map}, {"slippery", env.slippery}, {"gamma", real(env.gamma)}};
}

void check(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void check_lake(const FrozenLakeSettings& env) {
  try {
    (void)env.build();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("env: ") + e.what());
  }
}

void check_common(const CommonOptions& c) {
  check(!c.out.empty(), "out must be a non-empty path");
  check(c.jobs >= 1, "jobs must be at least 1");
}

}  // namespace

SweepSpec PmpiSweepConfig::sweep_spec() const {
  SweepSpec spec;
  spec.betas = betas;
  spec.deltas = deltas;
  spec.ns = ns;
  spec.iterations = iterations;
  spec.jobs = common.jobs;
  for (std::size_t i = 0; i < num_seeds; ++i) spec.seeds.push_back(derive_seed({common.seed, i}));
  return spec;
}

PmpiSweepConfig parse_pmpi_sweep_config(const std::string& text) {
  const json doc = parse_document(text);
  PmpiSweepConfig cfg;
  Reader r(doc, "");
  read_common(r, cfg.common);
  if (r.has("env")) read_lake(r.child("env"), cfg.env);
  r.get("betas", cfg.betas);
  r.get("deltas", cfg.deltas);
  r.get("ns", cfg.ns);
  r.get("num_seeds", cfg.num_seeds);
  r.get("iterations", cfg.iterations);
  r.finish();
  return cfg;
}

std::string to_json(const PmpiSweepConfig& cfg) {
  json doc = common_json(cfg.common);
  doc["env"] = lake_json(cfg.env);
  doc["betas"] = reals(cfg.betas);
  doc["deltas"] = reals(cfg.deltas);
  doc["ns"] = cfg.ns;
  doc["num_seeds"] = cfg.num_seeds;
  doc["iterations"] = cfg.iterations;
  return doc.dump(2) + "\n";
}

void validate(const PmpiSweepConfig& cfg) {
  check_common(cfg.common);
  check_lake(cfg.env);
  check(!cfg.betas.empty() && !cfg.deltas.empty() && !cfg.ns.empty(), "betas, deltas and ns must be non-empty");
  for (double b : cfg.betas) check(b >= 0.0 && b <= 1.0, "betas must lie in [0, 1]");
  for (double d : cfg.deltas) check(d >= 0.0 && std::isfinite(d), "deltas must be finite and non-negative");
  for (std::size_t n : cfg.ns) check(n >= 1, "ns must be positive");
  check(cfg.num_seeds >= 1, "num_seeds must be at least 1");
  check(cfg.iterations >= 1, "iterations must be at least 1");
}

VerifyConfig parse_verify_config(const std::string& text) {
  const json doc = parse_document(text);
  VerifyConfig cfg;
  Reader r(doc, "");
  read_common(r, cfg.common);
  r.get("tolerance", cfg.tolerance);
  r.get("oracle_instances", cfg.oracle_instances);
  r.get("gradient_instances", cfg.gradient_instances);
  r.get("step_instances", cfg.step_instances);
  if (r.has("closed_form")) {
    Reader c = r.child("closed_form");
    c.get("instances", cfg.closed_form.instances);
    c.get("max_states", cfg.closed_form.max_states);
    c.finish();
  }
  if (r.has("fixed_point")) {
    Reader c = r.child("fixed_point");
    c.get("num_mdps", cfg.fixed_point.num_mdps);
    c.get("starts", cfg.fixed_point.starts);
    c.get("num_states", cfg.fixed_point.num_states);
    c.get("num_actions", cfg.fixed_point.num_actions);
    c.get("gamma", cfg.fixed_point.gamma);
    c.get("c", cfg.fixed_point.c);
    c.finish();
  }
  if (r.has("contraction")) {
    Reader c = r.child("contraction");
    c.get("num_mdps", cfg.contraction.num_mdps);
    c.get("num_states", cfg.contraction.num_states);
    c.get("num_actions", cfg.contraction.num_actions);
    c.get("gamma", cfg.contraction.gamma);
    c.get("c", cfg.contraction.c);
    c.get("trials", cfg.contraction.trials);
    c.finish();
  }
  if (r.has("recursions")) {
    Reader c = r.child("recursions");
    if (c.has("env")) read_lake(c.child("env"), cfg.recursions.env);
    c.get("betas", cfg.recursions.betas);
    c.get("deltas", cfg.recursions.deltas);
    c.get("ns", cfg.recursions.ns);
    c.get("num_seeds", cfg.recursions.num_seeds);
    c.get("iterations", cfg.recursions.iterations);
    c.get("flip_prob", cfg.recursions.flip_prob);
    c.finish();
  }
  r.finish();
  return cfg;
}

std::string to_json(const VerifyConfig& cfg) {
  json doc = common_json(cfg.common);
  doc["tolerance"] = real(cfg.tolerance);
  doc["oracle_instances"] = cfg.oracle_instances;
  doc["gradient_instances"] = cfg.gradient_instances;
  doc["step_instances"] = cfg.step_instances;
  doc["closed_form"] = {{"instances", cfg.closed_form.instances}, {"max_states", cfg.closed_form.max_states}};
  const auto& fp = cfg.fixed_point;
  doc["fixed_point"] = {{"num_mdps", fp.num_mdps},       {"starts", fp.starts},        {"num_states", fp.num_states},
                        {"num_actions", fp.num_actions}, {"gamma", real(fp.gamma)}, {"c", real(fp.c)}};
  const auto& ct = cfg.contraction;
  doc["contraction"] = {{"num_mdps", ct.num_mdps},       {"num_states", ct.num_states}, {"num_actions", ct.num_actions},
                        {"gamma", real(ct.gamma)}, {"c", real(ct.c)},             {"trials", ct.trials}};
  const auto& rc = cfg.recursions;
  doc["recursions"] = {{"env", lake_json(rc.env)},   {"betas", reals(rc.betas)},       {"deltas", reals(rc.deltas)},
                       {"ns", rc.ns},                {"num_seeds", rc.num_seeds},      {"iterations", rc.iterations},
                       {"flip_prob", real(rc.flip_prob)}};
  return doc.dump(2) + "\n";
}

void validate(const VerifyConfig& cfg) {
  check_common(cfg.common);
  check(cfg.tolerance >= 0.0, "tolerance must be non-negative");
  check(cfg.closed_form.max_states >= 1, "closed_form.max_states must be positive");
  const auto& fp = cfg.fixed_point;
  check(fp.num_states >= 1 && fp.num_actions >= 1, "fixed_point sizes must be positive");
  check(fp.gamma >= 0.0 && fp.gamma < 1.0, "fixed_point.gamma must lie in [0, 1)");
  check(fp.c > 0.0, "fixed_point.c must be positive");
  const auto& ct = cfg.contraction;
  check(ct.num_states >= 1 && ct.num_actions >= 1, "contraction sizes must be positive");
  check(ct.gamma >= 0.0 && ct.gamma < 1.0, "contraction.gamma must lie in [0, 1)");
  check(ct.c > 2.0 / (1.0 - ct.gamma) && std::isfinite(ct.c), "contraction.c must exceed 2 / (1 - gamma)");
  const auto& rc = cfg.recursions;
  check_lake(rc.env);
  for (double b : rc.betas) check(b >= 0.0 && b <= 1.0, "recursions.betas must lie in [0, 1]");
  for (double d : rc.deltas) check(d >= 0.0 && std::isfinite(d), "recursions.deltas must be non-negative");
  for (std::size_t n : rc.ns) check(n >= 1, "recursions.ns must be positive");
  check(rc.iterations >= 1, "recursions.iterations must be positive");
  check(rc.flip_prob >= 0.0 && rc.flip_prob <= 1.0, "recursions.flip_prob must lie in [0, 1]");
}

DqnTrainConfig parse_dqn_train_config(const std::string& text) {
  const json doc = parse_document(text);
  DqnTrainConfig cfg;
  Reader r(doc, "");
  read_common(r, cfg.common);
  r.get("num_seeds", cfg.num_seeds);
  r.get("final_window", cfg.final_window);
  if (r.has("variants")) {
    std::vector<std::string> names;
    r.get("variants", names);
    cfg.variants.clear();
    for (const std::string& n : names) {
      try {
        cfg.variants.push_back(deep::variant_from_string(n));
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("'variants': ") + e.what());
      }
    }
  }
  if (r.has("grid")) {
    Reader g = r.child("grid");
    g.get("width", cfg.grid.width);
    g.get("height", cfg.grid.height);
    g.get_cell("start", cfg.grid.start);
    g.get_cell("goal", cfg.grid.goal);
    g.get_cells("walls", cfg.grid.walls);
    g.get("step_reward", cfg.grid.step_reward);
    g.get("goal_reward", cfg.grid.goal_reward);
    g.get("max_steps", cfg.grid.max_steps);
    g.finish();
  }
  if (r.has("agent")) {
    Reader a = r.child("agent");
    deep::AgentConfig& ag = cfg.agent;
    a.get("hidden", ag.hidden);
    a.get("alpha", ag.alpha);
    a.get("c_tilde", ag.c_tilde);
    if (a.has("target")) {
      Reader t = a.child("target");
      std::string mode = "periodic";
      t.get("mode", mode);
      if (mode == "periodic") {
        std::size_t period = ag.target_mode.kind == deep::TargetMode::Kind::kPeriodic ? ag.target_mode.period : 200;
        t.get("period", period);
        ag.target_mode = deep::TargetMode::periodic(period);
      } else if (mode == "polyak") {
        double tau = 0.005;
        t.get("tau", tau);
        ag.target_mode = deep::TargetMode::polyak(tau);
      } else {
        throw ConfigError("'agent.target.mode' must be \"periodic\" or \"polyak\"");
      }
      t.finish();
    }
    if (a.has("anneal_alpha_final")) {
      if (a.is_null("anneal_alpha_final")) {
        a.mark("anneal_alpha_final");
        ag.anneal_alpha_final.reset();
      } else {
        double v = 0.0;
        a.get("anneal_alpha_final", v);
        ag.anneal_alpha_final = v;
      }
    }
    a.get("epsilon_start", ag.epsilon_start);
    a.get("epsilon_train", ag.epsilon_train);
    a.get("epsilon_decay_steps", ag.epsilon_decay_steps);
    a.get("epsilon_eval", ag.epsilon_eval);
    a.get("batch_size", ag.batch_size);
    a.get("updates_per_step", ag.updates_per_step);
    a.get("buffer_capacity", ag.buffer_capacity);
    a.get("burn_in", ag.burn_in);
    a.get("gamma", ag.gamma);
    a.get("total_steps", ag.total_steps);
    a.get("eval_every", ag.eval_every);
    a.get("eval_episodes", ag.eval_episodes);
    a.get("adaptive", ag.adaptive);
    a.get("adam_beta1", ag.adam_beta1);
    a.get("adam_beta2", ag.adam_beta2);
    a.get("adam_epsilon", ag.adam_epsilon);
    a.finish();
  }
  r.finish();
  return cfg;
}

std::string to_json(const DqnTrainConfig& cfg) {
  json doc = common_json(cfg.common);
  doc["num_seeds"] = cfg.num_seeds;
  doc["final_window"] = cfg.final_window;
  json variants = json::array();
  for (deep::Variant v : cfg.variants) variants.push_back(deep::to_string(v));
  doc["variants"] = variants;
  json walls = json::array();
  for (Cell w : cfg.grid.walls) walls.push_back(cell(w));
  doc["grid"] = {{"width", cfg.grid.width},
                 {"height", cfg.grid.height},
                 {"start", cell(cfg.grid.start)},
                 {"goal", cell(cfg.grid.goal)},
                 {"walls", walls},
                 {"step_reward", real(cfg.grid.step_reward)},
                 {"goal_reward", real(cfg.grid.goal_reward)},
                 {"max_steps", cfg.grid.max_steps}};
  const deep::AgentConfig& a = cfg.agent;
  json target = a.target_mode.kind == deep::TargetMode::Kind::kPeriodic
                    ? json{{"mode", "periodic"}, {"period", a.target_mode.period}}
                    : json{{"mode", "polyak"}, {"tau", real(a.target_mode.tau)}};
  doc["agent"] = {{"hidden", a.hidden},
                  {"alpha", real(a.alpha)},
                  {"c_tilde", real(a.c_tilde)},
                  {"target", target},
                  {"anneal_alpha_final", a.anneal_alpha_final ? real(*a.anneal_alpha_final) : json(nullptr)},
                  {"epsilon_start", real(a.epsilon_start)},
                  {"epsilon_train", real(a.epsilon_train)},
                  {"epsilon_decay_steps", a.epsilon_decay_steps},
                  {"epsilon_eval", real(a.epsilon_eval)},
                  {"batch_size", a.batch_size},
                  {"updates_per_step", a.updates_per_step},
                  {"buffer_capacity", a.buffer_capacity},
                  {"burn_in", a.burn_in},
                  {"gamma", real(a.gamma)},
                  {"total_steps", a.total_steps},
                  {"eval_every", a.eval_every},
                  {"eval_episodes", a.eval_episodes},
                  {"adaptive", a.adaptive},
                  {"adam_beta1", real(a.adam_beta1)},
                  {"adam_beta2", real(a.adam_beta2)},
                  {"adam_epsilon", real(a.adam_epsilon)}};
  return doc.dump(2) + "\n";
}

void validate(const DqnTrainConfig& cfg) {
  check_common(cfg.common);
  check(!cfg.variants.empty(), "variants must be non-empty");
  check(cfg.num_seeds >= 1, "num_seeds must be at least 1");
  check(cfg.final_window >= 1, "final_window must be at least 1");
  try {
    cfg.grid.validate();
    cfg.agent.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  check(cfg.agent.total_steps >= cfg.agent.eval_every * cfg.final_window,
        "total_steps must cover final_window evaluation checkpoints");
}

ContractionConfig parse_contraction_config(const std::string& text) {
  const json doc = parse_document(text);
  ContractionConfig cfg;
  Reader r(doc, "");
  read_common(r, cfg.common);
  r.get("gamma", cfg.gamma);
  r.get("c", cfg.c);
  r.get("num_states", cfg.num_states);
  r.get("num_actions", cfg.num_actions);
  r.get("num_mdps", cfg.num_mdps);
  r.get("trials", cfg.trials);
  r.finish();
  return cfg;
}

std::string to_json(const ContractionConfig& cfg) {
  json doc = common_json(cfg.common);
  doc["gamma"] = real(cfg.gamma);
  doc["c"] = real(cfg.c);
  doc["num_states"] = cfg.num_states;
  doc["num_actions"] = cfg.num_actions;
  doc["num_mdps"] = cfg.num_mdps;
  doc["trials"] = cfg.trials;
  return doc.dump(2) + "\n";
}

void validate(const ContractionConfig& cfg) {
  check_common(cfg.common);
  check(cfg.gamma >= 0.0 && cfg.gamma < 1.0, "gamma must lie in [0, 1)");
  check(cfg.num_states >= 1 && cfg.num_actions >= 1, "num_states and num_actions must be positive");
  check(cfg.num_mdps >= 1 && cfg.trials >= 1, "num_mdps and trials must be positive");
  const double threshold = 2.0 / (1.0 - cfg.gamma);
  check(cfg.c > threshold && std::isfinite(cfg.c),
        "c = " + format_double(cfg.c) + " violates the contraction precondition c > 2 / (1 - gamma) = " +
            format_double(threshold));
}

}  // namespace proxrl::cli
