#include "proxrl/cli/cli.hpp"
#include "proxrl/util.hpp"
#include "svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace proxrl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw Error("failed writing " + path.string());
}

void prepare_out(const CommonOptions& common, const std::string& resolved_config) {
  std::error_code ec;
  fs::create_directories(common.out, ec);
  if (ec) throw Error("cannot create output directory " + common.out.string() + ": " + ec.message());
  write_file(common.out / "config.resolved.json", resolved_config);
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe r;
  if (xs.empty()) return r;
  const double m = static_cast<double>(xs.size());
  for (double x : xs) r.mean += x;
  r.mean /= m;
  if (xs.size() > 1) {
    double sq = 0.0;
    for (double x : xs) sq += (x - r.mean) * (x - r.mean);
    r.se = std::sqrt(sq / (m - 1.0)) / std::sqrt(m);
  }
  return r;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string json_real(double x) { return std::isfinite(x) ? json(x).dump() : "null"; }

}  // namespace

std::vector<SweepCell> cmd_pmpi_sweep(const PmpiSweepConfig& cfg) {
  validate(cfg);
  prepare_out(cfg.common, to_json(cfg));
  const std::vector<SweepCell> cells = pmpi_sweep(cfg.env.build(), cfg.sweep_spec());
  write_file(cfg.common.out / "sweep.csv", sweep_to_csv(cells));

  for (std::size_t n : cfg.ns) {
    for (double delta : cfg.deltas) {
      std::vector<double> xs, ys, err;
      for (const SweepCell& c : cells) {
        if (c.n == n && c.delta == delta) {
          xs.push_back(c.beta);
          ys.push_back(c.mean_gap);
          err.push_back(c.se_gap);
        }
      }
      SvgPlot plot("PMPI final gap, delta = " + format_double(delta) + ", n = " + std::to_string(n), "beta",
                   "mean ||v* - v^pi||_inf");
      plot.add_line(xs, ys, kPalette[0], "");
      plot.add_error_bars(xs, ys, err, kPalette[0]);
      write_file(cfg.common.out / ("gap_delta" + format_double(delta) + "_n" + std::to_string(n) + ".svg"),
                 plot.render());
    }
  }
  return cells;
}

VerifyReport cmd_verify(const VerifyConfig& cfg, const VerifyHooks& hooks) {
  validate(cfg);
  prepare_out(cfg.common, to_json(cfg));
  VerifyReport report = run_verify(cfg, hooks);
  write_file(cfg.common.out / "verify_report.json", verify_report_to_json(report));
  return report;
}

DqnTrainResult cmd_dqn_train(const DqnTrainConfig& cfg) {
  validate(cfg);
  prepare_out(cfg.common, to_json(cfg));
  const Gridworld gw = build_gridworld(cfg.grid, cfg.agent.gamma, cfg.common.seed);

  DqnTrainResult result;
  result.optimal_start_value = solve_optimal(gw.twin).v_star(static_cast<Eigen::Index>(gw.start_state));
  for (std::size_t i = 0; i < cfg.num_seeds; ++i) result.seeds.push_back(derive_seed({cfg.common.seed, i}));

  const std::size_t nv = cfg.variants.size(), ns = cfg.num_seeds;
  std::vector<deep::TrainResult> runs(nv * ns);
  parallel_for(runs.size(), cfg.common.jobs, [&](std::size_t job) {
    deep::AgentConfig agent = cfg.agent;
    agent.seed = result.seeds[job % ns];
    runs[job] = deep::train(gw.env, agent, cfg.variants[job / ns]);
  });

  fs::create_directories(cfg.common.out / "runs");
  SvgPlot plot("Evaluation return (mean +- SE over " + std::to_string(ns) + " seeds)", "environment step",
               "discounted return");
  json summary = {{"optimal_start_value", result.optimal_start_value},
                  {"seeds", result.seeds},
                  {"final_window", cfg.final_window}};
  json variants = json::object();

  for (std::size_t v = 0; v < nv; ++v) {
    VariantRuns vr;
    vr.variant = cfg.variants[v];
    const std::string name = deep::to_string(vr.variant);
    vr.runs.assign(runs.begin() + static_cast<std::ptrdiff_t>(v * ns), runs.begin() + static_cast<std::ptrdiff_t>((v + 1) * ns));

    for (std::size_t s = 0; s < ns; ++s) {
      const deep::TrainResult& r = vr.runs[s];
      const std::string stem = name + "_seed" + std::to_string(s);
      write_file(cfg.common.out / "runs" / (stem + "_curve.csv"), deep::curve_to_csv(r.curve));
      write_file(cfg.common.out / "runs" / (stem + "_sync.csv"), deep::sync_distances_to_csv(r.sync_distances));
      std::vector<double> tail;
      const std::size_t w = std::min(cfg.final_window, r.curve.size());
      for (std::size_t k = r.curve.size() - w; k < r.curve.size(); ++k) tail.push_back(r.curve[k].eval_return_mean);
      vr.final_returns.push_back(mean_se(tail).mean);
      vr.mean_sync.push_back(r.sync_distances.empty() ? std::nan("") : mean_se(r.sync_distances).mean);
    }
    vr.final_return = mean_se(vr.final_returns).mean;
    vr.sync_distance = mean_se(vr.mean_sync).mean;

    // Seed-aggregated curve: per checkpoint, mean and SE across seeds.
    std::vector<deep::CurvePoint> curve;
    std::vector<double> xs, lo, hi, mid;
    for (std::size_t k = 0; k < vr.runs.front().curve.size(); ++k) {
      std::vector<double> at;
      for (const auto& r : vr.runs) at.push_back(r.curve[k].eval_return_mean);
      const MeanSe m = mean_se(at);
      curve.push_back({vr.runs.front().curve[k].step, m.mean, m.se});
      xs.push_back(static_cast<double>(curve.back().step));
      mid.push_back(m.mean);
      lo.push_back(m.mean - m.se);
      hi.push_back(m.mean + m.se);
    }
    write_file(cfg.common.out / (name + "_curve.csv"), deep::curve_to_csv(curve));
    std::vector<double> sync_mean;
    for (std::size_t k = 0; k < vr.runs.front().sync_distances.size(); ++k) {
      std::vector<double> at;
      for (const auto& r : vr.runs) at.push_back(r.sync_distances.at(k));
      sync_mean.push_back(mean_se(at).mean);
    }
    write_file(cfg.common.out / (name + "_sync.csv"), deep::sync_distances_to_csv(sync_mean));

    const char* color = kPalette[v % std::size(kPalette)];
    plot.add_band(xs, lo, hi, color);
    plot.add_line(xs, mid, color, name);

    json per_seed_sync = json::array();
    for (double d : vr.mean_sync) per_seed_sync.push_back(std::isfinite(d) ? json(d) : json(nullptr));
    variants[name] = {{"final_return", vr.final_return},
                      {"final_returns", vr.final_returns},
                      {"mean_sync_distance", std::isfinite(vr.sync_distance) ? json(vr.sync_distance) : json(nullptr)},
                      {"mean_sync_distances", per_seed_sync}};
    result.variants.push_back(std::move(vr));
  }
  std::vector<double> xs{0.0, static_cast<double>(cfg.agent.total_steps)};
  plot.add_line(xs, {result.optimal_start_value, result.optimal_start_value}, "#777777", "optimal");
  write_file(cfg.common.out / "comparison.svg", plot.render());
  summary["variants"] = variants;
  write_file(cfg.common.out / "summary.json", summary.dump(2) + "\n");
  return result;
}

ContractionProbeResult cmd_contraction(const ContractionConfig& cfg) {
  validate(cfg);
  prepare_out(cfg.common, to_json(cfg));
  ContractionProbeResult total;
  for (std::size_t m = 0; m < cfg.num_mdps; ++m) {
    std::mt19937_64 rng(derive_seed({cfg.common.seed, m, 0}));
    const TabularMdp mdp = make_random_mdp(cfg.num_states, cfg.num_actions, cfg.gamma, rng);
    const ContractionProbeResult r = contraction_probe(mdp, cfg.c, cfg.trials, derive_seed({cfg.common.seed, m, 1}));
    total.max_ratio = std::max(total.max_ratio, r.max_ratio);
    total.max_ratio_sup = std::max(total.max_ratio_sup, r.max_ratio_sup);
    total.modulus_bound = r.modulus_bound;
    total.trials += r.trials;
  }
  std::ostringstream doc;
  doc << "{\n  \"max_ratio\": " << json_real(total.max_ratio) << ",\n  \"modulus_bound\": "
      << json_real(total.modulus_bound) << ",\n  \"trials\": " << total.trials
      << ",\n  \"max_ratio_sup\": " << json_real(total.max_ratio_sup) << "\n}\n";
  write_file(cfg.common.out / "contraction.json", doc.str());
  return total;
}

namespace {

std::string read_config(const std::string& path) {
  if (path.empty()) return "{}";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Overrides {
  std::string config;
  std::string out;
  unsigned jobs = 0;
  std::uint64_t seed = 0;
  bool has_jobs = false, has_seed = false;

  void apply(CommonOptions& c) const {
    if (!out.empty()) c.out = out;
    if (has_jobs) c.jobs = jobs;
    if (has_seed) c.seed = seed;
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const VerifyHooks& hooks) {
  CLI::App app{"Proximal Bellman operators, PMPI and DQN Pro experiments"};
  app.require_subcommand(1);
  Overrides ov;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", ov.config, "JSON config file");
    sub->add_option("--out", ov.out, "Output directory");
    sub->add_option("--jobs", ov.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", ov.seed, "Master seed");
  };
  CLI::App* sweep = app.add_subcommand("pmpi-sweep", "Beta/noise sweep of PMPI on FrozenLake (CSV + SVG)");
  CLI::App* verify = app.add_subcommand("verify", "Run every invariant suite; exit 1 on any violation");
  CLI::App* train = app.add_subcommand("dqn-train", "Train DQN variants on the toy gridworld");
  CLI::App* contraction = app.add_subcommand("contraction", "Probe the proximal optimality operator's modulus");
  for (CLI::App* sub : {sweep, verify, train, contraction}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  for (CLI::App* sub : app.get_subcommands()) {
    ov.has_jobs = sub->count("--jobs") > 0;
    ov.has_seed = sub->count("--seed") > 0;
  }

  try {
    const std::string text = read_config(ov.config);
    if (sweep->parsed()) {
      PmpiSweepConfig cfg = parse_pmpi_sweep_config(text);
      ov.apply(cfg.common);
      validate(cfg);
      const auto cells = cmd_pmpi_sweep(cfg);
      out << "wrote " << cells.size() << " sweep rows to " << (cfg.common.out / "sweep.csv").string() << "\n";
      return kExitOk;
    }
    if (verify->parsed()) {
      VerifyConfig cfg = parse_verify_config(text);
      ov.apply(cfg.common);
      validate(cfg);
      const VerifyReport report = cmd_verify(cfg, hooks);
      for (const SuiteResult& s : report.suites) {
        out << (s.passed ? "PASS " : "FAIL ") << s.name << " (" << s.checks << " checks, worst slack "
            << format_double(s.worst_slack) << ")";
        if (!s.detail.empty()) out << ": " << s.detail;
        out << "\n";
      }
      return report.passed() ? kExitOk : kExitVerificationFailed;
    }
    if (train->parsed()) {
      DqnTrainConfig cfg = parse_dqn_train_config(text);
      ov.apply(cfg.common);
      validate(cfg);
      const DqnTrainResult r = cmd_dqn_train(cfg);
      out << "v*(start) = " << format_double(r.optimal_start_value) << "\n";
      for (const VariantRuns& v : r.variants) {
        out << deep::to_string(v.variant) << ": final return " << format_double(v.final_return)
            << ", mean sync distance " << format_double(v.sync_distance) << "\n";
      }
      return kExitOk;
    }
    ContractionConfig cfg = parse_contraction_config(text);
    ov.apply(cfg.common);
    validate(cfg);
    const ContractionProbeResult r = cmd_contraction(cfg);
    out << "max_ratio " << format_double(r.max_ratio) << " <= modulus_bound " << format_double(r.modulus_bound)
        << " over " << r.trials << " trials\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}

}  // namespace proxrl::cli
