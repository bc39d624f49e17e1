#pragma once

#include "proxrl/bounds.hpp"
#include "proxrl/deep/agent.hpp"
#include "proxrl/envs.hpp"
#include "proxrl/errors.hpp"
#include "proxrl/pmpi.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace proxrl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;

/// Malformed document, unknown key, wrong type or failed precondition.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct CommonOptions {
  std::filesystem::path out = "out";
  unsigned jobs = 1;
  std::uint64_t seed = 0;
};

struct FrozenLakeSettings {
  std::vector<std::string> map = standard_frozen_lake_8x8();
  bool slippery = true;
  double gamma = 0.99;

  TabularMdp build() const { return frozen_lake(map, slippery, gamma); }
};

struct PmpiSweepConfig {
  CommonOptions common;
  FrozenLakeSettings env;
  std::vector<double> betas = SweepSpec{}.betas;
  std::vector<double> deltas = SweepSpec{}.deltas;
  std::vector<std::size_t> ns = SweepSpec{}.ns;
  std::size_t num_seeds = 30;
  std::size_t iterations = 100;

  /// Run seeds are derive_seed({common.seed, i}) for i < num_seeds.
  SweepSpec sweep_spec() const;
};

struct VerifyConfig {
  CommonOptions common;
  double tolerance = 1e-9;
  struct ClosedForm {
    std::size_t instances = 100;
    std::size_t max_states = 20;
  } closed_form;
  struct FixedPoint {
    std::size_t num_mdps = 20;
    std::size_t starts = 3;
    std::size_t num_states = 10;
    std::size_t num_actions = 3;
    double gamma = 0.9;
    double c = 10.0;
  } fixed_point;
  struct Contraction {
    std::size_t num_mdps = 10;
    std::size_t num_states = 10;
    std::size_t num_actions = 3;
    double gamma = 0.9;
    double c = 30.0;
    std::size_t trials = 1000;
  } contraction;
  struct Recursions {
    FrozenLakeSettings env;
    std::vector<double> betas{0.0, 0.3, 0.6};
    std::vector<double> deltas{0.0, 0.3};
    std::vector<std::size_t> ns{1, 3};
    std::size_t num_seeds = 30;
    std::size_t iterations = 100;
    double flip_prob = 0.0;
  } recursions;
  std::size_t oracle_instances = 50;
  std::size_t gradient_instances = 20;
  std::size_t step_instances = 100;
};

struct DqnTrainConfig {
  CommonOptions common;
  GridSpec grid;
  deep::AgentConfig agent;
  std::vector<deep::Variant> variants{deep::Variant::kDqn, deep::Variant::kDqnPro};
  std::size_t num_seeds = 5;
  /// Checkpoints averaged for the final-performance summary.
  std::size_t final_window = 5;
};

struct ContractionConfig {
  CommonOptions common;
  double gamma = 0.9;
  double c = 30.0;
  std::size_t num_states = 10;
  std::size_t num_actions = 3;
  std::size_t num_mdps = 1;
  std::size_t trials = 1000;
};

/// Parsers reject unknown keys and wrong types with ConfigError; missing keys
/// keep their defaults.
PmpiSweepConfig parse_pmpi_sweep_config(const std::string& json_text);
VerifyConfig parse_verify_config(const std::string& json_text);
DqnTrainConfig parse_dqn_train_config(const std::string& json_text);
ContractionConfig parse_contraction_config(const std::string& json_text);

/// Fully resolved configs, every field spelled out.
std::string to_json(const PmpiSweepConfig& cfg);
std::string to_json(const VerifyConfig& cfg);
std::string to_json(const DqnTrainConfig& cfg);
std::string to_json(const ContractionConfig& cfg);

/// Throws ConfigError on values the commands cannot run with.
void validate(const PmpiSweepConfig& cfg);
void validate(const VerifyConfig& cfg);
void validate(const DqnTrainConfig& cfg);
void validate(const ContractionConfig& cfg);

using ProStepFn = std::function<Vector(const Vector& w, const Vector& theta, const Vector& grad, double alpha,
                                       double c_tilde)>;

/// Replaceable pieces for exercising the verifier itself.
struct VerifyHooks {
  ProStepFn dqn_pro_step;  // defaults to deep::dqn_pro_step
};

struct SuiteResult {
  std::string name;
  bool passed = true;
  std::size_t checks = 0;
  /// Largest (observed - allowed) over the suite's checks; <= 0 when passing.
  double worst_slack = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<SuiteResult> suites;
  bool passed() const;
};

VerifyReport run_verify(const VerifyConfig& cfg, const VerifyHooks& hooks = {});
std::string verify_report_to_json(const VerifyReport& report);

struct VariantRuns {
  deep::Variant variant;
  std::vector<deep::TrainResult> runs;  // one per seed, same seed order for every variant
  std::vector<double> final_returns;    // per seed: mean of the last final_window checkpoints
  std::vector<double> mean_sync;        // per seed: mean periodic sync distance
  double final_return = 0.0;            // mean over seeds
  double sync_distance = 0.0;           // mean over seeds
};

struct DqnTrainResult {
  double optimal_start_value = 0.0;  // v*(start) of the gridworld's tabular twin
  std::vector<std::uint64_t> seeds;
  std::vector<VariantRuns> variants;
};

/// Each command writes its artifacts (and config.json) under cfg.common.out.
std::vector<SweepCell> cmd_pmpi_sweep(const PmpiSweepConfig& cfg);
VerifyReport cmd_verify(const VerifyConfig& cfg, const VerifyHooks& hooks = {});
DqnTrainResult cmd_dqn_train(const DqnTrainConfig& cfg);
ContractionProbeResult cmd_contraction(const ContractionConfig& cfg);

/// Full command-line entry point. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const VerifyHooks& hooks = {});

}  // namespace proxrl::cli
