#include "proxrl/cli/cli.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace proxrl;
using namespace proxrl::cli;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / ("proxrl_cli_" + std::string(info->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = root_ / name;
    std::ofstream(p) << text;
    return p;
  }

  int invoke(std::vector<std::string> args, const VerifyHooks& hooks = {}) {
    args.insert(args.begin(), "proxrl");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return run(static_cast<int>(argv.size()), argv.data(), out_, err_, hooks);
  }

  fs::path root_;
  std::ostringstream out_, err_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// Every regular file under dir, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return files;
}

const char* kSmallSweep = R"({"betas": [0, 0.5], "deltas": [0, 0.3], "ns": [1], "num_seeds": 3, "iterations": 20})";

const char* kSmallVerify = R"({
  "oracle_instances": 5, "gradient_instances": 3, "step_instances": 10,
  "closed_form": {"instances": 6, "max_states": 6},
  "fixed_point": {"num_mdps": 2, "starts": 2},
  "contraction": {"num_mdps": 2, "trials": 50},
  "recursions": {"betas": [0.3], "deltas": [0.3], "ns": [1], "num_seeds": 2, "iterations": 30}
})";

const char* kSmallTrain = R"({
  "num_seeds": 2, "final_window": 2,
  "grid": {"width": 3, "height": 3, "start": [0, 0], "goal": [2, 2], "walls": [], "max_steps": 20},
  "agent": {"hidden": [8], "total_steps": 400, "burn_in": 50, "batch_size": 8, "eval_every": 200,
            "eval_episodes": 2, "epsilon_decay_steps": 200, "target": {"mode": "periodic", "period": 50}}
})";

}  // namespace

TEST_F(CliTest, HelpExitsZero) {
  EXPECT_EQ(invoke({"--help"}), kExitOk);
  EXPECT_NE(out_.str().find("pmpi-sweep"), std::string::npos);
}

TEST_F(CliTest, MissingOrUnknownSubcommandIsConfigError) {
  EXPECT_EQ(invoke({}), kExitConfigError);
  EXPECT_EQ(invoke({"bogus"}), kExitConfigError);
  EXPECT_EQ(invoke({"verify", "--jobs", "0"}), kExitConfigError);
}

TEST_F(CliTest, UnknownConfigKeyIsConfigError) {
  const auto cfg = write_config("bad.json", R"({"betas": [0.1], "colour": 3})");
  EXPECT_EQ(invoke({"pmpi-sweep", "--config", cfg.string(), "--out", (root_ / "o").string()}), kExitConfigError);
  EXPECT_NE(err_.str().find("colour"), std::string::npos);
  const auto nested = write_config("nested.json", R"({"agent": {"alpha": 0.1, "lr": 2}})");
  EXPECT_EQ(invoke({"dqn-train", "--config", nested.string(), "--out", (root_ / "o").string()}), kExitConfigError);
}

TEST_F(CliTest, MalformedAndMissingConfigs) {
  const auto cfg = write_config("broken.json", "{\"betas\": [0.1,");
  EXPECT_EQ(invoke({"pmpi-sweep", "--config", cfg.string()}), kExitConfigError);
  EXPECT_EQ(invoke({"pmpi-sweep", "--config", (root_ / "absent.json").string()}), kExitConfigError);
  const auto wrong_type = write_config("type.json", R"({"iterations": "many"})");
  EXPECT_EQ(invoke({"pmpi-sweep", "--config", wrong_type.string()}), kExitConfigError);
  const auto invalid = write_config("beta.json", R"({"betas": [1.5]})");
  EXPECT_EQ(invoke({"pmpi-sweep", "--config", invalid.string()}), kExitConfigError);
}

TEST_F(CliTest, ContractionPreconditionViolationFails) {
  const auto cfg = write_config("c10.json", R"({"gamma": 0.9, "c": 10})");
  const fs::path out = root_ / "c10";
  EXPECT_EQ(invoke({"contraction", "--config", cfg.string(), "--out", out.string()}), kExitConfigError);
  EXPECT_NE(err_.str().find("precondition"), std::string::npos);
  EXPECT_FALSE(fs::exists(out / "contraction.json"));
}

TEST_F(CliTest, ContractionReportsModulus) {
  const auto cfg = write_config("c30.json", R"({"gamma": 0.9, "c": 30, "trials": 200})");
  const fs::path out = root_ / "c30";
  ASSERT_EQ(invoke({"contraction", "--config", cfg.string(), "--out", out.string()}), kExitOk) << err_.str();
  const json doc = json::parse(slurp(out / "contraction.json"));
  EXPECT_NEAR(doc["modulus_bound"].get<double>(), 28.0 / 29.0, 1e-15);
  EXPECT_EQ(doc["trials"].get<std::size_t>(), 200u);
  EXPECT_LE(doc["max_ratio"].get<double>(), doc["modulus_bound"].get<double>() + 1e-9);
  EXPECT_GT(doc["max_ratio"].get<double>(), 0.0);
  EXPECT_TRUE(doc.contains("max_ratio_sup"));
}

TEST_F(CliTest, SweepWritesRowsColumnsAndPlots) {
  const auto cfg = write_config("sweep.json", kSmallSweep);
  const fs::path out = root_ / "sweep";
  ASSERT_EQ(invoke({"pmpi-sweep", "--config", cfg.string(), "--out", out.string()}), kExitOk) << err_.str();
  const auto rows = lines(slurp(out / "sweep.csv"));
  ASSERT_EQ(rows.size(), 1u + 2 * 2 * 1);
  EXPECT_EQ(rows[0], "beta,delta,n,seed_count,mean_gap,se_gap");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(std::count(rows[i].begin(), rows[i].end(), ','), 5);
  }
  EXPECT_TRUE(fs::exists(out / "gap_delta0_n1.svg"));
  EXPECT_TRUE(fs::exists(out / "gap_delta0.3_n1.svg"));
  EXPECT_EQ(slurp(out / "gap_delta0_n1.svg").rfind("<svg", 0), 0u);
  EXPECT_TRUE(fs::exists(out / "config.resolved.json"));
}

TEST_F(CliTest, SweepIsByteIdenticalAcrossRunsAndJobCounts) {
  const auto cfg = write_config("sweep.json", kSmallSweep);
  ASSERT_EQ(invoke({"pmpi-sweep", "--config", cfg.string(), "--out", (root_ / "a").string()}), kExitOk);
  ASSERT_EQ(invoke({"pmpi-sweep", "--config", cfg.string(), "--out", (root_ / "b").string()}), kExitOk);
  ASSERT_EQ(invoke({"pmpi-sweep", "--config", cfg.string(), "--out", (root_ / "c").string(), "--jobs", "3"}), kExitOk);
  // The resolved config records the output directory, so it is the one file allowed to differ.
  auto a = snapshot(root_ / "a");
  auto b = snapshot(root_ / "b");
  auto c = snapshot(root_ / "c");
  for (auto* files : {&a, &b, &c}) files->erase("config.resolved.json");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST_F(CliTest, FlagsOverrideFileAndResolvedConfigIsEchoed) {
  const auto cfg = write_config("sweep.json",
                                R"({"out": "ignored", "seed": 1, "jobs": 1, "betas": [0.2], "deltas": [0.1],
                                    "ns": [3], "num_seeds": 2, "iterations": 5})");
  const fs::path out = root_ / "flags";
  ASSERT_EQ(invoke({"pmpi-sweep", "--config", cfg.string(), "--out", out.string(), "--seed", "99", "--jobs", "2"}),
            kExitOk);
  const json resolved = json::parse(slurp(out / "config.resolved.json"));
  EXPECT_EQ(resolved["seed"].get<std::uint64_t>(), 99u);
  EXPECT_EQ(resolved["jobs"].get<unsigned>(), 2u);
  EXPECT_EQ(resolved["out"].get<std::string>(), out.string());
  EXPECT_EQ(resolved["betas"], json::parse("[0.2]"));
  EXPECT_EQ(resolved["ns"], json::parse("[3]"));
  EXPECT_EQ(resolved["iterations"].get<std::size_t>(), 5u);
  EXPECT_TRUE(resolved.contains("env"));

  // A different master seed changes the sampled noise.
  ASSERT_EQ(invoke({"pmpi-sweep", "--config", cfg.string(), "--out", (root_ / "other").string()}), kExitOk);
  EXPECT_NE(slurp(out / "sweep.csv"), slurp(root_ / "other" / "sweep.csv"));
}

TEST_F(CliTest, VerifyPassesAndReportMatchesSchema) {
  const auto cfg = write_config("verify.json", kSmallVerify);
  const fs::path out = root_ / "verify";
  ASSERT_EQ(invoke({"verify", "--config", cfg.string(), "--out", out.string()}), kExitOk) << out_.str();
  const json doc = json::parse(slurp(out / "verify_report.json"));
  ASSERT_TRUE(doc.is_object());
  EXPECT_EQ(doc.size(), 2u);
  EXPECT_TRUE(doc["passed"].get<bool>());
  const std::vector<std::string> expected{"oracle_equivalences", "proximal_closed_forms", "theorem1_fixed_point",
                                          "theorem1_contraction", "theorem2_recursions", "gradients",
                                          "step_algebra"};
  ASSERT_EQ(doc["suites"].size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const json& s = doc["suites"][i];
    EXPECT_EQ(s.size(), 5u);
    EXPECT_EQ(s["name"].get<std::string>(), expected[i]);
    EXPECT_TRUE(s["passed"].is_boolean());
    EXPECT_TRUE(s["checks"].is_number_unsigned());
    EXPECT_GT(s["checks"].get<std::size_t>(), 0u);
    EXPECT_TRUE(s["worst_slack"].is_number());
    EXPECT_LE(s["worst_slack"].get<double>(), 0.0);
    EXPECT_TRUE(s["detail"].is_string());
  }
  EXPECT_NE(out_.str().find("PASS step_algebra"), std::string::npos);
}

TEST_F(CliTest, VerifyCatchesSignErrorInProStep) {
  VerifyHooks mutated;
  mutated.dqn_pro_step = [](const Vector& w, const Vector& theta, const Vector& grad, double alpha,
                            double c_tilde) -> Vector {
    return deep::dqn_pro_step(w, theta, Vector(-grad), alpha, c_tilde);
  };
  const auto cfg = write_config("verify.json", kSmallVerify);
  const fs::path out = root_ / "mutant";
  EXPECT_EQ(invoke({"verify", "--config", cfg.string(), "--out", out.string()}, mutated), kExitVerificationFailed);
  const json doc = json::parse(slurp(out / "verify_report.json"));
  EXPECT_FALSE(doc["passed"].get<bool>());
  for (const json& s : doc["suites"]) {
    EXPECT_EQ(s["passed"].get<bool>(), s["name"] != "step_algebra") << s["name"];
  }
}

TEST_F(CliTest, VerifyIsDeterministic) {
  const auto cfg = write_config("verify.json", kSmallVerify);
  ASSERT_EQ(invoke({"verify", "--config", cfg.string(), "--out", (root_ / "a").string()}), kExitOk);
  ASSERT_EQ(invoke({"verify", "--config", cfg.string(), "--out", (root_ / "b").string(), "--jobs", "2"}), kExitOk);
  EXPECT_EQ(slurp(root_ / "a" / "verify_report.json"), slurp(root_ / "b" / "verify_report.json"));
}

TEST_F(CliTest, DqnTrainOutputsAndDeterminism) {
  const auto cfg = write_config("train.json", kSmallTrain);
  ASSERT_EQ(invoke({"dqn-train", "--config", cfg.string(), "--out", (root_ / "a").string()}), kExitOk) << err_.str();
  ASSERT_EQ(invoke({"dqn-train", "--config", cfg.string(), "--out", (root_ / "b").string(), "--jobs", "2"}),
            kExitOk);
  const auto a = snapshot(root_ / "a");
  const auto b = snapshot(root_ / "b");
  for (const auto& [name, content] : a) {
    if (name == "config.resolved.json") continue;
    ASSERT_TRUE(b.count(name)) << name;
    EXPECT_EQ(content, b.at(name)) << name;
  }
  for (const char* variant : {"dqn", "dqn_pro"}) {
    const auto curve = lines(a.at(std::string(variant) + "_curve.csv"));
    ASSERT_EQ(curve.size(), 3u);
    EXPECT_EQ(curve[0], "step,eval_return_mean,eval_return_se");
    const auto sync = lines(a.at(std::string(variant) + "_sync.csv"));
    EXPECT_EQ(sync[0], "sync_index,l2_distance");
    EXPECT_EQ(sync.size(), 1u + (400 - 50) / 50);
    EXPECT_TRUE(a.count("runs/" + std::string(variant) + "_seed1_curve.csv"));
    EXPECT_TRUE(a.count("runs/" + std::string(variant) + "_seed1_sync.csv"));
  }
  const json summary = json::parse(a.at("summary.json"));
  EXPECT_NEAR(summary["optimal_start_value"].get<double>(), -0.01 * (1 + 0.99 + 0.99 * 0.99) + std::pow(0.99, 3),
              1e-12);
  EXPECT_EQ(summary["seeds"].size(), 2u);
  EXPECT_TRUE(summary["variants"]["dqn_pro"]["final_return"].is_number());
  const std::string svg = a.at("comparison.svg");
  EXPECT_NE(svg.find("dqn_pro"), std::string::npos);
  EXPECT_NE(svg.find("<polygon"), std::string::npos);
}

TEST_F(CliTest, OutputsStayUnderOutDirectory) {
  const auto cfg = write_config("c30.json", R"({"c": 30, "trials": 10})");
  const fs::path out = root_ / "nested" / "dir";
  ASSERT_EQ(invoke({"contraction", "--config", cfg.string(), "--out", out.string()}), kExitOk);
  std::set<std::string> top;
  for (const auto& e : fs::directory_iterator(root_)) top.insert(e.path().filename().string());
  EXPECT_EQ(top, (std::set<std::string>{"c30.json", "nested"}));
  EXPECT_EQ(snapshot(out).size(), 2u);
}
