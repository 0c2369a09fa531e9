#include "sigspline_cli/cli.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "sigspline/csv.hpp"
#include "sigspline/model.hpp"

namespace sigspline::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sigspline_cli_test_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run_args(std::vector<std::string> args) {
    args.insert(args.begin(), "sigspline");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return run(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  void write(const std::string& name, const std::string& text) {
    std::ofstream(path(name)) << text;
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  // Small simulated series shared by the fit/sample/evaluate tests.
  std::string small_series() {
    const std::string p = path("series.csv");
    EXPECT_EQ(run_args({"simulate", "--n-lags", "400", "--output", p}), kExitOk) << err_.str();
    return p;
  }

  int quick_fit(const std::string& data, const std::vector<std::string>& extra = {}) {
    std::vector<std::string> args{"fit",          "--data",      data,  "--model-out",
                                  path("m.json"), "--report-out", path("r.json"), "--level",
                                  "1",            "--bins",      "8",   "--max-iters",
                                  "40",           "--n-seeds",   "2",   "--learning-rate",
                                  "2"};
    args.insert(args.end(), extra.begin(), extra.end());
    return run_args(args);
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(CliTest, HelpListsCommandsAndDefaults) {
  EXPECT_EQ(run_args({"--help"}), kExitOk);
  for (const auto& c : command_names()) EXPECT_NE(out_.str().find(c), std::string::npos) << c;
  EXPECT_EQ(run_args({"simulate", "--help"}), kExitOk);
  EXPECT_NE(out_.str().find("4096"), std::string::npos);
  EXPECT_NE(out_.str().find("--config"), std::string::npos);
  EXPECT_EQ(run_args({"fit", "--help"}), kExitOk);
  EXPECT_NE(out_.str().find("32"), std::string::npos);
  EXPECT_NE(out_.str().find("gradient_descent"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run_args({}), kExitUsage);
  EXPECT_EQ(run_args({"train"}), kExitUsage);
  EXPECT_EQ(run_args({"simulate", "--bogus", "1"}), kExitUsage);
  EXPECT_EQ(run_args({"simulate", "--seed", "minus"}), kExitUsage);
  write("unknown.json", R"({"output": "x.csv", "lags": 10})");
  EXPECT_EQ(run_args({"simulate", "--config", path("unknown.json")}), kExitUsage);
  EXPECT_NE(err_.str().find("unknown key 'lags'"), std::string::npos) << err_.str();
  write("typed.json", R"({"n_lags": "many"})");
  EXPECT_EQ(run_args({"simulate", "--config", path("typed.json")}), kExitUsage);
  write("broken.json", "{");
  EXPECT_EQ(run_args({"simulate", "--config", path("broken.json")}), kExitUsage);
  EXPECT_EQ(run_args({"simulate", "--config", path("missing.json")}), kExitUsage);
  EXPECT_EQ(run_args({"simulate", "--map", "spiral", "--output", path("s.csv")}), kExitUsage);
  EXPECT_EQ(run_args({"fit", "--optimizer", "newton", "--reg-kind", "l1", "--reg-lambda", "0.1"}),
            kExitUsage);
}

TEST_F(CliTest, ResolveConfigLayersFileAndFlags) {
  write("c.json", R"({"seed": 3, "n_lags": 10})");
  const std::string r = resolve_config("simulate", path("c.json"), {{"seed", "5"}});
  EXPECT_NE(r.find("\"seed\": 5"), std::string::npos);
  EXPECT_NE(r.find("\"n_lags\": 10"), std::string::npos);
  EXPECT_NE(r.find("\"burn_in\": 100"), std::string::npos);
  EXPECT_NE(r.find("\"command\": \"simulate\""), std::string::npos);
  EXPECT_THROW(resolve_config("fit", path("c.json"), {}), ConfigError);
}

TEST_F(CliTest, SimulateDefaultsSeedsAndMaps) {
  EXPECT_EQ(run_args({"simulate", "--output", path("a.csv")}), kExitOk) << err_.str();
  const Sequence a = read_series_csv(path("a.csv"));
  EXPECT_EQ(a.length(), 4096);
  EXPECT_EQ(a.channels(), 2);
  EXPECT_NE(slurp(path("a.csv.config.json")).find("\"command\": \"simulate\""), std::string::npos);

  EXPECT_EQ(run_args({"simulate", "--seed", "7", "--output", path("b.csv")}), kExitOk);
  EXPECT_EQ(run_args({"simulate", "--seed", "7", "--output", path("c.csv")}), kExitOk);
  EXPECT_EQ(slurp(path("b.csv")), slurp(path("c.csv")));
  EXPECT_NE(slurp(path("a.csv")), slurp(path("b.csv")));

  EXPECT_EQ(run_args({"simulate", "--map", "fixed_nonlinear", "--output", path("d.csv")}), kExitOk);
  EXPECT_EQ(read_series_csv(path("d.csv")).channels(), 8);
  EXPECT_EQ(run_args({"simulate", "--whiten", "--output", path("e.csv")}), kExitOk);
}

TEST_F(CliTest, FitWritesModelAndReportAndReplays) {
  const std::string data = small_series();
  ASSERT_EQ(quick_fit(data), kExitOk) << err_.str();
  const SigSplineModel m = load_model(path("m.json"));
  EXPECT_EQ(m.shape().level, 1u);
  EXPECT_EQ(m.shape().window, 2u);
  const std::string report = slurp(path("r.json"));
  EXPECT_NE(report.find("\"parameter_count\": 64"), std::string::npos);
  EXPECT_NE(report.find("\"n_seeds\": 2"), std::string::npos);
  EXPECT_NE(slurp(path("m.json")).find("\"config\""), std::string::npos);

  // The config echoed into the report reproduces the run byte for byte.
  const std::string first_model = slurp(path("m.json"));
  write("replay.json", nlohmann::json::parse(report).at("config").dump());
  ASSERT_EQ(run_args({"fit", "--config", path("replay.json")}), kExitOk) << err_.str();
  EXPECT_EQ(slurp(path("r.json")), report);
  EXPECT_EQ(slurp(path("m.json")), first_model);
}

TEST_F(CliTest, FitParameterCountFollowsLevel) {
  const std::string data = small_series();
  const std::size_t expected[] = {512, 1664, 5120, 15488};
  for (std::size_t level = 1; level <= 4; ++level) {
    ASSERT_EQ(run_args({"fit", "--data", data, "--model-out", path("m.json"), "--report-out",
                        path("r.json"), "--level", std::to_string(level), "--max-iters", "1",
                        "--n-seeds", "1"}),
              kExitOk)
        << err_.str();
    EXPECT_NE(slurp(path("r.json")).find("\"parameter_count\": " + std::to_string(expected[level - 1])),
              std::string::npos)
        << level;
  }
}

TEST_F(CliTest, FitDataErrors) {
  write("short.csv", "t,ch1,ch2\n0,1,2\n1,2,3\n");
  EXPECT_EQ(quick_fit(path("short.csv")), kExitData);
  EXPECT_EQ(quick_fit(path("nothing.csv")), kExitData);
  EXPECT_EQ(quick_fit(small_series(), {"--window", "0"}), kExitUsage);
}

TEST_F(CliTest, NumericalFailures) {
  EXPECT_EQ(run_args({"simulate", "--sigma", "[[1, 2], [2, 1]]", "--output", path("a.csv")}),
            kExitNumerical);
  EXPECT_NE(err_.str().find("numerical failure"), std::string::npos);
  EXPECT_EQ(run_args({"simulate", "--sigma", "[[0, 0], [0, 0]]", "--whiten", "--output",
                      path("b.csv")}),
            kExitNumerical);
  EXPECT_EQ(run_args({"simulate", "--sigma", "[[1, 0], [0]]", "--output", path("c.csv")}),
            kExitUsage);
}

TEST_F(CliTest, SampleStaysInTrainingEnvelopeAndIsReproducible) {
  const std::string data = small_series();
  ASSERT_EQ(quick_fit(data), kExitOk) << err_.str();
  const std::vector<std::string> base{"sample", "--model", path("m.json"), "--history", data,
                                      "--batch", "50"};
  auto args = base;
  args.insert(args.end(), {"--output", path("s1.csv")});
  ASSERT_EQ(run_args(args), kExitOk) << err_.str();
  args = base;
  args.insert(args.end(), {"--output", path("s2.csv")});
  ASSERT_EQ(run_args(args), kExitOk);
  EXPECT_EQ(slurp(path("s1.csv")), slurp(path("s2.csv")));
  EXPECT_TRUE(fs::exists(path("s1.csv.config.json")));

  const auto batch = read_batch_csv(path("s1.csv"));
  ASSERT_EQ(batch.size(), 50u);
  const Sequence raw = read_series_csv(data);
  const Eigen::RowVectorXd lo = raw.values().colwise().minCoeff();
  const Eigen::RowVectorXd hi = raw.values().colwise().maxCoeff();
  for (const auto& s : batch) {
    EXPECT_EQ(s.length(), 4);
    for (Eigen::Index t = 0; t < s.length(); ++t) {
      for (Eigen::Index c = 0; c < 2; ++c) {
        EXPECT_GE(s(t, c), lo[c]);
        EXPECT_LE(s(t, c), hi[c]);
      }
    }
  }

  EXPECT_EQ(run_args({"simulate", "--map", "fixed_nonlinear", "--output", path("wide.csv"),
                      "--n-lags", "50"}),
            kExitOk);
  EXPECT_EQ(run_args({"sample", "--model", path("m.json"), "--history", path("wide.csv"),
                      "--output", path("s3.csv")}),
            kExitData);
}

TEST_F(CliTest, EvaluateSelfIsZeroAndAbsAcfIsOptIn) {
  const std::string data = small_series();
  ASSERT_EQ(run_args({"evaluate", "--self", "--data", data, "--report-out", path("e.json"),
                      "--table-out", path("e.txt"), "--batch", "64"}),
            kExitOk)
      << err_.str();
  const std::string table = slurp(path("e.txt"));
  EXPECT_NE(table.find("# config"), std::string::npos);
  EXPECT_EQ(table.find("abs_acf_lag1"), std::string::npos);
  std::istringstream lines(table);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    if (line.rfind("level/", 0) == 0 || line.rfind("return/", 0) == 0) {
      ++rows;
      EXPECT_NE(line.find("0.0000 +- 0.0000"), std::string::npos) << line;
    }
  }
  EXPECT_EQ(rows, 10u);
  EXPECT_NE(slurp(path("e.json")).find("\"seeds\": 10"), std::string::npos);

  ASSERT_EQ(quick_fit(data), kExitOk);
  ASSERT_EQ(run_args({"evaluate", "--model", path("m.json"), "--data", data, "--report-out",
                      path("f.json"), "--table-out", path("f.txt"), "--batch", "32", "--seeds", "2",
                      "--abs-acf"}),
            kExitOk)
      << err_.str();
  EXPECT_NE(slurp(path("f.txt")).find("return/abs_acf_lag1"), std::string::npos);
}

TEST_F(CliTest, BinaryExitCodes) {
  auto status = [](const std::string& cmd) {
    const int s = std::system(cmd.c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  const std::string bin = SIGSPLINE_CLI_PATH;
  EXPECT_EQ(status(bin + " --help > /dev/null"), 0);
  EXPECT_EQ(status(bin + " simulate --nope 2> /dev/null"), 1);
  EXPECT_EQ(status(bin + " fit --data " + path("absent.csv") + " 2> /dev/null"), 2);
  EXPECT_EQ(status(bin + " simulate --n-lags 10 --output " + path("x.csv") + " > /dev/null"), 0);
}

}  // namespace
}  // namespace sigspline::cli
