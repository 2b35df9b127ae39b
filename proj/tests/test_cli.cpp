#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "arvar/bench.hpp"
#include "arvar/scores.hpp"
#include "arvar/serialize.hpp"
#include "commands.hpp"

namespace arvar::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("arvar_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  int run(const std::vector<std::string>& args) {
    out_.str("");
    err_.str("");
    return main_entry(args, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST(RunConfig, CanonicalJsonRoundTrip) {
  const RunConfig cfg = parse_args({"bench", "--datasets", "g,y", "--estimators", "NN,Poly",
                                    "--runs", "7", "--seed", "42", "--drop-constant", "false",
                                    "--plots", "--out-dir", "somewhere"});
  EXPECT_EQ(cfg.command, "bench");
  EXPECT_EQ(cfg.datasets, (std::vector<std::string>{"G", "Y"}));
  EXPECT_EQ(cfg.estimators, (std::vector<std::string>{"ar-nn", "ar-poly"}));
  EXPECT_EQ(cfg.runs, 7u);
  EXPECT_FALSE(cfg.drop_constant);
  EXPECT_TRUE(cfg.plots);
  const std::string j = to_json(cfg);
  EXPECT_EQ(to_json(config_from_json(j)), j);
}

TEST(RunConfig, InfiniteToleranceRoundTrips) {
  const RunConfig cfg = parse_args({"fit", "data.csv", "--model", "POLY", "--tol", "inf"});
  EXPECT_TRUE(std::isinf(cfg.tol));
  EXPECT_EQ(cfg.model, "poly");
  const RunConfig back = config_from_json(to_json(cfg));
  EXPECT_TRUE(std::isinf(back.tol));
  EXPECT_EQ(to_json(back), to_json(cfg));
}

TEST(RunConfig, BadArgumentsAreInputErrors) {
  auto code = [](const std::vector<std::string>& a) {
    try {
      parse_args(a);
    } catch (const UsageError& e) {
      return e.code();
    }
    return 0;
  };
  EXPECT_EQ(code({"bench", "--datasets", "Q"}), kInputError);
  EXPECT_EQ(code({"bench", "--estimators", "svm"}), kInputError);
  EXPECT_EQ(code({"fit", "x.csv", "--model", "tree"}), kInputError);
  EXPECT_EQ(code({"fit", "x.csv", "--tol", "abc"}), kInputError);
  EXPECT_EQ(code({"bench", "--runs", "0"}), kInputError);
  EXPECT_EQ(code({"frobnicate"}), kInputError);
  EXPECT_EQ(code({}), kInputError);
  EXPECT_THROW(config_from_json("{}"), UsageError);
}

TEST_F(CliTest, HelpExitsCleanly) {
  EXPECT_EQ(run({"--help"}), kOk);
  EXPECT_NE(out_.str().find("bench"), std::string::npos);
  EXPECT_EQ(run({"fit", "--help"}), kOk);
  EXPECT_NE(out_.str().find("--model"), std::string::npos);
}

TEST_F(CliTest, ScoreSingleRow) {
  write("one.csv", "mu,sigma,y_obs\n0,1,0\n");
  ASSERT_EQ(run({"score", path("one.csv"), "--csv", path("score.csv")}), kOk) << err_.str();
  EXPECT_NE(out_.str().find("crps     0.233695\n"), std::string::npos) << out_.str();
  EXPECT_NE(out_.str().find("nlpd     0.918939\n"), std::string::npos) << out_.str();
  const std::string csv = slurp(path("score.csv"));
  EXPECT_NE(csv.find("crps,0.233695\n"), std::string::npos) << csv;
}

TEST_F(CliTest, ScoreAtCrpsMinimizingSpreads) {
  const std::vector<double> eps{0.3, -1.2, 2.0, 0.05, -0.7};
  std::string text = "y_obs,mu,sigma\n";
  double expect = 0.0;
  for (double e : eps) {
    const double s = std::abs(e) / std::sqrt(std::log(2.0));
    std::ostringstream row;
    row.precision(17);
    row << 1.0 + e << ",1," << s << '\n';
    text += row.str();
    expect += crps_gaussian(ForecastTriple(1.0, s, 1.0 + e)) / eps.size();
  }
  write("min.csv", text);
  ASSERT_EQ(run({"score", path("min.csv")}), kOk) << err_.str();
  char buf[64];
  std::snprintf(buf, sizeof buf, "crps     %.6g\n", expect);
  EXPECT_NE(out_.str().find(buf), std::string::npos) << out_.str();
  // at the minimizer the exp term cancels, leaving |eps| erf(sqrt(log 4) / 2)
  double closed = 0.0;
  for (double e : eps) closed += std::abs(e) * std::erf(std::sqrt(std::log(4.0)) / 2.0) / eps.size();
  EXPECT_NEAR(expect, closed, 1e-14);
}

TEST_F(CliTest, ScoreInputErrors) {
  write("empty.csv", "mu,sigma,y_obs\n\n");
  EXPECT_EQ(run({"score", path("empty.csv")}), kInputError);
  write("bad.csv", "mu,sigma,y_obs\n0,1,0\n0,abc,1\n");
  EXPECT_EQ(run({"score", path("bad.csv")}), kInputError);
  EXPECT_NE(err_.str().find("line 3"), std::string::npos) << err_.str();
  write("neg.csv", "mu,sigma,y_obs\n0,-1,0\n");
  EXPECT_EQ(run({"score", path("neg.csv")}), kInputError);
  write("cols.csv", "a,b\n1,2\n");
  EXPECT_EQ(run({"score", path("cols.csv")}), kInputError);
  EXPECT_EQ(run({"score", path("missing.csv")}), kInputError);
}

void write_g_residuals(const std::string& p, std::uint64_t seed) {
  const auto spec = builtin_dataset(DatasetName::G, seed);
  const Dataset d = generate(spec);
  std::ofstream f(p);
  f.precision(17);
  f << "x1,eps\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    f << d.inputs[i][0] << ',' << d.targets[i] - d.true_mean[i] << '\n';
  }
}

TEST_F(CliTest, FitPolynomialOnGResiduals) {
  write_g_residuals(path("g.csv"), 5);
  ASSERT_EQ(run({"fit", path("g.csv"), "--model", "poly", "--out-dir", path("out")}), kOk)
      << err_.str();
  const auto model = std::get<PolynomialModel>(model_from_json(slurp(path("out/model.json"))));
  EXPECT_NEAR(predict_sigma(model, 0.5), 0.75, 0.1);
  const std::string sig = slurp(path("out/sigma.csv"));
  EXPECT_EQ(sig.substr(0, sig.find('\n')), "x1,eps,sigma");
  EXPECT_EQ(std::count(sig.begin(), sig.end(), '\n'), 101);
}

TEST_F(CliTest, FitIsDeterministicUnderSeed) {
  write_g_residuals(path("g.csv"), 6);
  ASSERT_EQ(run({"fit", path("g.csv"), "--model", "nn", "--seed", "3", "--out-dir", path("a")}), kOk);
  ASSERT_EQ(run({"fit", path("g.csv"), "--model", "nn", "--seed", "3", "--out-dir", path("b")}), kOk);
  EXPECT_EQ(slurp(path("a/model.json")), slurp(path("b/model.json")));
  EXPECT_EQ(slurp(path("a/sigma.csv")), slurp(path("b/sigma.csv")));
  ASSERT_EQ(run({"fit", path("g.csv"), "--model", "per-point", "--out-dir", path("c")}), kOk);
  EXPECT_NE(slurp(path("c/model.json")).find("per-point"), std::string::npos);
}

TEST_F(CliTest, FitPolynomialRejectsMultipleInputs) {
  write("five.csv", "x1,x2,x3,x4,x5,eps\n0.1,0.2,0.3,0.4,0.5,0.1\n0.5,0.4,0.3,0.2,0.1,-0.2\n");
  EXPECT_EQ(run({"fit", path("five.csv"), "--model", "poly"}), kUnsupported);
  EXPECT_NE(err_.str().find("one input"), std::string::npos);
  write("tiny.csv", "x1,eps\n0.1,0.2\n0.2,0.1\n");
  EXPECT_EQ(run({"fit", path("tiny.csv"), "--model", "nn"}), kInputError);
}

TEST_F(CliTest, BenchWritesDeterministicCsv) {
  const std::vector<std::string> base{"bench", "--datasets", "G", "--estimators", "ar-poly,gp",
                                      "--runs", "2", "--n-test", "100", "--seed", "9", "--plots"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out-dir", path("a")});
  b.insert(b.end(), {"--out-dir", path("b")});
  ASSERT_EQ(run(a), kOk) << err_.str();
  ASSERT_EQ(run(b), kOk) << err_.str();
  for (const char* f : {"table1.csv", "runs.csv", "recovery_G_ar-poly.csv", "recovery_G_gp.csv"}) {
    const std::string x = slurp(path(std::string("a/") + f));
    EXPECT_FALSE(x.empty()) << f;
    EXPECT_EQ(x, slurp(path(std::string("b/") + f))) << f;
  }
  EXPECT_TRUE(fs::exists(path("a/recovery_G_ar-poly.svg")));
  const std::string table = slurp(path("a/table1.csv"));
  EXPECT_EQ(table.substr(0, table.find('\n')), "dataset,statistic,GP,AR-NN,AR-Poly");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 4);
  EXPECT_EQ(config_from_json(slurp(path("a/config.json"))).runs, 2u);
}

TEST_F(CliTest, BenchUnsupportedOnly) {
  EXPECT_EQ(run({"bench", "--datasets", "5D", "--estimators", "ar-poly,gp", "--out-dir", path("x")}),
            kUnsupported);
}

TEST_F(CliTest, GenDumpsDataset) {
  ASSERT_EQ(run({"gen", "--dataset", "W", "--n", "25", "--seed", "4"}), kOk);
  const std::string s = out_.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "x1,y,true_mean,true_sigma");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 26);
  ASSERT_EQ(run({"gen", "--dataset", "5D", "--n", "3", "-o", path("d.csv")}), kOk);
  const std::string f = slurp(path("d.csv"));
  EXPECT_EQ(f.substr(0, f.find('\n')), "x1,x2,x3,x4,x5,y,true_mean,true_sigma");
}

}  // namespace
}  // namespace arvar::cli
