#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <memory>
#include <sstream>

#include "cli.hpp"
#include "fixtures.hpp"
#include "transboost/model.hpp"
#include "transboost/transboost.hpp"

namespace transboost {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::make_unique<testing::TempDir>(::testing::UnitTest::GetInstance()->current_test_info()->name());
    data_ = dir_->file("data.csv");
    write_csv(testing::shifted_dataset(200, 100, 4, 12), data_);
  }
  std::string file(const std::string& name) const { return dir_->file(name); }

  std::unique_ptr<testing::TempDir> dir_;
  std::string data_;
};

TEST_F(Cli, TrainWritesModelAndLog) {
  const Result r = run({"train", "--data", data_, "--rounds", "7", "--model-out", file("m.txt"), "--log-out",
                        file("log.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_model(file("m.txt")).trees.size(), 7u);
  const std::string log = slurp(file("log.txt"));
  EXPECT_NE(log.find("round=7 loss_target="), std::string::npos);
  EXPECT_NE(log.find("beta_mean="), std::string::npos);
}

TEST_F(Cli, TrainTwiceGivesIdenticalBytes) {
  for (const char* name : {"a.txt", "b.txt"}) {
    ASSERT_EQ(run({"train", "--data", data_, "--rounds", "5", "--seed", "9", "--model-out", file(name)}).code, 0);
  }
  EXPECT_EQ(slurp(file("a.txt")), slurp(file("b.txt")));
}

TEST_F(Cli, MissingLabelColumnIsDataError) {
  const Result r = run({"train", "--data", data_, "--label-col", "absent", "--model-out", file("m.txt")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("MissingColumn"), std::string::npos);
}

TEST_F(Cli, ConfigErrorsExitOne) {
  EXPECT_EQ(run({"train", "--data", data_, "--eta", "0", "--model-out", file("m.txt")}).code, 1);
  EXPECT_EQ(run({"train", "--data", data_, "--no-such-flag", "--model-out", file("m.txt")}).code, 1);
  EXPECT_EQ(run({"train", "--data", data_}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"train", "--config", file("absent.profile")}).code, 1);
  std::ofstream(file("bad.profile")) << "rounds = 3\nnot-an-option = 1\n";
  EXPECT_EQ(run({"train", "--config", file("bad.profile"), "--data", data_, "--model-out", file("m.txt")}).code, 1);
}

TEST_F(Cli, ProfileValuesAreOverriddenByFlags) {
  std::ofstream(file("p.profile")) << "# comment\nrounds = 3\ndepth = 2\ndata = " << data_ << "\n";
  ASSERT_EQ(run({"train", "--config", file("p.profile"), "--model-out", file("a.txt")}).code, 0);
  EXPECT_EQ(load_model(file("a.txt")).trees.size(), 3u);
  EXPECT_EQ(load_model(file("a.txt")).config.max_depth, 2u);
  ASSERT_EQ(run({"train", "--config", file("p.profile"), "--rounds", "4", "--model-out", file("b.txt")}).code, 0);
  EXPECT_EQ(load_model(file("b.txt")).trees.size(), 4u);
}

TEST_F(Cli, PredictMatchesInProcessModel) {
  ASSERT_EQ(run({"train", "--data", data_, "--rounds", "5", "--model-out", file("m.txt")}).code, 0);
  const Result r = run({"predict", "--model", file("m.txt"), "--data", data_, "--out", file("p.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  CsvOptions csv;
  csv.domain_column = "domain";
  const Dataset ds = load_csv(data_, csv);
  BoostConfig cfg;
  cfg.rounds = 5;
  const auto expected = predict(train(ds, cfg), ds);
  std::istringstream lines(slurp(file("p.csv")));
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "probability");
  std::size_t i = 0;
  while (std::getline(lines, line)) ASSERT_EQ(std::stod(line), expected.at(i++));
  EXPECT_EQ(i, ds.n_rows());
}

TEST_F(Cli, PredictWithWrongFeatureCountIsDataError) {
  ASSERT_EQ(run({"train", "--data", data_, "--rounds", "2", "--model-out", file("m.txt")}).code, 0);
  std::ofstream(file("narrow.csv")) << "a,b\n1,2\n";
  EXPECT_EQ(run({"predict", "--model", file("m.txt"), "--data", file("narrow.csv")}).code, 2);
}

TEST_F(Cli, PredictEmptyModelIsConstant) {
  TransBoostModel m;
  m.n_features = 4;
  m.base_score_main = -0.4;
  save_model(m, file("empty.txt"));
  const Result r = run({"predict", "--model", file("empty.txt"), "--data", data_});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) ASSERT_EQ(std::stod(line), sigmoid(-0.4));
  EXPECT_EQ(run({"importance", "--model", file("empty.txt")}).out, "");
}

TEST_F(Cli, ImportanceListsFeatures) {
  ASSERT_EQ(run({"train", "--data", data_, "--rounds", "3", "--model-out", file("m.txt")}).code, 0);
  const Result r = run({"importance", "--model", file("m.txt")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("feature=", 0), 0u);
}

TEST_F(Cli, OracleCheckSingleTrialPasses) {
  const Result r = run({"oracle-check", "--trials", "1", "--seed", "4"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("trial=0 "), std::string::npos);
  EXPECT_NE(r.out.find("PASS trials=1"), std::string::npos);
}

TEST_F(Cli, SweepSingleFraction) {
  const Result r = run({"sweep", "--data", data_, "--rounds", "3", "--fractions", "1.0", "--algorithms", "pooled"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "fraction,seed,algorithm,auc");
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 2);
}

TEST_F(Cli, UnknownAlgorithmIsConfigError) {
  EXPECT_EQ(run({"sweep", "--data", data_, "--algorithms", "lightgbm"}).code, 1);
}

TEST_F(Cli, EvalSparsityRuntimeAndSynthetic) {
  const Result e = run({"eval", "--data", data_, "--rounds", "3", "--report-out", file("inc.csv")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("algorithm=kmm_weighted auc="), std::string::npos);
  EXPECT_EQ(slurp(file("inc.csv")).rfind("rate,algorithm,approval_ratio\n", 0), 0u);

  const Result s = run({"sparsity", "--data", data_, "--rounds", "3", "--keep-rates", "0.5,1", "--seeds", "1,2"});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(std::count(s.out.begin(), s.out.end(), '\n'), 5);

  const Result t = run({"runtime", "--data", data_, "--rounds", "2", "--repeats", "2", "--multipliers", "1,2"});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_EQ(std::count(t.out.begin(), t.out.end(), '\n'), 5);

  ASSERT_EQ(run({"make-synthetic", "--out", file("s.csv"), "--n-source", "30", "--n-target", "20"}).code, 0);
  CsvOptions csv;
  csv.domain_column = "domain";
  EXPECT_EQ(load_csv(file("s.csv"), csv).n_rows(), 50u);
}

TEST_F(Cli, DataSuffixForcesDomain) {
  std::ofstream(file("src.csv")) << "x,label\n1,0\n2,1\n3,0\n4,1\n";
  std::ofstream(file("tgt.csv")) << "x,label\n1,1\n2,0\n3,1\n4,0\n";
  const Result r = run({"train", "--data", file("src.csv") + "@source," + file("tgt.csv") + "@target", "--rounds",
                        "2", "--model-out", file("m.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("rows_source=4 rows_target=4"), std::string::npos);
}

}  // namespace
}  // namespace transboost
