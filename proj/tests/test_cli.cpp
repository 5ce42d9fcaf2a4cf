#include "lrsdl/archive.hpp"
#include "lrsdl/cli.hpp"
#include "lrsdl/matrix_io.hpp"
#include "lrsdl/synthetic.hpp"

#include <gtest/gtest.h>

#include <Eigen/SVD>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace lrsdl;

namespace {

struct CliRun {
  int rc = 0;
  std::string out;
  std::string err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliRun r;
  r.rc = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string read_text(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) v.push_back(line);
  }
  return v;
}

std::map<std::string, double> key_values(const std::string& text) {
  std::map<std::string, double> v;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos) v[tok.substr(0, eq)] = std::stod(tok.substr(eq + 1));
  }
  return v;
}

using Flags = std::map<std::string, std::string>;

// Subcommand plus flags, with `overrides` replacing or adding entries.
std::vector<std::string> command(const std::string& sub, Flags flags, const Flags& overrides) {
  for (const auto& [k, v] : overrides) flags[k] = v;
  std::vector<std::string> args = {sub};
  for (const auto& [k, v] : flags) {
    args.push_back(k);
    args.push_back(v);
  }
  return args;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("lrsdl_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Writes a synthetic dataset under `name` and returns its directory.
  std::string synth(const std::string& name, const Flags& overrides = {}) {
    Flags flags = {{"--classes", "3"}, {"--dim", "20"}, {"--per-class", "6"},
                   {"--kc", "3"},      {"--seed", "4"}, {"--out", path(name)}};
    const CliRun r = cli(command("synth", flags, overrides));
    EXPECT_EQ(r.rc, 0) << r.err;
    return path(name);
  }

  CliRun train(const std::string& data, const std::string& model, const Flags& overrides = {}) {
    Flags flags = {{"--data", data + "/Y.lmx"}, {"--labels", data + "/labels.csv"},
                   {"--kc", "3"}, {"--iters", "3"}, {"--out", path(model)}};
    return cli(command("train", flags, overrides));
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SynthWritesRequestedShape) {
  const CliRun r = cli({"synth", "--classes", "2", "--dim", "10", "--per-class", "5", "--out",
                     path("s")});
  ASSERT_EQ(r.rc, 0) << r.err;
  const Matrix Y = load_matrix(path("s") + "/Y.lmx");
  EXPECT_EQ(Y.rows(), 10);
  EXPECT_EQ(Y.cols(), 10);
  EXPECT_EQ(load_labels(path("s") + "/labels.csv").size(), 10u);
}

TEST_F(CliTest, SynthIsByteDeterministic) {
  const std::string a = synth("a", {{"--k0", "4"}, {"--shared-rank", "2"}, {"--noise", "0.1"}});
  const std::string b = synth("b", {{"--k0", "4"}, {"--shared-rank", "2"}, {"--noise", "0.1"}});
  for (const char* f : {"Y.lmx", "labels.csv", "D.lmx", "D0.lmx"}) {
    EXPECT_EQ(read_text(fs::path(a) / f), read_text(fs::path(b) / f)) << f;
  }
}

TEST_F(CliTest, SynthPlantsSharedRank) {
  const std::string s = synth("s", {{"--k0", "8"}, {"--shared-rank", "3"}});
  const Matrix D0 = load_matrix(s + "/D0.lmx");
  EXPECT_EQ(D0.cols(), 8);
  const Vector sv = Eigen::JacobiSVD<Matrix>(D0).singularValues();
  EXPECT_EQ((sv.array() > 1e-10).count(), 3);
}

TEST_F(CliTest, TrainWithoutSharedAtomsWritesEmptySharedDictionary) {
  const std::string s = synth("s");
  const CliRun r = train(s, "m", {{"--k0", "0"}});
  ASSERT_EQ(r.rc, 0) << r.err;
  EXPECT_EQ(read_meta(path("m") + "/meta").at("k0"), "0");
  EXPECT_EQ(read_text(path("m") + "/D0.lmx"), "LMX 20 0\n");
  EXPECT_NE(r.out.find("objective="), std::string::npos);
}

TEST_F(CliTest, TraceHasOneRowPerIteration) {
  const std::string s = synth("s");
  for (const char* iters : {"1", "4"}) {
    const CliRun r = train(s, std::string("m") + iters, {{"--iters", iters}, {"--k0", "2"}});
    ASSERT_EQ(r.rc, 0) << r.err;
    const auto rows = lines(read_text(path(std::string("m") + iters) + "/trace.csv"));
    ASSERT_FALSE(rows.empty());
    EXPECT_EQ(rows.front(), "iter,objective,fidelity,l1,fisher,nuclear,seconds");
    EXPECT_EQ(rows.size() - 1, static_cast<std::size_t>(std::stoi(iters)));
  }
}

TEST_F(CliTest, TrainIsByteDeterministic) {
  const std::string s = synth("s");
  ASSERT_EQ(train(s, "a", {{"--k0", "2"}, {"--seed", "9"}}).rc, 0);
  ASSERT_EQ(train(s, "b", {{"--k0", "2"}, {"--seed", "9"}}).rc, 0);
  for (const char* f : {"D.lmx", "D0.lmx", "means_mc.lmx", "mean_m0.lmx", "meta"}) {
    EXPECT_EQ(read_text(path("a") + "/" + f), read_text(path("b") + "/" + f)) << f;
  }
}

TEST_F(CliTest, TrainAbortExitsThreeAndFlagsArchive) {
  const std::string s = synth("s");
  const CliRun r = train(s, "m", {{"--k0", "2"}, {"--eta", "1e308"}});
  EXPECT_EQ(r.rc, 3);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(read_meta(path("m") + "/meta").at("status"), "aborted");
}

TEST_F(CliTest, ClassifySeparableTrainingSet) {
  const std::string s = synth("s", {{"--noise", "0"}, {"--dim", "40"}, {"--per-class", "10"}});
  ASSERT_EQ(train(s, "m", {{"--iters", "5"}}).rc, 0);
  const CliRun r = cli({"classify", "--model", path("m"), "--data", s + "/Y.lmx", "--labels",
                     s + "/labels.csv", "--out", path("pred/predictions.csv")});
  ASSERT_EQ(r.rc, 0) << r.err;
  const auto kv = key_values(r.out);
  ASSERT_EQ(kv.count("accuracy"), 1u);
  EXPECT_GE(kv.at("accuracy"), 0.99);
  EXPECT_NE(r.out.find("accuracy=1.0000"), std::string::npos);

  const auto rows = lines(read_text(path("pred/predictions.csv")));
  ASSERT_EQ(rows.size(), 31u);
  EXPECT_EQ(rows.front(), "index,true_label,pred_label,score_pred");
  const auto grid = lines(read_text(path("pred/confusion.csv")));
  ASSERT_EQ(grid.size(), 3u);
  EXPECT_EQ(grid[0], "10,0,0");
}

TEST_F(CliTest, ClassifyAcceptsBothWeightExtremes) {
  const std::string s = synth("s");
  ASSERT_EQ(train(s, "m").rc, 0);
  for (const char* w : {"0", "1"}) {
    const CliRun r = cli({"classify", "--model", path("m"), "--data", s + "/Y.lmx", "--w", w,
                       "--out", path(std::string("p") + w + ".csv")});
    EXPECT_EQ(r.rc, 0) << r.err;
    EXPECT_TRUE(fs::exists(path(std::string("p") + w + ".csv")));
  }
  EXPECT_FALSE(fs::exists(path("confusion.csv")));
}

TEST_F(CliTest, ClassifyWithMissingModelWritesNothing) {
  const std::string s = synth("s");
  const CliRun r = cli({"classify", "--model", path("absent"), "--data", s + "/Y.lmx", "--labels",
                     s + "/labels.csv", "--out", path("out/pred.csv")});
  EXPECT_EQ(r.rc, 2);
  EXPECT_FALSE(r.err.empty());
  EXPECT_FALSE(fs::exists(path("out")));
}

TEST_F(CliTest, ClassifyDimensionMismatchExitsTwo) {
  const std::string s = synth("s");
  ASSERT_EQ(train(s, "m").rc, 0);
  const std::string other = synth("o", {{"--dim", "12"}});
  const CliRun r = cli({"classify", "--model", path("m"), "--data", other + "/Y.lmx", "--out",
                     path("pred.csv")});
  EXPECT_EQ(r.rc, 2);
  EXPECT_FALSE(fs::exists(path("pred.csv")));
}

TEST_F(CliTest, BenchWritesTracesAndSummary) {
  const std::string s = synth("s", {{"--per-class", "5"}});
  const CliRun r = cli({"bench", "--data", s + "/Y.lmx", "--labels", s + "/labels.csv", "--iters",
                     "3", "--out", path("b")});
  ASSERT_EQ(r.rc, 0) << r.err;
  const auto kv = key_values(r.out);
  for (const char* k : {"joint_final", "seq_final", "joint_time", "seq_time"}) {
    EXPECT_EQ(kv.count(k), 1u) << k;
  }
  EXPECT_EQ(lines(r.out).front().rfind("joint_final=", 0), 0u);
  for (const char* f : {"joint.csv", "sequential.csv"}) {
    EXPECT_EQ(lines(read_text(path("b") + "/" + f)).size(), 4u) << f;
  }
}

TEST_F(CliTest, BenchWithIdenticalCodersMatches) {
  const std::string s = synth("s", {{"--per-class", "5"}});
  const CliRun r = cli({"bench", "--data", s + "/Y.lmx", "--labels", s + "/labels.csv", "--iters",
                     "1", "--identical-coders", "--out", path("b")});
  ASSERT_EQ(r.rc, 0) << r.err;
  const auto kv = key_values(r.out);
  EXPECT_EQ(kv.at("joint_final"), kv.at("seq_final"));
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(cli({}).rc, 2);
  EXPECT_EQ(cli({"frobnicate"}).rc, 2);
  EXPECT_EQ(cli({"synth", "--classes", "2"}).rc, 2);
  EXPECT_EQ(cli({"synth", "--classes", "2", "--dim", "4", "--per-class", "2", "--k0", "2",
                 "--shared-rank", "3", "--out", path("bad")})
                .rc,
            2);
  const std::string s = synth("s");
  EXPECT_EQ(train(s, "m", {{"--lambda1", "-1"}}).rc, 2);
  EXPECT_EQ(cli({"train", "--data", path("missing.lmx"), "--labels", s + "/labels.csv", "--kc",
                 "2", "--out", path("m2")})
                .rc,
            2);
  ASSERT_EQ(train(s, "m3").rc, 0);
  EXPECT_EQ(cli({"classify", "--model", path("m3"), "--data", s + "/Y.lmx", "--w", "1.5",
                 "--out", path("p.csv")})
                .rc,
            2);
}

TEST_F(CliTest, HelpExitsZero) {
  const CliRun r = cli({"--help"});
  EXPECT_EQ(r.rc, 0);
  EXPECT_NE(r.out.find("synth"), std::string::npos);
}
