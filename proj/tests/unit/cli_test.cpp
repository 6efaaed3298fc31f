#include <gtest/gtest.h>

#include <json.hpp>
#include <sstream>

#include "paraeval/benchmark_io.hpp"
#include "paraeval/cli.hpp"
#include "synthetic.hpp"
#include "temp_dir.hpp"

using namespace paraeval;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    bench_ = dir_.file("bench.jsonl");
    save_benchmark(synthetic::benchmark({.inputs = 30, .candidates_per_input = 5}), bench_);
  }

  TempDir dir_;
  std::string bench_;
};

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_F(CliTest, ScorePrintsOneRowPerInstance) {
  const auto r = run({"score", "--benchmark", bench_, "--metric", "rougeL"});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(count_lines(r.out), 151u);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "index,rougeL,human");
}

TEST_F(CliTest, EvaluateWritesReportAndManifest) {
  const auto out = dir_.file("eval.csv");
  const auto r = run({"evaluate", "--benchmark", bench_, "--metric", "bleu4,parascore-free", "--out", out});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.err.find("untuned"), std::string::npos);
  const auto report = slurp(out);
  EXPECT_EQ(report.substr(0, report.find("\r\n")), "metric,segment,pearson,spearman,n,value");
  EXPECT_NE(report.find("parascore-free,all,"), std::string::npos);

  const auto manifest = nlohmann::json::parse(slurp(out + ".manifest.json"));
  EXPECT_EQ(manifest["command"], "evaluate");
  EXPECT_EQ(manifest["inputs"]["benchmark"]["sha256"], cli::sha256_file(bench_));
  EXPECT_EQ(manifest["config"]["metrics"].size(), 2u);
  EXPECT_FALSE(manifest["config"].contains("jobs"));

  // identical reruns give identical bytes
  const auto again = dir_.file("eval2.csv");
  ASSERT_EQ(run({"evaluate", "--benchmark", bench_, "--metric", "bleu4,parascore-free", "--out", again,
                 "--jobs", "3"})
                .code,
            cli::kOk);
  EXPECT_EQ(slurp(again), report);
}

TEST_F(CliTest, AnalyzeSubcommands) {
  auto r = run({"analyze", "cases", "--benchmark", bench_, "--metric", "rouge1", "--format", "jsonl"});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("\"metric\":\"proportion\""), std::string::npos);
  r = run({"analyze", "distance-groups", "--benchmark", bench_, "--metric", "bertscore"});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(count_lines(r.out), 5u);
  r = run({"analyze", "attribution", "--benchmark", bench_, "--subset", "s-div"});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("s-div2"), std::string::npos);
  r = run({"analyze", "attribution", "--benchmark", bench_, "--base", "--quantity", "delta-m", "--metric", "bleu4"});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("delta_m:bleu4,base"), std::string::npos);
}

TEST_F(CliTest, TuneAndExtend) {
  auto r = run({"tune", "--benchmark", bench_, "--mode", "free", "--grid", "0:0.2:0.05"});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("parascore-free,test"), std::string::npos);
  const auto extended = dir_.file("ext.jsonl");
  r = run({"extend", "--benchmark", bench_, "--out", extended});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(count_lines(slurp(extended)), 156u);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({}).code, cli::kUsageError);
  EXPECT_EQ(run({"--help"}).code, cli::kOk);
  EXPECT_EQ(run({"score", "--benchmark", bench_, "--metric", "meteor"}).code, cli::kUsageError);
  EXPECT_EQ(run({"score", "--benchmark", bench_, "--metric", "ned", "--bogus"}).code, cli::kUsageError);
  EXPECT_EQ(run({"tune", "--benchmark", bench_, "--grid", "0.5:0.1:0.1"}).code, cli::kUsageError);
  EXPECT_EQ(run({"score", "--benchmark", dir_.file("missing.jsonl"), "--metric", "ned"}).code, cli::kDataError);

  const auto bad = dir_.write("bad.jsonl", "{\"input\":\"a\",\"candidate\":\"b\",\"score\":3}\n");
  const auto r = run({"score", "--benchmark", bad, "--metric", "ned"});
  EXPECT_EQ(r.code, cli::kDataError);
  EXPECT_NE(r.err.find("line 1"), std::string::npos);

  const auto flat = dir_.write("flat.jsonl",
                               "{\"input\":\"a b\",\"candidate\":\"b a\",\"score\":0.5}\n"
                               "{\"input\":\"a b\",\"candidate\":\"a c\",\"score\":0.5}\n"
                               "{\"input\":\"c d\",\"candidate\":\"d c\",\"score\":0.5}\n");
  EXPECT_EQ(run({"evaluate", "--benchmark", flat, "--metric", "ned"}).code, cli::kDataError);

  EXPECT_EQ(run({"score", "--benchmark", bench_, "--metric", "bertscore", "--backend",
                 "file:" + dir_.file("no-embeddings.txt")})
                .code,
            cli::kProviderError);
}

TEST(Sha256, KnownDigest) {
  TempDir dir;
  EXPECT_EQ(cli::sha256_file(dir.write("abc", "abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
