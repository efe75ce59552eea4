#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "gece/cli.hpp"
#include "gece/io.hpp"
#include "gece/report.hpp"

namespace gece {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("gece_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  Json json(const std::string& name) const { return Json::parse(read_file(dir_ / name)); }

  fs::path dir_;
};

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"bogus"}).code, kExitUsage);
  EXPECT_EQ(run({"synth", "--generator", "two-point:10"}).code, kExitUsage);  // no seed
  EXPECT_EQ(run({"synth", "--generator", "nope:1", "--seed", "1"}).code, kExitUsage);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST_F(CliTest, DataErrors) {
  write_file(path("bad.jsonl"), "{\"label\": 0, \"probs\": [0.7, 0.2]}\n");
  const auto r = run({"eval", "--input", path("bad.jsonl"), "--out-dir", path("o")});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find(":1:"), std::string::npos) << r.err;
  EXPECT_EQ(run({"eval", "--input", path("missing.jsonl"), "--out-dir", path("o")}).code, kExitData);
}

TEST_F(CliTest, SynthEvalPipeline) {
  ASSERT_EQ(run({"synth", "--generator", "constant:0.8:0.6:2000", "--seed", "3", "--output", path("d.jsonl")}).code,
            kExitOk);
  const auto r = run({"eval", "--input", path("d.jsonl"), "--lens", "topk:1", "--binning", "uniform:15", "--out-dir",
                      path("o")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto doc = json("o/eval.json");
  EXPECT_NEAR(doc["value"].get<double>(), 0.2, 0.03);
  EXPECT_EQ(doc["config"]["lens"], "topk:1");
  EXPECT_TRUE(fs::exists(dir_ / "o" / "eval_bins.csv"));
  const auto bad = run({"eval", "--input", path("d.jsonl"), "--lens", "full", "--distance", "interval:0:0.5", "--out-dir", path("o")});
  EXPECT_EQ(bad.code, kExitUsage);
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence) {
  ASSERT_EQ(run({"synth", "--generator", "calibrated:1:3:300", "--seed", "4", "--output", path("d.csv")}).code, kExitOk);
  write_file(path("cfg.json"), "{\"lens\": \"topk:1\", \"binning\": \"uniform:15\", \"name\": \"fromcfg\"}");
  ASSERT_EQ(run({"eval", "--input", path("d.csv"), "--config", path("cfg.json"), "--lens", "full", "--out-dir",
                 path("o")})
                .code,
            kExitOk);
  const auto doc = json("o/fromcfg.json");
  EXPECT_EQ(doc["config"]["lens"], "full");
  EXPECT_EQ(doc["config"]["binning"], "uniform:15");
}

TEST_F(CliTest, StochasticCommandsAreDeterministic) {
  ASSERT_EQ(run({"synth", "--generator", "calibrated:1:3:400", "--seed", "5", "--output", path("a.jsonl")}).code, kExitOk);
  ASSERT_EQ(run({"synth", "--generator", "calibrated:1:3:400", "--seed", "5", "--output", path("b.jsonl")}).code, kExitOk);
  EXPECT_EQ(read_file(path("a.jsonl")), read_file(path("b.jsonl")));
  for (const char* out : {"s1", "s2"}) {
    ASSERT_EQ(run({"sweep", "--input", path("a.jsonl"), "--seed", "7", "--resamples", "10", "--out-dir", path(out)}).code,
              kExitOk);
    ASSERT_EQ(run({"profile", "--kind", "variance", "--input", path("a.jsonl"), "--seed", "7", "--resamples", "5",
                   "--out-dir", path(out)})
                  .code,
              kExitOk);
  }
  EXPECT_EQ(read_file(path("s1/sweep.json")), read_file(path("s2/sweep.json")));
  EXPECT_EQ(read_file(path("s1/sweep.csv")), read_file(path("s2/sweep.csv")));
  EXPECT_EQ(read_file(path("s1/profile_variance.json")), read_file(path("s2/profile_variance.json")));
  EXPECT_EQ(run({"sweep", "--input", path("a.jsonl"), "--out-dir", path("s3")}).code, kExitUsage);
}

TEST_F(CliTest, CalibrateAndApply) {
  ASSERT_EQ(run({"synth", "--generator", "sharpened:1:3:2000:2", "--seed", "8", "--output", path("val.jsonl")}).code,
            kExitOk);
  for (const char* method : {"ts", "bcts", "hb"}) {
    const std::string out = std::string("c_") + method;
    const auto r = run({"calibrate", "--validation", path("val.jsonl"), "--method", method, "--input", path("val.jsonl"),
                        "--out-dir", path(out)});
    ASSERT_EQ(r.code, kExitOk) << method << ": " << r.err;
    const auto report = json(out + "/fit_report.json");
    EXPECT_LE(report["final_nll"].get<double>(), report["initial_nll"].get<double>() + 1e-9);
    ASSERT_EQ(run({"apply", "--calibrator", path(out + "/calibrator.json"), "--input", path("val.jsonl"), "--output",
                   path(out + "/again.jsonl")})
                  .code,
              kExitOk);
    EXPECT_EQ(read_file(path(out + "/again.jsonl")), read_file(path(out + "/calibrated.jsonl")));
  }
  EXPECT_EQ(run({"calibrate", "--validation", path("val.jsonl"), "--method", "ts", "--require-logits", "--out-dir",
                 path("c_x")})
                .code,
            kExitData);
  EXPECT_EQ(run({"calibrate", "--validation", path("val.jsonl"), "--method", "magic", "--out-dir", path("c_y")}).code,
            kExitUsage);
}

TEST_F(CliTest, ProfilesAndReport) {
  ASSERT_EQ(run({"synth", "--generator", "calibrated:1:3:300", "--seed", "9", "--output", path("d.jsonl")}).code, kExitOk);
  write_file(path("groups.csv"), "0,0\n1,0\n2,1\n");
  for (const char* kind : {"confidence", "entropy", "topk-accuracy", "bin-stats"}) {
    EXPECT_EQ(run({"profile", "--kind", kind, "--input", path("d.jsonl"), "--out-dir", path("p")}).code, kExitOk) << kind;
  }
  EXPECT_EQ(run({"profile", "--kind", "group-confidence", "--input", path("d.jsonl"), "--group-map", path("groups.csv"),
                 "--group", "0", "--out-dir", path("p")})
                .code,
            kExitOk);
  for (int seed = 0; seed < 3; ++seed) {
    const std::string data = path("r" + std::to_string(seed) + ".jsonl");
    ASSERT_EQ(run({"synth", "--generator", "calibrated:1:3:200", "--seed", std::to_string(seed), "--output", data}).code,
              kExitOk);
    ASSERT_EQ(run({"eval", "--input", data, "--out-dir", path("runs"), "--name", "run" + std::to_string(seed)}).code,
              kExitOk);
  }
  const auto r = run({"report", "--inputs", path("runs/run0.json"), path("runs/run1.json"), path("runs/run2.json"),
                      "--out-dir", path("agg")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto doc = json("agg/report.json");
  EXPECT_EQ(doc["kind"], "aggregate");
  EXPECT_FALSE(doc["metrics"].empty());
}

TEST_F(CliTest, LikertCategories) {
  std::string rows;
  // Medium band: outputs 0.4, half positive. High band: outputs 0.9, all negative.
  for (int i = 0; i < 10; ++i) rows += "{\"label\": " + std::to_string(i % 2) + ", \"score\": 0.4}\n";
  for (int i = 0; i < 4; ++i) rows += "{\"label\": 0, \"score\": 0.9}\n";
  write_file(path("l.jsonl"), rows);
  const auto r = run({"eval", "--input", path("l.jsonl"), "--likert", "low:0:0.33,medium:0.33:0.66,high:0.66:1",
                      "--binning", "uniform:15", "--out-dir", path("o")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto doc = json("o/likert.json");
  const auto& cats = doc["categories"];
  ASSERT_EQ(cats.size(), 3u);
  EXPECT_EQ(cats[0]["count"], 0);
  EXPECT_EQ(cats[1]["count"], 10);
  EXPECT_EQ(cats[1]["interval_gece"].get<double>(), 0.0);
  EXPECT_NEAR(cats[1]["tvd_gece"].get<double>(), 0.1, 1e-12);
  EXPECT_NEAR(cats[2]["interval_gece"].get<double>(), 0.66, 1e-12);
}

}  // namespace
}  // namespace gece
