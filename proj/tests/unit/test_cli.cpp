#include <gtest/gtest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "hpcfe/cli.hpp"
#include "hpcfe/io.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using hpcfe::io::read_file;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "hpcfe");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return hpcfe::cli::run(static_cast<int>(argv.size()), argv.data());
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::path(HPCFE_TEST_TMP) / ::testing::UnitTest::GetInstance()->current_test_info()->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  std::string p(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run({}), 1);
  EXPECT_EQ(run({"frobnicate"}), 1);
  EXPECT_EQ(run({"uq", "run", "--bench", "nope"}), 1);
  EXPECT_EQ(run({"--help"}), 0);
}

TEST_F(Cli, MissingInputExitsOne) {
  EXPECT_EQ(run({"fit", "--data", p("missing.csv"), "--out", p("m.json")}), 1);
  EXPECT_FALSE(fs::exists(p("m.json")));
}

TEST_F(Cli, MalformedCsvExitsOne) {
  hpcfe::io::write_file_atomic(p("bad.csv"), "x1,y,level\n0.1,oops,1\n");
  EXPECT_EQ(run({"fit", "--data", p("bad.csv"), "--out", p("m.json")}), 1);
}

TEST_F(Cli, UnknownConfigKeyExitsOne) {
  hpcfe::io::write_file_atomic(p("cfg.json"), R"({"countz": [10, 4]})");
  EXPECT_EQ(run({"uq", "run", "--bench", "pedagogical", "--config", p("cfg.json"), "--out-dir", p("out")}), 1);
}

TEST_F(Cli, DuplicateInputsWithoutNuggetExitTwo) {
  hpcfe::io::write_file_atomic(p("dup.csv"), "x1,y,level\n0,0,1\n0.5,1,1\n0.5,1,1\n0.7,2,1\n1,0.5,1\n");
  hpcfe::io::write_file_atomic(p("cfg.json"), R"({"levels": [{"kernel": {"nugget": 0.0}}]})");
  EXPECT_EQ(run({"fit", "--data", p("dup.csv"), "--config", p("cfg.json"), "--out", p("m.json")}), 2);
}

TEST_F(Cli, FitPredictInterpolatesTrainingPoint) {
  std::string csv = "x1,y,level\n";
  for (int i = 0; i < 20; ++i) {
    const double x = i / 19.0;
    csv += hpcfe::io::format_double(x) + "," + hpcfe::io::format_double(std::sin(8 * M_PI * x)) + ",1\n";
  }
  hpcfe::io::write_file_atomic(p("train.csv"), csv);
  // The default nugget regularises; noise-free data is fitted without one.
  hpcfe::io::write_file_atomic(p("fit.json"), R"({"levels": [{"kernel": {"nugget": 0}}]})");
  ASSERT_EQ(run({"fit", "--data", p("train.csv"), "--out", p("m.json"), "--config", p("fit.json")}), 0);
  EXPECT_EQ(nlohmann::json::parse(read_file(p("m.json")))["format"], "hpcfe-model");
  EXPECT_TRUE(fs::exists(p("m.json.manifest.json")));
  const double x7 = 7 / 19.0;
  hpcfe::io::write_file_atomic(p("q.csv"), "x1\n" + hpcfe::io::format_double(x7) + "\n");
  ASSERT_EQ(run({"predict", "--model", p("m.json"), "--query", p("q.csv"), "--out", p("pred.csv")}), 0);
  const auto doc = hpcfe::io::parse_csv(read_file(p("pred.csv")), "pred.csv");
  ASSERT_EQ(doc.header, (std::vector<std::string>{"x1", "mean", "variance"}));
  EXPECT_NEAR(std::stod(doc.rows[0].fields[1]), std::sin(8 * M_PI * x7), 1e-6);
}

TEST_F(Cli, FitMultiLevelWritesCascade) {
  std::string csv = "x1,y,level\n";
  for (int i = 0; i < 12; ++i) csv += hpcfe::io::format_double(i / 11.0) + "," + hpcfe::io::format_double(i * 0.1) + ",1\n";
  for (int i = 0; i < 12; i += 3) csv += hpcfe::io::format_double(i / 11.0) + "," + hpcfe::io::format_double(i * 0.12) + ",2\n";
  hpcfe::io::write_file_atomic(p("mf.csv"), csv);
  ASSERT_EQ(run({"fit", "--data", p("mf.csv"), "--out", p("c.json"), "--degree", "2"}), 0);
  const auto j = nlohmann::json::parse(read_file(p("c.json")));
  EXPECT_EQ(j["format"], "hpcfe-cascade");
  EXPECT_EQ(j["stages"].size(), 2u);
}

TEST_F(Cli, UqRunIsByteDeterministicAndManifested) {
  ASSERT_EQ(run({"uq", "run", "--bench", "pedagogical", "--seed", "7", "--out-dir", p("a")}), 0);
  ASSERT_EQ(run({"uq", "run", "--bench", "pedagogical", "--seed", "7", "--out-dir", p("b")}), 0);
  for (const char* f : {"metrics.csv", "evaluation.csv", "kde.csv", "training.csv", "model.json", "report.json"})
    EXPECT_EQ(read_file(p(std::string("a/") + f)), read_file(p(std::string("b/") + f))) << f;
  const auto manifest = nlohmann::json::parse(read_file(p("a/manifest.json")));
  EXPECT_EQ(manifest["seeds"]["design"], 7);
  EXPECT_EQ(manifest["artifacts"]["metrics.csv"], hpcfe::io::sha256_hex(read_file(p("a/metrics.csv"))));
  EXPECT_EQ(manifest["config"]["bench"], "pedagogical");
  const auto metrics = hpcfe::io::parse_csv(read_file(p("a/metrics.csv")), "metrics.csv");
  EXPECT_EQ(metrics.header, (std::vector<std::string>{"model", "rmse", "ks_distance", "mean_abs_error"}));
  EXPECT_EQ(metrics.rows.size(), 3u);
}

TEST_F(Cli, PlotDataFlattensCurves) {
  ASSERT_EQ(run({"uq", "run", "--bench", "pedagogical", "--seed", "1", "--out-dir", p("u")}), 0);
  ASSERT_EQ(run({"plot-data", "--report", p("u/report.json"), "--out", p("tidy.csv")}), 0);
  const auto doc = hpcfe::io::parse_csv(read_file(p("tidy.csv")), "tidy.csv");
  EXPECT_EQ(doc.header, (std::vector<std::string>{"curve", "x", "y"}));
  EXPECT_GT(doc.rows.size(), 1000u);
  hpcfe::io::write_file_atomic(p("empty.json"), "{}");
  EXPECT_EQ(run({"plot-data", "--report", p("empty.json"), "--out", p("t2.csv")}), 1);
}

TEST_F(Cli, TwinSimulateAndTrackMassScenario) {
  ASSERT_EQ(run({"twin", "simulate", "--quantity", "mass", "--domain", "time", "--hf-points", "12", "--out-dir",
                 p("sim")}),
            0);
  ASSERT_EQ(run({"twin", "track", "--measurements", p("sim/measurements.csv"), "--quantity", "mass", "--out-dir",
                 p("trk")}),
            0);
  const auto report = nlohmann::json::parse(read_file(p("trk/report.json")));
  EXPECT_LT(report["rmse_vs_schedule"]["multi_fidelity"].get<double>(),
            report["rmse_vs_schedule"]["single_fidelity"].get<double>());
  EXPECT_EQ(report["dropped_count"], 0);
  EXPECT_TRUE(report["updated"]["mass"].get<double>() > 0.0);
  for (const char* f : {"evolution.csv", "estimates.csv", "model.json", "manifest.json"})
    EXPECT_TRUE(fs::exists(p(std::string("trk/") + f))) << f;
}

TEST_F(Cli, TwinTrackNeedsQuantity) {
  ASSERT_EQ(run({"twin", "simulate", "--hf-points", "4", "--out-dir", p("sim")}), 0);
  EXPECT_EQ(run({"twin", "track", "--measurements", p("sim/measurements.csv"), "--out-dir", p("trk")}), 1);
}
