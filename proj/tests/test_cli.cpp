#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "tenet/cli.hpp"

using namespace tenet;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tenet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), {out, err});
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  os << text;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("tenet_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv("TENET_SEED");
  }
  void TearDown() override {
    fs::remove_all(dir_);
    unsetenv("TENET_SEED");
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  /// Two sources of generated household days in one day-series CSV.
  std::string day_data(std::size_t days = 160) const {
    auto a = generate_household_days(days, 1), b = generate_household_days(days, 2);
    for (auto& d : a) d.source = "house-a";
    for (auto& d : b) d.source = "house-b";
    a.insert(a.end(), b.begin(), b.end());
    std::ofstream os(path("days.csv"), std::ios::binary);
    write_day_series_csv(os, a);
    return path("days.csv").string();
  }

  std::string config(const std::string& extra = "", const std::string& shape = "n_f = 2\nd_f = 3\nn3 = 4\n") const {
    write_file(path("run.cfg"), shape + "epochs = 5\npatience = 5\nrepetitions = 2\nseed = 11\n" + extra);
    return path("run.cfg").string();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, HelpAndUsage) {
  EXPECT_EQ(run_cli({"--help"}).code, 0);
  EXPECT_EQ(run_cli({}).code, cli::kInputError);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kInputError);
  const Result h = run_cli({"train", "--help"});
  EXPECT_NE(h.out.find("--ablation-cnn"), std::string::npos);
}

TEST_F(CliTest, IngestMissingFile) {
  const Result r = run_cli({"ingest", "--format", "meter-csv", "--in", path("none.csv").string(), "--out",
                            path("o.csv").string()});
  EXPECT_EQ(r.code, cli::kInputError);
  EXPECT_NE(r.err.find("cannot open"), std::string::npos);
}

TEST_F(CliTest, IngestMeterCsv) {
  std::string text = "meter_id,timestamp,kwh\n";
  for (int d = 1; d <= 2; ++d)
    for (int i = 0; i < 48; ++i) {
      std::ostringstream row;
      row << "8,2013-02-0" << d << 'T' << (i / 2 < 10 ? "0" : "") << i / 2 << ':' << (i % 2 ? "30" : "00")
          << ":00,0.5\n";
      text += row.str();
    }
  text += "8,2013-02-03T00:00:00,0.5\n";  // a day with one reading is dropped
  write_file(path("m.csv"), text);
  const Result r = run_cli({"ingest", "--format", "meter-csv", "--in", path("m.csv").string(), "--out",
                            path("o.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("rows: 97"), std::string::npos);
  EXPECT_NE(r.out.find("days kept: 2"), std::string::npos);
  EXPECT_NE(r.out.find("days dropped: 1"), std::string::npos);
  std::ifstream in(path("o.csv"));
  const auto days = read_day_series_csv(in);
  ASSERT_EQ(days.size(), 2u);
  EXPECT_DOUBLE_EQ(sum(days[0].values), 24.0);
}

TEST_F(CliTest, IngestNamesBadLine) {
  write_file(path("m.csv"), "8,2013-02-01T00:00:00,0.5\n8,2013-02-01T00:30:00,abc\n");
  const Result r = run_cli({"ingest", "--format", "meter-csv", "--in", path("m.csv").string(), "--out",
                            path("o.csv").string()});
  EXPECT_EQ(r.code, cli::kInputError);
  EXPECT_NE(r.err.find("line 2"), std::string::npos);
}

TEST_F(CliTest, IngestStationaryUserWarns) {
  std::string text = "user,time,lat,lon\n";
  for (int h = 0; h < 24; ++h)
    text += "walker,2009-03-01T" + std::string(h < 10 ? "0" : "") + std::to_string(h) + ":00:00,39.9,116.4\n";
  write_file(path("t.csv"), text);
  const Result r = run_cli({"ingest", "--format", "traces", "--in", path("t.csv").string(), "--out",
                            path("o.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("every day is zero"), std::string::npos);
  EXPECT_NE(r.out.find("days kept: 1"), std::string::npos);
}

TEST_F(CliTest, TrainWritesArtifactsDeterministically) {
  const std::string data = day_data(), cfg = config();
  auto snapshot = [&] {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(path("a")))
      if (e.is_regular_file()) files[fs::relative(e.path(), path("a")).string()] = slurp(e.path());
    return files;
  };
  const Result a = run_cli({"train", "--config", cfg, "--data", data, "--out", path("a").string()});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto first = snapshot();
  fs::remove_all(path("a"));
  const Result b = run_cli({"train", "--config", cfg, "--data", data, "--out", path("a").string()});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(first, snapshot());
  // report, config copy, and model/snippet/trace per source and repetition
  EXPECT_EQ(first.size(), 2u + 3u * 2u * 2u);
  EXPECT_TRUE(fs::exists(path("a") / "models" / "house-a.rep2.model"));
  const std::string report = first.at("report.csv");
  EXPECT_NE(report.find("house-b/rep1,"), std::string::npos);
  EXPECT_NE(report.find("te_mode=trainable"), std::string::npos);
}

TEST_F(CliTest, AblationFlagRecordedInReport) {
  const Result r =
      run_cli({"eval", "--config", config(), "--data", day_data(), "--out", path("o").string(), "--ablation-cnn"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(slurp(path("o") / "report.csv").find("te_mode=frozen_identity"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("o") / "models"));
}

TEST_F(CliTest, EvalWithCnnAddsRows) {
  const Result r =
      run_cli({"eval", "--config", config("source = house-a\n"), "--data", day_data(), "--out", path("o").string(),
               "--with-cnn"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string report = slurp(path("o") / "report.csv");
  EXPECT_NE(report.find("\nhouse-a/cnn,"), std::string::npos);
  EXPECT_EQ(report.find("house-b"), std::string::npos);
}

TEST_F(CliTest, SeedOverrideFromEnvironment) {
  const std::string data = day_data(), cfg = config();
  ASSERT_EQ(run_cli({"eval", "--config", cfg, "--data", data, "--out", path("a").string()}).code, 0);
  setenv("TENET_SEED", "12345", 1);
  const Result r = run_cli({"eval", "--config", cfg, "--data", data, "--out", path("b").string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("seed 12345 from TENET_SEED"), std::string::npos);
  EXPECT_NE(slurp(path("b") / "report.csv").find("seed=12345"), std::string::npos);
  EXPECT_NE(slurp(path("a") / "report.csv"), slurp(path("b") / "report.csv"));
  setenv("TENET_SEED", "soon", 1);
  EXPECT_EQ(run_cli({"eval", "--config", cfg, "--data", data, "--out", path("c").string()}).code,
            cli::kConfigError);
}

TEST_F(CliTest, ConfigErrors) {
  const std::string data = day_data();
  EXPECT_EQ(run_cli({"train", "--config", config("widgets = 3\n"), "--data", data, "--out", path("o").string()}).code,
            cli::kConfigError);
  EXPECT_EQ(run_cli({"train", "--config", config("lambda = 0.1, 0.01\n"), "--data", data, "--out",
                     path("o").string()})
                .code,
            cli::kConfigError);
  EXPECT_EQ(run_cli({"train", "--config", path("missing.cfg").string(), "--data", data, "--out", path("o").string()})
                .code,
            cli::kConfigError);
  EXPECT_EQ(run_cli({"train", "--config", config()}).code, cli::kConfigError);
}

TEST_F(CliTest, DivergenceIsNumericError) {
  const Result r = run_cli({"train", "--config", config("learning_rate = 1e200\ntarget_scale = none\n"), "--data",
                            day_data(), "--out", path("o").string()});
  EXPECT_EQ(r.code, cli::kNumericError);
}

TEST_F(CliTest, TooFewDaysIsInputError) {
  const Result r = run_cli({"train", "--config", config(), "--data", day_data(40), "--out", path("o").string()});
  EXPECT_EQ(r.code, cli::kInputError);
  EXPECT_NE(r.err.find("skipping source 'house-a'"), std::string::npos);
}

TEST_F(CliTest, GridSearchWritesCandidates) {
  const std::string cfg =
      config("source = house-a\n", "d_te = 1\nn_f = 2, 3\nd_f = 3\nn3 = 4\nlambda = 0.01\nlearning_rate = 0.01\n");
  const Result r = run_cli({"gridsearch", "--config", cfg, "--data", day_data(), "--out", path("g").string(),
                            "--jobs", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string cands = slurp(path("g") / "candidates_house-a.csv");
  EXPECT_EQ(std::count(cands.begin(), cands.end(), '\n'), 3);
  EXPECT_TRUE(fs::exists(path("g") / "best_house-a.txt"));
  EXPECT_NE(r.out.find("house-a: best"), std::string::npos);
  const Result again = run_cli({"gridsearch", "--config", cfg, "--data", day_data(), "--out", path("h").string()});
  ASSERT_EQ(again.code, 0);
  EXPECT_EQ(slurp(path("g") / "report.csv"), slurp(path("h") / "report.csv"));
  EXPECT_EQ(cands, slurp(path("h") / "candidates_house-a.csv"));
}

TEST_F(CliTest, GradcheckPasses) {
  const Result r = run_cli({"gradcheck", "--seeds", "5"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("max relative error"), std::string::npos);
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  const Result strict = run_cli({"gradcheck", "--seeds", "2", "--tolerance", "1e-30"});
  EXPECT_EQ(strict.code, cli::kNumericError);
  EXPECT_NE(strict.out.find("FAIL"), std::string::npos);
}

TEST_F(CliTest, CasestudyDefaultAndFiles) {
  const Result r = run_cli({"casestudy", "--csv", path("t.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("v^s,u^s"), std::string::npos);
  EXPECT_NE(r.out.find("<0.50,1.00,2.33,2.33,1.67,0.50>"), std::string::npos);
  EXPECT_EQ(slurp(path("t.csv")).rfind("pair,distance,intersection,pearson\n", 0), 0u);
  write_file(path("v.txt"), "1 2 3\n");
  write_file(path("u.txt"), "1,2\n");
  EXPECT_EQ(run_cli({"casestudy", "--v", path("v.txt").string(), "--u", path("u.txt").string()}).code,
            cli::kInputError);
}

TEST_F(CliTest, SynthClusterFindsTenExemplars) {
  const Result r = run_cli({"synth", "--cluster", "--out", path("s").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("points: 300"), std::string::npos);
  EXPECT_NE(r.out.find("exemplars: 10"), std::string::npos);
  const std::string samples = slurp(path("s") / "samples.csv");
  EXPECT_EQ(std::count(samples.begin(), samples.end(), '\n'), 301);
  EXPECT_NE(slurp(path("s") / "manifest.txt").find("exemplar.9 = "), std::string::npos);
  const Result again = run_cli({"synth", "--exemplars", (path("s") / "exemplars.csv").string(), "--out",
                                path("t").string()});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(samples, slurp(path("t") / "samples.csv"));
}

TEST_F(CliTest, SynthArgumentErrors) {
  EXPECT_EQ(run_cli({"synth", "--out", path("s").string()}).code, cli::kConfigError);
  EXPECT_EQ(run_cli({"synth", "--cluster", "--ops", "0", "--out", path("s").string()}).code, cli::kConfigError);
  EXPECT_EQ(run_cli({"synth", "--cluster", "--generate", "40", "--d-prime", "60", "--out", path("s").string()}).code,
            cli::kConfigError);
}
