#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fcd/report.hpp"
#include "fcd/stalemate.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kTool = FCDTOOL_PATH;
const fs::path kFixtures = FCD_FIXTURE_DIR;

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = kTool.string() + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string f(const std::string& name) { return (kFixtures / name).string(); }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fcdtool_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string d(const std::string& sub) const { return (dir_ / sub).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, MetricsIdenticalFiles) {
  const auto r = run("metrics --pred " + f("above_square.xyz") + " --gt " + f("above_square.xyz"));
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  for (const char* k : {"cd_l1", "cd_l2", "dcd", "emd", "hausdorff"}) EXPECT_EQ(j[k].get<double>(), 0.0) << k;
  EXPECT_EQ(j["fscore"].get<double>(), 1.0);
  EXPECT_TRUE(j["p2f"].is_null());
}

TEST_F(CliTest, MetricsStalemateFixture) {
  const auto r = run("metrics --pred " + f("stalemate_pred.xyz") + " --gt " + f("stalemate_gt.xyz") + " --csv " +
                     d("m.csv"));
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["cd_l1"].get<double>(), 1.25);
  EXPECT_EQ(j["cd_l2"].get<double>(), 5.25);
  EXPECT_EQ(slurp(d("m.csv")).substr(0, fcd::MetricReport::csv_header().size()), fcd::MetricReport::csv_header());
}

TEST_F(CliTest, MetricsMeshAndFidelity) {
  const auto r = run("metrics --pred " + f("above_square.xyz") + " --gt " + f("square.ply") + " --mesh " +
                     f("square.ply") + " --input " + f("above_square.xyz"));
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["p2f"].get<double>(), 0.5);
  EXPECT_EQ(j["fidelity"].get<double>(), 0.0);
  EXPECT_TRUE(j["emd"].is_null());  // 3 vs 4 points
  const auto approx = run("metrics --emd-approx --pred " + f("above_square.xyz") + " --gt " + f("square.ply"));
  EXPECT_TRUE(nlohmann::json::parse(approx.out)["emd"].is_number());
}

TEST_F(CliTest, MetricsErrors) {
  EXPECT_EQ(run("metrics --pred " + f("nope.xyz") + " --gt " + f("stalemate_gt.xyz")).code, 2);
  EXPECT_EQ(run("metrics --pred " + f("ragged.xyz") + " --gt " + f("stalemate_gt.xyz")).code, 2);
  const std::string cmd = kTool.string() + " metrics --pred " + f("stalemate_pred.xyz") + " --gt " +
                          f("above_square.xyz") + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  char buf[512] = {};
  const std::size_t n = fread(buf, 1, sizeof(buf) - 1, pipe);
  const int status = pclose(pipe);
  EXPECT_EQ(WEXITSTATUS(status), 3);
  EXPECT_NE(std::string(buf, n).find("cd_l1"), std::string::npos);
  EXPECT_EQ(run("metrics --pred " + f("above_square.xyz") + " --gt " + f("above_square.xyz") + " --mesh " +
                f("nope.ply")).code, 2);
  EXPECT_EQ(run("metrics --bogus").code, 3);
}

TEST_F(CliTest, ScheduleRows) {
  const auto st = run("schedule --kind static");
  ASSERT_EQ(st.code, 0);
  std::istringstream in(st.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "epoch,alpha,beta");
  int rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(line, std::to_string(rows) + ",1,2");
    ++rows;
  }
  EXPECT_EQ(rows, 401);

  const auto stair = run("schedule --kind stair --t 200");
  EXPECT_NE(stair.out.find("\n199,1,2\n200,1,1\n"), std::string::npos);
  const auto ex = run("schedule --kind exponential --sigma 200");
  EXPECT_NE(ex.out.find("\n0,1,2\n"), std::string::npos);
  EXPECT_NE(ex.out.find("\n200,1,1.367879441171"), std::string::npos);
  EXPECT_EQ(run("schedule --kind stair --t 0").code, 3);
  EXPECT_EQ(run("schedule --kind nope").code, 3);
}

TEST_F(CliTest, ScheduleFileAndFlagPrecedence) {
  std::ofstream(d("s.kv")) << "kind=linear\ntheta=3\nT=10\nt=5\n";
  const auto r = run("schedule --schedule-file " + d("s.kv") + " --tau 2");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\n0,2,3\n"), std::string::npos);
  EXPECT_NE(r.out.find("\n10,2,2\n"), std::string::npos);
  std::ofstream(d("s.json")) << R"({"kind": "stair", "t": 3, "T": 6})";
  const auto j = run("schedule --schedule-file " + d("s.json") + " --format kv");
  EXPECT_EQ(j.out, "kind=stair\ntheta=2\ntau=1\nt=3\nT=6\nsigma=200\n");
  EXPECT_EQ(run("schedule --schedule-file " + d("missing.kv")).code, 2);
}

TEST_F(CliTest, SweepMatchesLibrary) {
  const auto r = run("sweep");
  ASSERT_EQ(r.code, 0);
  const auto c = fcd::SweepConfig::defaults();
  EXPECT_EQ(r.out, fcd::sweep_csv(c, fcd::sweep(c)));
  EXPECT_EQ(run("sweep --from 3 --to 1").code, 3);
  EXPECT_EQ(run("sweep --from 0.1 --to 1").code, 3);
}

TEST_F(CliTest, OptimizeWritesArtifactsAndReplays) {
  const std::string args = "optimize --benchmark clustered-grid --objective fcd --schedule linear --steps 200";
  ASSERT_EQ(run(args + " --out-dir " + d("a")).code, 0);
  ASSERT_EQ(run(args + " --out-dir " + d("b")).code, 0);
  for (const char* name : {"final.xyz", "trace.csv", "manifest.json", "summary.json"}) {
    ASSERT_TRUE(fs::exists(dir_ / "a" / name)) << name;
    EXPECT_EQ(slurp(dir_ / "a" / name), slurp(dir_ / "b" / name)) << name;
  }
  const auto m = nlohmann::json::parse(slurp(dir_ / "a" / "manifest.json"));
  EXPECT_EQ(m["command"], "optimize");
  EXPECT_EQ(m["seed"], 42);
  ASSERT_EQ(run("replay " + d("a/manifest.json") + " --out-dir " + d("c")).code, 0);
  for (const char* name : {"final.xyz", "trace.csv", "manifest.json", "summary.json"})
    EXPECT_EQ(slurp(dir_ / "a" / name), slurp(dir_ / "c" / name)) << name;
}

TEST_F(CliTest, OptimizeFromFilesRecordsDigests) {
  const std::string args = "optimize --init " + f("stalemate_pred.xyz") + " --target " + f("stalemate_gt.xyz") +
                           " --pin 0 --steps 3000 --step-size 0.001 --order 2 --out-dir " + d("o");
  ASSERT_EQ(run(args).code, 0);
  const auto m = nlohmann::json::parse(slurp(dir_ / "o" / "manifest.json"));
  EXPECT_EQ(m["inputs"].size(), 2u);
  EXPECT_EQ(m["inputs"][f("stalemate_pred.xyz")].get<std::string>().rfind("fnv1a64:", 0), 0u);
  EXPECT_EQ(slurp(dir_ / "o" / "final.xyz").substr(0, 6), "0.5 0\n");
}

TEST_F(CliTest, OptimizeHierarchical) {
  const auto r = run("optimize --benchmark clustered-grid --coarse-count 16 --children 4 --steps 100 --out-dir " +
                     d("h"));
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "h" / "coarse.xyz"));
}

TEST_F(CliTest, OptimizeErrors) {
  EXPECT_EQ(run("optimize --benchmark clustered-grid --steps 20 --step-size 1e3 --objective cd-l2").code, 4);
  EXPECT_EQ(run("optimize --benchmark clustered-grid --steps 0").code, 3);
  EXPECT_EQ(run("optimize --init " + f("nope.xyz") + " --target " + f("stalemate_gt.xyz")).code, 2);
  EXPECT_EQ(run("optimize --init " + f("stalemate_pred.xyz") + " --target " + f("above_square.xyz")).code, 3);
  EXPECT_EQ(run("optimize --benchmark clustered-grid --objective cd-l2 --schedule linear").code, 3);
}

TEST_F(CliTest, JsonConfigWithFlagOverride) {
  std::ofstream(d("c.json")) << R"({"optimize": {"benchmark": "clustered-grid", "steps": 40, "record-every": 5}})";
  ASSERT_EQ(run("--config " + d("c.json") + " optimize --steps 20 --out-dir " + d("o")).code, 0);
  const auto trace = slurp(dir_ / "o" / "trace.csv");
  EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 1 + 4 + 1);  // header, steps 0..15, final
  EXPECT_EQ(run("--config " + d("missing.json") + " optimize").code, 2);
  std::ofstream(d("bad.json")) << "{not json";
  EXPECT_EQ(run("--config " + d("bad.json") + " optimize").code, 3);
}

TEST_F(CliTest, BatchMatchesSingleRunsAndIsOrderStable) {
  const auto one = run("batch --dir " + f("batch") + " --parallelism 1");
  const auto eight = run("batch --dir " + f("batch") + " --parallelism 8");
  ASSERT_EQ(one.code, 0);
  EXPECT_EQ(one.out, eight.out);
  std::istringstream in(one.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "name," + fcd::MetricReport::csv_header());
  int rows = 0;
  for (const char* name : {"a.xyz", "b.xyz", "c.xyz"}) {
    ASSERT_TRUE(std::getline(in, line));
    const auto single = nlohmann::json::parse(
        run("metrics --pred " + f("batch/pred/") + name + " --gt " + f("batch/gt/") + name).out);
    fcd::MetricReport rep;
    auto get = [&](const char* k) -> std::optional<double> {
      return single[k].is_null() ? std::nullopt : std::optional<double>(single[k].get<double>());
    };
    rep.cd_l1 = get("cd_l1");
    rep.cd_l2 = get("cd_l2");
    rep.dcd = get("dcd");
    rep.emd = get("emd");
    rep.fscore = get("fscore");
    rep.hausdorff = get("hausdorff");
    EXPECT_EQ(line, std::string(name) + "," + rep.csv_row());
    ++rows;
  }
  EXPECT_FALSE(std::getline(in, line));
  EXPECT_EQ(rows, 3);
  const auto glob = run("batch --dir " + f("batch") + " --glob 'b*'");
  EXPECT_EQ(std::count(glob.out.begin(), glob.out.end(), '\n'), 2);
}

TEST_F(CliTest, BatchEmptyAndMissingDirectories) {
  const auto r = run("batch --dir " + dir_.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "name," + fcd::MetricReport::csv_header() + "\n");
  EXPECT_EQ(run("batch --dir " + d("absent")).code, 2);
}

TEST_F(CliTest, AmbiguityOutputs) {
  ASSERT_EQ(run("ambiguity --n 64 --seed 42 --out-dir " + d("amb")).code, 0);
  const auto rep = nlohmann::json::parse(slurp(dir_ / "amb" / "report.json"));
  EXPECT_GT(rep["dcd_clustered"].get<double>(), rep["dcd_uniform"].get<double>());
  for (const char* name : {"clustered.xyz", "uniform.xyz", "reference.xyz", "manifest.json"})
    EXPECT_TRUE(fs::exists(dir_ / "amb" / name)) << name;
  EXPECT_EQ(run("ambiguity --n 7").code, 3);
}

TEST_F(CliTest, ReplayRejectsChangedInputs) {
  fs::copy_file(kFixtures / "stalemate_pred.xyz", dir_ / "p.xyz");
  ASSERT_EQ(run("metrics --pred " + d("p.xyz") + " --gt " + f("stalemate_gt.xyz") + " --out-dir " + d("m")).code, 0);
  ASSERT_EQ(run("replay " + d("m/manifest.json")).code, 0);
  std::ofstream(dir_ / "p.xyz", std::ios::app) << "2 0\n";
  EXPECT_EQ(run("replay " + d("m/manifest.json")).code, 3);
  EXPECT_EQ(run("replay " + d("nope.json")).code, 2);
}
