#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "bqlab/experiments.hpp"

using namespace bqlab;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({"schema_version": 1, "experiment": "t", "kind": "validate",
  "problem": {"n": 1, "lambda": 4, "p": 5, "q": 1, "s": 0}})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool has_check(const RunResult& r, const std::string& name, bool pass) {
  for (const auto& v : r.verdicts)
    if (v.check == name) return v.pass == pass;
  return false;
}

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  const auto c = parse_config(kMinimal);
  EXPECT_EQ(c.kind, "validate");
  EXPECT_EQ(c.threads, 1u);
  EXPECT_EQ(c.grid.N, 8192u);
  EXPECT_DOUBLE_EQ(c.tol.slope_rel, 0.15);

  const auto o = parse_config(kMinimal, {"threads=3", "grid.N=512", "strichartz.gamma=inf", "experiment=renamed"});
  EXPECT_EQ(o.threads, 3u);
  EXPECT_EQ(o.grid.N, 512u);
  EXPECT_TRUE(std::isinf(o.strichartz.gamma));
  EXPECT_EQ(o.experiment, "renamed");
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config(R"({"schema_version": 2})"), std::invalid_argument);
  EXPECT_THROW(parse_config(kMinimal, {"noequals"}), std::invalid_argument);
  EXPECT_THROW(parse_config(kMinimal, {"strichartz.gamma=\"big\""}), std::invalid_argument);
  EXPECT_THROW(run_experiment(parse_config(kMinimal, {"kind=nonsense"})), std::invalid_argument);
}

TEST(Config, CanonicalFormRoundTripsAndHashes) {
  const auto c = parse_config(kMinimal);
  const std::string canon = canonical_json(c);
  EXPECT_EQ(canonical_json(parse_config(canon)), canon);
  EXPECT_EQ(config_hash(parse_config(canon)), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 16u);
  EXPECT_NE(config_hash(parse_config(kMinimal, {"grid.L=2048"})), config_hash(c));
}

TEST(Config, ShippedConfigsParse) {
  for (const auto& e : fs::directory_iterator(fs::path(BQLAB_SOURCE_DIR) / "configs")) {
    if (e.path().extension() != ".json") continue;
    const auto c = load_config(e.path());
    EXPECT_EQ(c.schema_version, kSchemaVersion) << e.path();
    EXPECT_NO_THROW(validate(c.solver)) << e.path();
  }
}

TEST(Csv, ShortestDigitsAndSpecialValues) {
  const SeriesTable t{"x", {"a", "b", "c"}, {{0.1, 1e-300, 2.0}, {NAN, INFINITY, -INFINITY}}};
  EXPECT_EQ(render_csv(t), "a,b,c\n0.1,1e-300,2\nnan,inf,-inf\n");
  const SeriesTable bad{"y", {"a"}, {{1.0, 2.0}}};
  EXPECT_THROW(render_csv(bad), std::logic_error);
}

TEST(Suites, ValidateReportsThreshold) {
  const auto ok = run_experiment(parse_config(kMinimal));
  EXPECT_TRUE(ok.all_pass());
  EXPECT_DOUBLE_EQ(ok.summary.at("alpha"), 0.3);
  EXPECT_NEAR(ok.summary.at("alpha_lambda"), 1.2, 1e-15);

  const auto low = run_experiment(parse_config(kMinimal, {"problem.lambda=3", "problem.p=4"}));
  EXPECT_FALSE(low.all_pass());
  EXPECT_TRUE(has_check(low, "hypotheses", false));
}

TEST(Suites, EstimatesRefuseViolatedRelations) {
  const auto c = parse_config(kMinimal, {"kind=estimates", "estimates.kinds=[\"bilinear_s_nonneg\"]",
                                         "estimates.bilinear_s_nonneg.p1=3"});
  const auto r = run_experiment(c);
  EXPECT_FALSE(r.all_pass());
  ASSERT_FALSE(r.hypotheses.empty());
  for (const auto& v : r.hypotheses) EXPECT_EQ(v.clause.rfind("bilinear_s_nonneg:", 0), 0u) << v.clause;
  EXPECT_TRUE(has_check(r, "constraints", false));
  EXPECT_TRUE(r.tables.empty());
}

TEST(Suites, SimulateZeroDataIsZero) {
  const auto c = parse_config(kMinimal, {"kind=simulate", "grid.L=32", "grid.N=128", "solver.T=1", "solver.M=10",
                                         "solver.sample_every=1", "solver.dt_ref=0.05", "data.u0.kind=\"zero\"",
                                         "data.v0.kind=\"zero\""});
  const auto r = run_experiment(c);
  EXPECT_TRUE(has_check(r, "picard_converged", true));
  EXPECT_DOUBLE_EQ(r.summary.at("final_norm"), 0.0);
}

TEST(Outputs, WritesTablesVerdictAndManifest) {
  const auto c = parse_config(kMinimal);
  RunResult r = run_experiment(c);
  r.tables.push_back({"demo", {"t", "y"}, {{0.0, 1.0}, {0.5, 0.25}}});
  const fs::path dir = fs::temp_directory_path() / ("bqlab_out_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  const auto files = write_outputs(c, r, dir);
  ASSERT_EQ(files.size(), 3u);
  EXPECT_EQ(slurp(dir / "demo.csv"), "t,y\n0,1\n0.5,0.25\n");
  const std::string manifest = slurp(dir / "manifest.json");
  EXPECT_NE(manifest.find(config_hash(c)), std::string::npos);
  EXPECT_NE(slurp(dir / "verdict.json").find("\"pass\": true"), std::string::npos);
  for (const auto& e : fs::directory_iterator(dir)) EXPECT_NE(e.path().extension(), ".tmp");
  fs::remove_all(dir);
}
