#include <gtest/gtest.h>

#include "oracles.hpp"
#include "run.hpp"

using namespace ridgekit;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override { dir = oracle::temp_dir(::testing::UnitTest::GetInstance()->current_test_info()->name()); }
  void TearDown() override { fs::remove_all(dir); }

  cli::Outcome run(const std::vector<std::string>& args) { return cli::run(args, dir); }
  std::string p(const std::string& name) const { return (dir / name).string(); }

  void synth(const std::string& prefix, const std::vector<std::string>& extra = {}) {
    std::vector<std::string> args{"synth", "--out-prefix", p(prefix)};
    args.insert(args.end(), extra.begin(), extra.end());
    ASSERT_EQ(run(args).code, 0);
  }

  fs::path dir;
};

}  // namespace

TEST_F(Cli, NoSubcommandIsUsageError) { EXPECT_EQ(run({}).code, 1); }

TEST_F(Cli, HelpExitsZero) { EXPECT_EQ(run({"--help"}).code, 0); }

TEST_F(Cli, SynthWritesFilesReproducibly) {
  synth("a");
  synth("b");
  for (const auto* ext : {".meta", ".labels", ".queries"}) {
    ASSERT_TRUE(fs::exists(p(std::string("a") + ext)));
    EXPECT_EQ(read_file(p(std::string("a") + ext)), read_file(p(std::string("b") + ext))) << ext;
  }
  EXPECT_EQ(load_metabase(p("a.meta")).size(), 600u);
  EXPECT_EQ(load_labels(p("a.labels")).size(), 600u);
}

TEST_F(Cli, SynthRender) {
  synth("r", {"--classes", "arch,whorl", "--per-class", "2", "--render", "--size", "128"});
  EXPECT_EQ(list_pgm(p("r_images")).size(), 4u);
  EXPECT_EQ(load_pgm(p("r_images/syn00000.pgm")).width, 128);
}

TEST_F(Cli, SynthRejectsUnknownClass) { EXPECT_EQ(run({"synth", "--classes", "arch,blob", "--out-prefix", p("x")}).code, 1); }

TEST_F(Cli, ClusterIsDeterministic) {
  synth("s");
  ASSERT_EQ(run({"cluster", "--meta", p("s.meta"), "--out", p("a.clusters")}).code, 0);
  ASSERT_EQ(run({"cluster", "--meta", p("s.meta"), "--out", p("b.clusters")}).code, 0);
  EXPECT_EQ(read_file(p("a.clusters")), read_file(p("b.clusters")));
  ASSERT_EQ(run({"cluster", "--meta", p("s.meta"), "--method", "linkage", "--linkage", "ward", "--out", p("w.clusters")}).code, 0);
  EXPECT_EQ(load_clusters(p("w.clusters")).k, 6u);
}

TEST_F(Cli, ClusterTooManyClusters) {
  synth("s", {"--classes", "arch", "--per-class", "3"});
  const auto o = run({"cluster", "--meta", p("s.meta"), "--k", "5", "--out", p("c.clusters")});
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("error:"), std::string::npos);
  EXPECT_FALSE(fs::exists(p("c.clusters")));
}

TEST_F(Cli, ClusterBadLinkageIsUsageError) {
  synth("s");
  EXPECT_EQ(run({"cluster", "--meta", p("s.meta"), "--method", "linkage", "--linkage", "fuzzy", "--out", p("c")}).code, 1);
}

TEST_F(Cli, SearchByRecordId) {
  synth("s");
  ASSERT_EQ(run({"cluster", "--meta", p("s.meta"), "--out", p("s.clusters")}).code, 0);
  const auto o = run({"search", "--meta", p("s.meta"), "--clusters", p("s.clusters"), "--query", "syn00123", "--top", "3"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.out.rfind("rank record_id distance\n1 syn00123 0.000000\n", 0), 0u) << o.out;
  EXPECT_NE(o.out.find("class="), std::string::npos);
  EXPECT_TRUE(o.err.empty());
}

TEST_F(Cli, SearchByImage) {
  synth("s", {"--classes", "arch,left-loop,whorl", "--per-class", "2", "--render"});
  ASSERT_EQ(run({"enroll", p("s_images"), "--meta", p("e.meta")}).code, 0);
  ASSERT_EQ(run({"cluster", "--meta", p("e.meta"), "--k", "2", "--out", p("e.clusters")}).code, 0);
  const auto o = run({"search", "--meta", p("e.meta"), "--clusters", p("e.clusters"), "--query", p("s_images/syn00002.pgm")});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.out.rfind("rank record_id distance\n1 syn00002 0.000000\n", 0), 0u) << o.out;
}

TEST_F(Cli, SearchMissingClusters) {
  synth("s");
  EXPECT_EQ(run({"search", "--meta", p("s.meta"), "--clusters", p("none"), "--query", "syn00001"}).code, 2);
}

TEST_F(Cli, SearchUnknownQuery) {
  synth("s");
  ASSERT_EQ(run({"cluster", "--meta", p("s.meta"), "--out", p("s.clusters")}).code, 0);
  EXPECT_EQ(run({"search", "--meta", p("s.meta"), "--clusters", p("s.clusters"), "--query", "nobody"}).code, 2);
}

TEST_F(Cli, EvalBenchmark) {
  synth("s");
  ASSERT_EQ(run({"cluster", "--meta", p("s.meta"), "--out", p("s.clusters")}).code, 0);
  const auto o = run({"eval", "--meta", p("s.meta"), "--clusters", p("s.clusters"), "--labels", p("s.labels"), "--queries", p("s.queries")});
  ASSERT_EQ(o.code, 0) << o.err;
  double me = 1.0;
  ASSERT_EQ(std::sscanf(o.out.c_str(), "M_E %lf", &me), 1);
  EXPECT_LE(me, 0.05);
  EXPECT_NE(o.out.find("db_size,mode,rank1_acc,rankr_acc,mean_penetration,mean_comparisons\n600,clustered,"), std::string::npos);
  EXPECT_NE(o.out.find("\n600,linear,"), std::string::npos);
}

TEST_F(Cli, EvalPerfectClustering) {
  synth("s", {"--noise", "0", "--per-class", "10"});
  ASSERT_EQ(run({"cluster", "--meta", p("s.meta"), "--out", p("s.clusters")}).code, 0);
  const auto o = run({"eval", "--meta", p("s.meta"), "--clusters", p("s.clusters"), "--labels", p("s.labels")});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.out, "M_E 0.000000\n");
}

TEST_F(Cli, EvalLabelMismatch) {
  synth("s");
  ASSERT_EQ(run({"cluster", "--meta", p("s.meta"), "--out", p("s.clusters")}).code, 0);
  write_file_atomic(p("bad.labels"), read_file(p("s.labels")) + "ghost arch\n");
  EXPECT_EQ(run({"eval", "--meta", p("s.meta"), "--clusters", p("s.clusters"), "--labels", p("bad.labels")}).code, 2);
}

TEST_F(Cli, PreprocessWritesStages) {
  save_pgm(render_ridges(generate_field(FingerClass::whorl, 256, 256, 1).field), p("f.pgm"));
  const auto o = run({"preprocess", p("f.pgm"), "--out-dir", p("out"), "--dump-orientation", p("o.txt"), "--dump-minutiae", p("m.txt")});
  ASSERT_EQ(o.code, 0) << o.err;
  for (const auto* s : {"f_enhanced.pgm", "f_binary.pgm", "f_skeleton.pgm"}) EXPECT_TRUE(fs::exists(dir / "out" / s)) << s;
  EXPECT_EQ(load_pgm(dir / "out" / "f_skeleton.pgm").width, 256);
  EXPECT_FALSE(read_file(p("o.txt")).empty());
}

TEST_F(Cli, PreprocessUnreadable) {
  write_file_atomic(p("bad.pgm"), "P2\n1 1\n255\n0\n");
  EXPECT_EQ(run({"preprocess", p("bad.pgm"), "--out-dir", p("out")}).code, 2);
}

TEST_F(Cli, PreprocessNeedsOutDir) { EXPECT_EQ(run({"preprocess", p("x.pgm")}).code, 1); }

TEST_F(Cli, EnrollEmptyDirectory) {
  fs::create_directories(dir / "empty");
  const auto o = run({"enroll", p("empty"), "--meta", p("e.meta")});
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.err.find("warning"), std::string::npos);
  EXPECT_EQ(read_file(p("e.meta")), "RFPMETA 1\n");
}

TEST_F(Cli, EnrollMixedDirectory) {
  fs::create_directories(dir / "imgs");
  save_pgm(render_ridges(generate_field(FingerClass::arch, 256, 256, 1).field), dir / "imgs" / "a.pgm");
  save_pgm(render_ridges(generate_field(FingerClass::whorl, 256, 256, 2).field), dir / "imgs" / "b.pgm");
  write_file_atomic(dir / "imgs" / "c.pgm", "garbage");
  const auto o = run({"enroll", p("imgs"), "--meta", p("e.meta")});
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.err.find("c.pgm"), std::string::npos);
  EXPECT_EQ(load_metabase(p("e.meta")).size(), 2u);
}
