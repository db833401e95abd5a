#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cyclescope/io.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(CYCLESCOPE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json load(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = testsupport::scratch_dir("cli");
    ASSERT_EQ(run("generate mixedcycles --seed 7 " + dir_.string() + "/"), 0);
  }
  static fs::path dir_;
  fs::path graph() const { return dir_ / "mixedcycles-s7.edges.tsv"; }
  fs::path truth() const { return dir_ / "mixedcycles-s7.truth.json"; }
};

fs::path Cli::dir_;

}  // namespace

TEST_F(Cli, GenerateWritesGraphAndTruth) {
  ASSERT_TRUE(fs::exists(graph()));
  ASSERT_TRUE(fs::exists(truth()));
  std::ifstream in(graph());
  EXPECT_EQ(cyclescope::io::read_edge_list_with_header(in).num_vertices(), 480u);
  EXPECT_EQ(load(truth()).at("schema"), "cyclescope.truth.v1");

  ASSERT_EQ(run("generate pure3cyclic --seed 1 " + (dir_ / "pure").string()), 0);
  std::ifstream pin(dir_ / "pure.edges.tsv");
  EXPECT_EQ(cyclescope::io::read_edge_list_with_header(pin).num_vertices(), 135u);
}

TEST_F(Cli, AnalyzeMetricsBoundsRoundTrip) {
  const auto prefix = dir_ / "mixed";
  ASSERT_EQ(run("analyze " + graph().string() + " --target 1/3 --target 1/4 --side both --out " + prefix.string()),
            0);
  auto r = load(prefix.string() + ".run.json");
  EXPECT_EQ(r.at("schema"), "cyclescope.run.v1");
  ASSERT_EQ(r.at("targets").size(), 2u);
  for (const auto& t : r.at("targets")) {
    EXPECT_LE(t.at("residuals").at("right").get<double>(), 1e-10);
    EXPECT_LE(t.at("residuals").at("left").get<double>(), 1e-10);
    ASSERT_EQ(t.at("embeddings").size(), 2u);
    for (const auto& e : t.at("embeddings")) EXPECT_TRUE(fs::exists(dir_ / e.at("csv").get<std::string>()));
  }
  const double eps = r.at("targets")[0].at("epsilon").get<double>();
  EXPECT_GT(eps, 0.05);
  EXPECT_LT(eps, 0.30);

  const auto metrics = dir_ / "metrics.json";
  ASSERT_EQ(run("metrics " + truth().string() + " " + prefix.string() + ".run.json --out " + metrics.string()), 0);
  auto m = load(metrics);
  EXPECT_EQ(m.at("schema"), "cyclescope.metrics.v1");
  EXPECT_DOUBLE_EQ(m.at("coverage").get<double>(), 1.0);
  EXPECT_EQ(m.at("false_positives"), 0);
  EXPECT_DOUBLE_EQ(m.at("ari_within_group").get<double>(), 1.0);

  const auto m4 = dir_ / "metrics4.json";
  ASSERT_EQ(run("metrics " + truth().string() + " " + prefix.string() + ".run.json --target 1/4 --out " +
                m4.string()),
            0);
  EXPECT_DOUBLE_EQ(load(m4).at("ari_within_group").get<double>(), 1.0);

  const auto bounds = dir_ / "bounds.json";
  ASSERT_EQ(run("bounds " + graph().string() + " " + truth().string() + " --out " + bounds.string()), 0);
  auto b = load(bounds);
  EXPECT_EQ(b.at("schema"), "cyclescope.bounds.v1");
  EXPECT_NEAR(b.at("epsilon").get<double>(), eps, 1e-10);
  EXPECT_TRUE(b.contains("perturbation_first_order_no_factor2"));
}

TEST_F(Cli, RerunIsReproducible) {
  const auto a = dir_ / "rep-a", b = dir_ / "rep-b";
  ASSERT_EQ(run("analyze " + graph().string() + " --out " + a.string()), 0);
  ASSERT_EQ(run("analyze " + graph().string() + " --out " + b.string()), 0);
  EXPECT_EQ(slurp(a.string() + ".t1-3.right.csv"), slurp(b.string() + ".t1-3.right.csv"));
}

TEST_F(Cli, RelabelingPermutesTheOutput) {
  std::ifstream in(graph());
  const auto g = cyclescope::io::read_edge_list_with_header(in);
  std::vector<std::size_t> perm(g.num_vertices());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(3));
  {
    std::ofstream out(dir_ / "perm.tsv");
    for (auto [u, v] : g.edges()) out << perm[u] << '\t' << perm[v] << '\n';
  }
  ASSERT_EQ(run("analyze " + graph().string() + " --out " + (dir_ / "orig").string()), 0);
  ASSERT_EQ(run("analyze " + (dir_ / "perm.tsv").string() + " --out " + (dir_ / "perm").string()), 0);
  auto a = load(dir_ / "orig.run.json"), b = load(dir_ / "perm.run.json");
  const auto& ta = a.at("targets")[0];
  const auto& tb = b.at("targets")[0];
  EXPECT_NEAR(ta.at("lambda")[0].get<double>(), tb.at("lambda")[0].get<double>(), 1e-10);
  EXPECT_NEAR(ta.at("lambda")[1].get<double>(), tb.at("lambda")[1].get<double>(), 1e-10);
  const auto la = ta.at("embeddings")[0].at("clustering").at("labels").get<std::vector<int>>();
  const auto lb = tb.at("embeddings")[0].at("clustering").at("labels").get<std::vector<int>>();
  // both runs cover the whole graph, so SCC indices are original indices
  ASSERT_EQ(la.size(), g.num_vertices());
  ASSERT_EQ(lb.size(), g.num_vertices());
  for (std::size_t v = 0; v < la.size(); ++v) EXPECT_EQ(la[v], lb[perm[v]]) << v;
}

TEST_F(Cli, SvdBaseline) {
  ASSERT_EQ(run("generate hidden3cyclic:2 --seed 1 " + (dir_ / "hidden").string()), 0);
  const auto prefix = dir_ / "hsvd";
  ASSERT_EQ(run("svd " + (dir_ / "hidden.edges.tsv").string() + " -s 25 --dims 3,4 --out " + prefix.string()), 0);
  auto j = load(prefix.string() + ".svd.json");
  const auto s = j.at("singular_values").get<std::vector<double>>();
  ASSERT_EQ(s.size(), 25u);
  EXPECT_GE(s[6] / s[7], 1.5);
  EXPECT_TRUE(fs::exists(prefix.string() + ".coords.csv"));
  EXPECT_EQ(run("svd " + graph().string() + " -s 481"), 3);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("generate nosuchmodel " + dir_.string() + "/"), 3);
  EXPECT_EQ(run("analyze " + (dir_ / "missing.tsv").string()), 3);
  EXPECT_EQ(run("analyze " + graph().string() + " --target 2/4 --out " + (dir_ / "x").string()), 3);
  EXPECT_EQ(run("analyze " + graph().string() + " --bogus"), 3);
  EXPECT_EQ(run("bounds " + graph().string() + " " + (dir_ / "missing.json").string()), 3);
  EXPECT_EQ(run("analyze " + graph().string() + " --tol 1e-40 --out " + (dir_ / "strict").string()), 2);
  {
    std::ofstream bad(dir_ / "loop.tsv");
    bad << "0\t0\n0\t1\n1\t0\n";
  }
  EXPECT_EQ(run("analyze " + (dir_ / "loop.tsv").string() + " --out " + (dir_ / "loop").string()), 3);
  EXPECT_EQ(run("analyze " + (dir_ / "loop.tsv").string() + " --drop-self-loops --target 1/2 --out " +
                (dir_ / "loop").string()),
            0);
}
