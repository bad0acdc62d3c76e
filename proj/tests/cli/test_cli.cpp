#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;  // stdout and stderr together
};

Run hmmsb(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " HMMSB_CLI " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("hmmsb_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// File contents with the invocation dropped, since it names the output prefix.
std::string without_invocation(const fs::path& p) {
  static const std::regex text_line("(^|\n)(#|//) invocation: [^\n]*");
  static const std::regex json_key("\"invocation\":\"[^\"]*\"");
  return std::regex_replace(std::regex_replace(slurp(p), text_line, "$1"), json_key, "");
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(hmmsb("").code, 1);
  EXPECT_EQ(hmmsb("frobnicate").code, 1);
  EXPECT_EQ(hmmsb("simulate --out x --no-such-flag").code, 1);
  EXPECT_EQ(hmmsb("simulate --out x --gamma abc").code, 1);
  EXPECT_EQ(hmmsb("infer").code, 1);
  const auto help = hmmsb("--help");
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("infer"), std::string::npos);
  const auto dir = scratch("usage");
  const auto bad_gamma = hmmsb("simulate --out " + q(dir / "s") + " --gamma -2");
  EXPECT_EQ(bad_gamma.code, 1);
  EXPECT_NE(bad_gamma.out.find("gamma"), std::string::npos);
  EXPECT_TRUE(fs::is_empty(dir));
}

TEST(Cli, InputErrorsExitTwoWithoutPartialOutputs) {
  const auto dir = scratch("input");
  std::ofstream(dir / "bad.tsv") << "0\t1\n3\t3\n";
  const auto r = hmmsb("infer " + q(dir / "bad.tsv") + " --out " + q(dir / "fit"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("bad.tsv:2: self-loop 3"), std::string::npos) << r.out;
  EXPECT_EQ(hmmsb("infer " + q(dir / "missing.tsv") + " --out " + q(dir / "fit")).code, 2);
  std::ofstream(dir / "cfg.ini") << "K 3\n";
  EXPECT_EQ(hmmsb("simulate --out " + q(dir / "s") + " --config " + q(dir / "cfg.ini")).code, 2);
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 2u);
}

TEST(Cli, SimulateTwoActors) {
  const auto dir = scratch("two");
  ASSERT_EQ(hmmsb("simulate --out " + q(dir / "s") + " --n-actors 2 --seed 1").code, 0);
  const auto edges = slurp(dir / "s.edges.tsv");
  EXPECT_NE(edges.find("# n_actors: 2"), std::string::npos);
  const auto r = hmmsb("recount-check " + q(dir / "s.truth.samples") + " " + q(dir / "s.edges.tsv"));
  EXPECT_EQ(r.code, 0) << r.out;
}

TEST(Cli, InferIsDeterministicGivenSeed) {
  const auto dir = scratch("det");
  ASSERT_EQ(hmmsb("simulate --out " + q(dir / "s") + " --n-actors 30 --seed 4").code, 0);
  const std::string common = "infer " + q(dir / "s.edges.tsv") +
                             " --burnin 20 --samples 10 --grid gamma --is-samples 50 --seed 8 --out ";
  ASSERT_EQ(hmmsb(common + q(dir / "a")).code, 0);
  ASSERT_EQ(hmmsb(common + q(dir / "b")).code, 0);
  for (const char* ext : {".samples", ".trace.csv", ".hierarchy.json", ".final.json",
                          ".hierarchy.dot", ".adjacency.csv", ".grid.csv"}) {
    const auto a = without_invocation(dir / (std::string("a") + ext));
    EXPECT_FALSE(a.empty()) << ext;
    EXPECT_EQ(a, without_invocation(dir / (std::string("b") + ext))) << ext;
  }
  ASSERT_EQ(hmmsb("infer " + q(dir / "s.edges.tsv") +
                  " --burnin 20 --samples 10 --seed 9 --out " + q(dir / "c"))
                .code,
            0);
  EXPECT_NE(without_invocation(dir / "a.samples"), without_invocation(dir / "c.samples"));
}

TEST(Cli, SeedFromEnvironment) {
  const auto dir = scratch("env");
  ASSERT_EQ(hmmsb("simulate --out " + q(dir / "s") + " --n-actors 5", "HMMSB_SEED=77").code, 0);
  EXPECT_NE(slurp(dir / "s.edges.tsv").find("# seed: 77"), std::string::npos);
  ASSERT_EQ(hmmsb("simulate --out " + q(dir / "t") + " --n-actors 5 --seed 3", "HMMSB_SEED=77").code, 0);
  EXPECT_NE(slurp(dir / "t.edges.tsv").find("# seed: 3"), std::string::npos);
}

TEST(Cli, ConfigFileWithFlatHierarchy) {
  const auto dir = scratch("config");
  std::ofstream(dir / "run.ini") << "# flat model\nK = 1\nn-actors = 12\nseed = 6\n";
  ASSERT_EQ(hmmsb("simulate --config " + q(dir / "run.ini") + " --out " + q(dir / "s")).code, 0);
  EXPECT_NE(slurp(dir / "s.truth.json").find("\"depth\":1"), std::string::npos);
  ASSERT_EQ(hmmsb("infer " + q(dir / "s.edges.tsv") + " --config " + q(dir / "run.ini") +
                  " --burnin 5 --samples 3 --out " + q(dir / "f"))
                .code,
            0);
  // A flat tree has only root -> leaf edges.
  const auto dot = slurp(dir / "f.hierarchy.dot");
  std::size_t edges = 0;
  for (std::size_t at = dot.find("->"); at != std::string::npos; at = dot.find("->", at + 2)) ++edges;
  std::size_t leaves = 0;
  for (std::size_t at = dot.find("n0 ->"); at != std::string::npos;
       at = dot.find("n0 ->", at + 2)) {
    ++leaves;
  }
  EXPECT_GT(edges, 0u);
  EXPECT_EQ(edges, leaves) << dot;

  // Command-line flags win over the config file.
  ASSERT_EQ(hmmsb("simulate --config " + q(dir / "run.ini") + " --K 2 --out " + q(dir / "t")).code, 0);
  EXPECT_NE(slurp(dir / "t.truth.json").find("\"depth\":2"), std::string::npos);
}

TEST(Cli, EvalF1IgnoresLabelPermutations) {
  const auto dir = scratch("f1");
  const std::string a =
      R"({"format":"hmmsb-hierarchy","format_version":1,"n_actors":4,"depth":1,"root":{"path_prefix":[],"size":4,"actor_ids":[0,1,2,3],"children":[{"path_prefix":[1],"size":2,"actor_ids":[0,3],"children":[]},{"path_prefix":[2],"size":2,"actor_ids":[1,2],"children":[]}]}})";
  const std::string b =
      R"({"format":"hmmsb-hierarchy","format_version":1,"n_actors":4,"depth":1,"root":{"path_prefix":[],"size":4,"actor_ids":[0,1,2,3],"children":[{"path_prefix":[1],"size":2,"actor_ids":[1,2],"children":[]},{"path_prefix":[2],"size":2,"actor_ids":[0,3],"children":[]}]}})";
  std::ofstream(dir / "a.json") << a;
  std::ofstream(dir / "b.json") << b;
  auto r = hmmsb("eval-f1 " + q(dir / "a.json") + " " + q(dir / "a.json") + " --out " + q(dir / "aa.csv"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("total_f1\t1\n"), std::string::npos) << r.out;
  r = hmmsb("eval-f1 " + q(dir / "b.json") + " " + q(dir / "a.json") + " --out " + q(dir / "ba.csv"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("total_f1\t1\n"), std::string::npos) << r.out;
  EXPECT_NE(slurp(dir / "ba.csv").find("total,,,,,,,1\n"), std::string::npos);
}

TEST(Cli, HeldoutSingleSplitNoGrid) {
  const auto dir = scratch("heldout");
  ASSERT_EQ(hmmsb("simulate --out " + q(dir / "s") + " --n-actors 16 --seed 2").code, 0);
  const auto r = hmmsb("heldout " + q(dir / "s.edges.tsv") +
                       " --splits 1 --grid none --is-samples 100 --out " + q(dir / "h"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("mean_test_log_marginal\t-"), std::string::npos) << r.out;
  EXPECT_NE(slurp(dir / "h.heldout_summary.csv").find("splits,1"), std::string::npos);
}

TEST(Cli, ExportDotFromInferredHierarchy) {
  const auto dir = scratch("export");
  ASSERT_EQ(hmmsb("simulate --out " + q(dir / "s") + " --n-actors 10 --seed 3").code, 0);
  const auto r = hmmsb("export-dot " + q(dir / "s.truth.json") + " --edges " + q(dir / "s.edges.tsv") +
                       " --samples " + q(dir / "s.truth.samples") + " --out " + q(dir / "x"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(slurp(dir / "x.hierarchy.dot").find("digraph"), std::string::npos);
  EXPECT_NE(slurp(dir / "x.network.dot").find("digraph"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "x.adjacency.csv"));
}
