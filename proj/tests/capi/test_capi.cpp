#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hmmsb/hmmsb.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("hmmsb_capi_" + name);
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

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::vector<std::string> listing(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

// Small simulated network shared by the command tests.
fs::path simulated(const fs::path& dir, int n = 24, uint64_t seed = 5) {
  hmmsb_simulate_options s;
  hmmsb_simulate_options_init(&s);
  const std::string prefix = (dir / "sim").string();
  s.out_prefix = prefix.c_str();
  s.seed = seed;
  s.n_actors = n;
  s.regime = 1;
  EXPECT_EQ(hmmsb_cmd_simulate(&s), HMMSB_OK) << hmmsb_last_error();
  return dir / "sim";
}

}  // namespace

TEST(CApi, VersionAndDefaults) {
  EXPECT_STREQ(hmmsb_version(), "0.1.0");
  hmmsb_hyper h;
  hmmsb_hyper_init(&h);
  EXPECT_EQ(h.depth, 2);
  EXPECT_EQ(h.m, 0.5);
  EXPECT_EQ(h.pi, 0.5);
  hmmsb_chain_options c;
  hmmsb_chain_options_init(&c);
  EXPECT_EQ(c.burnin + c.samples, 1500);
}

TEST(CApi, NetworkHandle) {
  hmmsb_network* net = nullptr;
  ASSERT_EQ(hmmsb_network_create(4, &net), HMMSB_OK);
  EXPECT_EQ(hmmsb_network_size(net), 4);
  EXPECT_EQ(hmmsb_network_set_edge(net, 0, 3, 1), HMMSB_OK);
  EXPECT_EQ(hmmsb_network_edge(net, 0, 3), 1);
  EXPECT_EQ(hmmsb_network_edge(net, 3, 0), 0);
  EXPECT_EQ(hmmsb_network_edge_count(net), 1);
  EXPECT_EQ(hmmsb_network_set_edge(net, 0, 4, 1), HMMSB_ERR_USAGE);
  EXPECT_STREQ(hmmsb_last_error(), "actor id out of range");
  EXPECT_EQ(hmmsb_network_set_edge(net, 0, 3, 0), HMMSB_OK);
  EXPECT_STREQ(hmmsb_last_error(), "");
  EXPECT_EQ(hmmsb_network_edge_count(net), 0);
  hmmsb_network_free(net);
  hmmsb_network_free(nullptr);
  EXPECT_EQ(hmmsb_network_create(-1, &net), HMMSB_ERR_USAGE);
  EXPECT_EQ(hmmsb_network_create(3, nullptr), HMMSB_ERR_USAGE);
}

TEST(CApi, NetworkReadReportsInputErrors) {
  const auto dir = scratch("read");
  write_text(dir / "ok.tsv", "src\tdst\n0\t1\n1\t2\n");
  write_text(dir / "bad.tsv", "0\t1\n2\t2\n");
  write_text(dir / "labels.tsv", "0\ta\n9\tb\n");
  hmmsb_network* net = nullptr;
  ASSERT_EQ(hmmsb_network_read((dir / "ok.tsv").c_str(), nullptr, &net), HMMSB_OK);
  EXPECT_EQ(hmmsb_network_size(net), 3);
  EXPECT_EQ(hmmsb_network_edge_count(net), 2);
  hmmsb_network_free(net);
  net = nullptr;
  EXPECT_EQ(hmmsb_network_read((dir / "bad.tsv").c_str(), nullptr, &net), HMMSB_ERR_INPUT);
  EXPECT_EQ(std::string(hmmsb_last_error()), (dir / "bad.tsv").string() + ":2: self-loop 2");
  EXPECT_EQ(net, nullptr);
  EXPECT_EQ(hmmsb_network_read((dir / "ok.tsv").c_str(), (dir / "labels.tsv").c_str(), &net),
            HMMSB_ERR_INPUT);
  EXPECT_EQ(hmmsb_network_read((dir / "missing.tsv").c_str(), nullptr, &net), HMMSB_ERR_INPUT);
}

TEST(CApi, ChainRun) {
  hmmsb_network* net = nullptr;
  ASSERT_EQ(hmmsb_network_create(6, &net), HMMSB_OK);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i != j) {
        hmmsb_network_set_edge(net, i, j, 1);
        hmmsb_network_set_edge(net, i + 3, j + 3, 1);
      }
    }
  }
  hmmsb_hyper h;
  hmmsb_hyper_init(&h);
  hmmsb_chain_options c{20, 5, 2, 0};
  hmmsb_chain *a = nullptr, *b = nullptr;
  ASSERT_EQ(hmmsb_chain_run(net, &h, &c, 9, &a), HMMSB_OK);
  ASSERT_EQ(hmmsb_chain_run(net, &h, &c, 9, &b), HMMSB_OK);
  EXPECT_EQ(hmmsb_chain_sample_count(a), 5);
  EXPECT_EQ(hmmsb_chain_trace_length(a), 30);
  for (int64_t t = 1; t <= 30; ++t) {
    EXPECT_EQ(hmmsb_chain_trace_at(a, t), hmmsb_chain_trace_at(b, t));
    EXPECT_TRUE(std::isfinite(hmmsb_chain_trace_at(a, t)));
  }
  int32_t pa[2], pb[2];
  for (int64_t s = 0; s < 5; ++s) {
    for (int actor = 0; actor < 6; ++actor) {
      ASSERT_EQ(hmmsb_chain_path(a, s, actor, pa), HMMSB_OK);
      ASSERT_EQ(hmmsb_chain_path(b, s, actor, pb), HMMSB_OK);
      EXPECT_EQ(pa[0], pb[0]);
      EXPECT_EQ(pa[1], pb[1]);
      EXPECT_GE(pa[0], 1);
    }
  }
  EXPECT_EQ(hmmsb_chain_path(a, 5, 0, pa), HMMSB_ERR_USAGE);
  EXPECT_EQ(hmmsb_chain_path(a, 0, 6, pa), HMMSB_ERR_USAGE);
  hmmsb_chain_free(a);
  hmmsb_chain_free(b);

  h.gamma = -1;
  EXPECT_EQ(hmmsb_chain_run(net, &h, &c, 9, &a), HMMSB_ERR_USAGE);
  hmmsb_hyper_init(&h);
  c.samples = 0;
  EXPECT_EQ(hmmsb_chain_run(net, &h, &c, 9, &a), HMMSB_ERR_USAGE);
  hmmsb_network_free(net);
}

TEST(CApi, LogMarginalOfEmptyPair) {
  // Two actors, no edges, K=1, gamma=1, Beta(1,1). Sharing a block (prob 1/2)
  // puts both zeros in one entry: 1/3. Separate blocks give two entries: 1/4.
  hmmsb_network* net = nullptr;
  ASSERT_EQ(hmmsb_network_create(2, &net), HMMSB_OK);
  hmmsb_hyper h;
  hmmsb_hyper_init(&h);
  h.depth = 1;
  h.gamma = 1;
  h.lambda1 = h.lambda2 = 1;
  double est = 0, se = 0;
  ASSERT_EQ(hmmsb_log_marginal(net, &h, 200000, 3, &est, &se), HMMSB_OK);
  const double exact = std::log(0.5 * (1.0 / 3) + 0.5 * 0.25);
  EXPECT_NEAR(est, exact, 4 * se + 1e-12);
  EXPECT_LT(se, 0.01);
  EXPECT_EQ(hmmsb_log_marginal(net, &h, 0, 3, &est, &se), HMMSB_ERR_USAGE);
  hmmsb_network_free(net);
}

TEST(CApiCommands, SimulateWritesEveryArtifact) {
  const auto dir = scratch("simulate");
  simulated(dir);
  EXPECT_EQ(listing(dir),
            (std::vector<std::string>{"sim.b.csv", "sim.edges.tsv", "sim.manifest.json",
                                      "sim.truth.json", "sim.truth.samples"}));
  hmmsb_recount_report r{};
  EXPECT_EQ(hmmsb_cmd_recount_check((dir / "sim.truth.samples").c_str(),
                                    (dir / "sim.edges.tsv").c_str(), &r),
            HMMSB_OK)
      << hmmsb_last_error();
  EXPECT_EQ(r.records, 1);
  EXPECT_EQ(r.failures, 0);

  const auto again = scratch("simulate2");
  simulated(again);
  for (const auto& name : listing(dir)) EXPECT_EQ(slurp(dir / name), slurp(again / name)) << name;
}

TEST(CApiCommands, SimulateRejectsBadOverrides) {
  const auto dir = scratch("simulate_bad");
  hmmsb_simulate_options s;
  hmmsb_simulate_options_init(&s);
  const std::string prefix = (dir / "x").string();
  s.out_prefix = prefix.c_str();
  const double on[] = {0.5};
  const double off[] = {0.1};
  s.b_length = 1;  // depth is 2
  s.b_on = on;
  s.b_off = off;
  EXPECT_EQ(hmmsb_cmd_simulate(&s), HMMSB_ERR_USAGE);
  s.b_length = 0;
  s.regime = 9;
  EXPECT_EQ(hmmsb_cmd_simulate(&s), HMMSB_ERR_USAGE);
  EXPECT_TRUE(fs::is_empty(dir));
}

TEST(CApiCommands, InferEvalExportPipeline) {
  const auto dir = scratch("infer");
  const auto sim = simulated(dir);
  const std::string edges = sim.string() + ".edges.tsv";
  const std::string prefix = (dir / "fit").string();
  hmmsb_infer_options o;
  hmmsb_infer_options_init(&o);
  o.edges_path = edges.c_str();
  o.out_prefix = prefix.c_str();
  o.invocation = "capi test";
  o.seed = 3;
  o.chain = {30, 10, 1, 0};
  o.grid = "gamma";
  o.is_samples = 100;
  o.network_dot = 1;
  ASSERT_EQ(hmmsb_cmd_infer(&o), HMMSB_OK) << hmmsb_last_error();
  for (const char* ext : {".samples", ".trace.csv", ".hierarchy.json", ".final.json",
                          ".hierarchy.dot", ".adjacency.csv", ".network.dot", ".grid.csv"}) {
    const auto p = prefix + ext;
    ASSERT_TRUE(fs::exists(p)) << p;
    EXPECT_NE(slurp(p).find("capi test"), std::string::npos) << p;
  }
  // 1 header + 40 iterations after the manifest block.
  std::istringstream trace(slurp(prefix + ".trace.csv"));
  int rows = 0;
  for (std::string line; std::getline(trace, line);) {
    if (!line.empty() && line[0] != '#') ++rows;
  }
  EXPECT_EQ(rows, 41);

  hmmsb_recount_report r{};
  EXPECT_EQ(hmmsb_cmd_recount_check((prefix + ".samples").c_str(), edges.c_str(), &r), HMMSB_OK)
      << hmmsb_last_error();
  EXPECT_EQ(r.records, 10);

  hmmsb_eval_f1_options e;
  hmmsb_eval_f1_options_init(&e);
  const std::string truth = sim.string() + ".truth.json";
  const std::string f1_out = (dir / "self.f1.csv").string();
  e.predicted_path = truth.c_str();
  e.truth_path = truth.c_str();
  e.out_path = f1_out.c_str();
  double total = 0;
  ASSERT_EQ(hmmsb_cmd_eval_f1(&e, &total), HMMSB_OK) << hmmsb_last_error();
  EXPECT_EQ(total, 1.0);
  const std::string fit_json = prefix + ".final.json";
  e.predicted_path = fit_json.c_str();
  ASSERT_EQ(hmmsb_cmd_eval_f1(&e, &total), HMMSB_OK);
  EXPECT_GE(total, 0.0);
  EXPECT_LE(total, 1.0);

  hmmsb_export_dot_options x;
  hmmsb_export_dot_options_init(&x);
  const std::string hier = prefix + ".hierarchy.json";
  const std::string samples = prefix + ".samples";
  const std::string xprefix = (dir / "export").string();
  x.hierarchy_path = hier.c_str();
  x.edges_path = edges.c_str();
  x.samples_path = samples.c_str();
  x.out_prefix = xprefix.c_str();
  ASSERT_EQ(hmmsb_cmd_export_dot(&x), HMMSB_OK) << hmmsb_last_error();
  EXPECT_TRUE(fs::exists(xprefix + ".hierarchy.dot"));
  EXPECT_TRUE(fs::exists(xprefix + ".network.dot"));
  EXPECT_TRUE(fs::exists(xprefix + ".adjacency.csv"));
}

TEST(CApiCommands, FailedInferLeavesNoFiles) {
  const auto dir = scratch("infer_fail");
  write_text(dir / "edges.tsv", "0\t1\n1\t2\n2\t0\n");
  const std::string edges = (dir / "edges.tsv").string();
  const std::string prefix = (dir / "fit").string();
  hmmsb_infer_options o;
  hmmsb_infer_options_init(&o);
  o.edges_path = edges.c_str();
  o.out_prefix = prefix.c_str();
  o.chain = {5, 2, 1, 0};
  o.grid = "nonsense";
  EXPECT_EQ(hmmsb_cmd_infer(&o), HMMSB_ERR_USAGE);
  o.grid = "none";
  const std::string labels = (dir / "labels.tsv").string();
  write_text(labels, "0\ta\n0\tb\n");
  o.labels_path = labels.c_str();
  EXPECT_EQ(hmmsb_cmd_infer(&o), HMMSB_ERR_INPUT);
  EXPECT_EQ(listing(dir), (std::vector<std::string>{"edges.tsv", "labels.tsv"}));
  const std::string missing_dir = (dir / "nope" / "fit").string();
  o.labels_path = nullptr;
  o.out_prefix = missing_dir.c_str();
  EXPECT_EQ(hmmsb_cmd_infer(&o), HMMSB_ERR_USAGE);
  EXPECT_EQ(listing(dir), (std::vector<std::string>{"edges.tsv", "labels.tsv"}));
}

TEST(CApiCommands, RecountCheckCatchesTampering) {
  const auto dir = scratch("tamper");
  const auto sim = simulated(dir, 12);
  const auto samples = sim.string() + ".truth.samples";
  std::string text = slurp(samples);
  // Corrupt the recorded log-likelihood of the single record.
  const auto last = text.rfind('\n', text.size() - 2) + 1;
  const auto tab = text.find('\t', last);
  const auto tab2 = text.find('\t', tab + 1);
  text.replace(tab + 1, tab2 - tab - 1, "-1");
  write_text(dir / "bad.samples", text);
  hmmsb_recount_report r{};
  EXPECT_EQ(hmmsb_cmd_recount_check((dir / "bad.samples").c_str(),
                                    (sim.string() + ".edges.tsv").c_str(), &r),
            HMMSB_ERR_INTERNAL);
  EXPECT_EQ(r.records, 1);
  EXPECT_EQ(r.failures, 1);
}

TEST(CApiCommands, HeldoutSingleSplit) {
  const auto dir = scratch("heldout");
  const auto sim = simulated(dir, 20);
  const std::string edges = sim.string() + ".edges.tsv";
  const std::string prefix = (dir / "ho").string();
  hmmsb_heldout_options o;
  hmmsb_heldout_options_init(&o);
  o.edges_path = edges.c_str();
  o.out_prefix = prefix.c_str();
  o.splits = 1;
  o.grid = "none";
  o.is_samples = 200;
  double mean = 0;
  ASSERT_EQ(hmmsb_cmd_heldout(&o, &mean), HMMSB_OK) << hmmsb_last_error();
  EXPECT_TRUE(std::isfinite(mean));
  EXPECT_LT(mean, 0.0);
  EXPECT_TRUE(fs::exists(prefix + ".heldout.csv"));
  EXPECT_TRUE(fs::exists(prefix + ".heldout_cells.csv"));
  EXPECT_TRUE(fs::exists(prefix + ".heldout_summary.csv"));
  double again = 0;
  ASSERT_EQ(hmmsb_cmd_heldout(&o, &again), HMMSB_OK);
  EXPECT_EQ(mean, again);
  o.splits = 0;
  EXPECT_EQ(hmmsb_cmd_heldout(&o, &again), HMMSB_ERR_USAGE);
}
