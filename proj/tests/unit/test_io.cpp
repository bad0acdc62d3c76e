#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hmmsb/generative.hpp"
#include "hmmsb/io.hpp"

using namespace hmmsb;
namespace fs = std::filesystem;

namespace {

io::Manifest test_manifest() {
  io::Manifest m;
  m.command = "test";
  m.invocation = "hmmsb test --seed 7";
  m.seed = 7;
  return m;
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

DirectedNetwork parse_edges(const std::string& text) {
  std::istringstream in(text);
  return io::read_edge_list(in, "edges.tsv");
}

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("hmmsb_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(FormatDouble, RoundTripsExactly) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double x = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng.below(40)) - 20);
    EXPECT_EQ(std::stod(io::format_double(x)), x);
  }
  EXPECT_EQ(io::format_double(0.5), "0.5");
  EXPECT_EQ(io::format_double(-INFINITY), "-inf");
}

TEST(EdgeList, ParsesHeaderCommentsAndExplicitZeros) {
  auto net = parse_edges("# a comment\nsrc\tdst\tvalue\n0\t1\n2\t0\t1\n1\t2\t0\n\n");
  EXPECT_EQ(net.size(), 3);
  EXPECT_TRUE(net.edge(0, 1));
  EXPECT_TRUE(net.edge(2, 0));
  EXPECT_FALSE(net.edge(1, 2));
  EXPECT_EQ(net.edge_count(), 2u);
}

TEST(EdgeList, DeclaredActorCountKeepsIsolatedActors) {
  auto net = parse_edges("# n_actors: 6\n0\t1\n");
  EXPECT_EQ(net.size(), 6);
  EXPECT_NE(error_of([] { parse_edges("# n_actors: 2\n0\t5\n"); }).find("out of range"),
            std::string::npos);
}

TEST(EdgeList, DiagnosticsNameTheLine) {
  EXPECT_EQ(error_of([] { parse_edges("0\t1\n1\t1\n"); }), "edges.tsv:2: self-loop 1");
  EXPECT_EQ(error_of([] { parse_edges("0\t1\n\n0\t1\n"); }), "edges.tsv:3: duplicate pair 0 1");
  EXPECT_EQ(error_of([] { parse_edges("0\tx\n"); }).rfind("edges.tsv:1:", 0), 0u);
  EXPECT_EQ(error_of([] { parse_edges("0\t1\t2\n"); }), "edges.tsv:1: edge value must be 0 or 1");
  EXPECT_EQ(error_of([] { parse_edges("0\t1\t1\t1\n"); }).rfind("edges.tsv:1:", 0), 0u);
  EXPECT_EQ(error_of([] { parse_edges("-1\t1\n"); }).rfind("edges.tsv:1:", 0), 0u);
}

TEST(EdgeList, RoundTrips) {
  Rng rng(2);
  DirectedNetwork net(12);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      if (i != j) net.set_edge(i, j, rng.bernoulli(0.3));
    }
  }
  std::stringstream ss;
  io::write_edge_list(ss, net, test_manifest());
  EXPECT_NE(ss.str().find("# invocation: hmmsb test --seed 7"), std::string::npos);
  EXPECT_EQ(io::read_edge_list(ss), net);
}

TEST(Labels, RoundTripAndValidation) {
  const std::vector<std::string> labels{"grass", "rabbit", "fox with spaces"};
  std::stringstream ss;
  io::write_labels(ss, labels, test_manifest());
  EXPECT_EQ(io::read_labels(ss, 3), labels);

  std::istringstream partial("id\tlabel\n1\tb\n");
  EXPECT_EQ(io::read_labels(partial, 3), (std::vector<std::string>{"0", "b", "2"}));
  std::istringstream dup("0\ta\n0\tb\n");
  EXPECT_EQ(error_of([&] { io::read_labels(dup, 3, "l.tsv"); }), "l.tsv:2: duplicate actor id 0");
  std::istringstream range("7\ta\n");
  EXPECT_NE(error_of([&] { io::read_labels(range, 3); }).find("out of range"), std::string::npos);
}

TEST(HierarchyJson, RoundTripsPathsLabelsAndEntries) {
  Rng rng(3);
  Hyperparams h;
  h.max_depth = 3;
  for (int rep = 0; rep < 10; ++rep) {
    io::HierarchyDocument doc;
    doc.paths = sample_ncrp_paths(20, h, rng);
    if (rep % 2) {
      for (int a = 0; a < 20; ++a) doc.labels.push_back("actor " + std::to_string(a));
    }
    auto levels = sample_prior_levels(20, h, rng);
    DirectedNetwork net(20);
    net.set_edge(0, 1, true);
    net.set_edge(3, 2, true);
    doc.entries = io::summarize_entries(recount(net, doc.paths, levels), h);

    std::stringstream ss;
    io::write_hierarchy(ss, doc, test_manifest());
    auto back = io::read_hierarchy(ss);
    EXPECT_EQ(back.paths, doc.paths);
    EXPECT_EQ(back.labels, doc.labels);
    ASSERT_EQ(back.entries.size(), doc.entries.size());
    for (const auto& [parent, list] : doc.entries) {
      const auto& other = back.entries.at(parent);
      ASSERT_EQ(other.size(), list.size());
      for (std::size_t e = 0; e < list.size(); ++e) {
        EXPECT_EQ(other[e].counts, list[e].counts);
        EXPECT_EQ(other[e].estimate, list[e].estimate);
      }
    }
  }
}

TEST(HierarchyJson, RejectsInvalidTrees) {
  io::HierarchyDocument doc;
  doc.paths = PathAssignment(3, 1);
  doc.paths.set_path(2, std::vector<int>{2});
  std::stringstream ss;
  io::write_hierarchy(ss, doc, test_manifest());
  const std::string good = ss.str();

  auto load = [](const std::string& text) {
    std::istringstream in(text);
    io::read_hierarchy(in, "h.json");
  };
  EXPECT_NO_THROW(load(good));
  auto mutate = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    const auto at = s.find(from);
    EXPECT_NE(at, std::string::npos) << from;
    return s.replace(at, from.size(), to);
  };
  EXPECT_NE(error_of([&] { load(mutate("\"size\":3", "\"size\":4")); }).find("size"), std::string::npos);
  EXPECT_NE(error_of([&] { load(mutate("\"actor_ids\":[2]", "\"actor_ids\":[1]")); }).find("twice"),
            std::string::npos);
  EXPECT_NE(error_of([&] { load(mutate("\"path_prefix\":[2]", "\"path_prefix\":[1]")); }),
            "");
  EXPECT_NE(error_of([&] { load("{not json"); }).find("h.json"), std::string::npos);
  EXPECT_NE(error_of([&] { load("{}"); }), "");
}

TEST(Samples, LevelRunLengthEncoding) {
  LevelAssignments lv(3);
  lv.set_donor(1, 0, 2);
  lv.set_donor(1, 2, 2);
  EXPECT_EQ(io::encode_levels(lv, Side::kDonor), "1x2,2x2,1x2");
  EXPECT_EQ(io::encode_levels(lv, Side::kReceiver), "1x6");
  LevelAssignments back(3);
  io::decode_levels("1x2,2x2,1x2", back, Side::kDonor, 2);
  EXPECT_EQ(back, lv);
  EXPECT_THROW(io::decode_levels("1x5", back, Side::kDonor, 2), InputError);
  EXPECT_THROW(io::decode_levels("1x7", back, Side::kDonor, 2), InputError);
  EXPECT_THROW(io::decode_levels("3x6", back, Side::kDonor, 2), InputError);
  EXPECT_THROW(io::decode_levels("1-6", back, Side::kDonor, 2), InputError);
  EXPECT_EQ(io::encode_levels(LevelAssignments(1), Side::kDonor), "-");
}

TEST(Samples, RoundTripChainOutput) {
  Rng rng(4);
  Hyperparams h;
  h.gamma = 0.37;
  h.lambda1 = 0.1;
  DirectedNetwork net(15);
  for (int i = 0; i < 14; ++i) net.set_edge(i, i + 1, true);
  ChainConfig cc;
  cc.burn_in = 3;
  cc.n_samples = 4;
  cc.seed = 11;
  io::SamplesFile file;
  file.header = {15, h, 11};
  file.samples = run_chain(net, h, cc).samples;
  std::stringstream ss;
  io::write_samples(ss, file, test_manifest());
  auto back = io::read_samples(ss);
  EXPECT_EQ(back.header.n_actors, 15);
  EXPECT_EQ(back.header.hyper, h);
  EXPECT_EQ(back.header.seed, 11u);
  ASSERT_EQ(back.samples.size(), 4u);
  for (std::size_t s = 0; s < 4; ++s) {
    EXPECT_EQ(back.samples[s].iteration, file.samples[s].iteration);
    EXPECT_EQ(back.samples[s].log_likelihood, file.samples[s].log_likelihood);
    EXPECT_EQ(back.samples[s].paths, file.samples[s].paths);
    EXPECT_EQ(back.samples[s].levels, file.samples[s].levels);
  }
}

TEST(Samples, MalformedRecordsNameTheLine) {
  io::SamplesFile file;
  file.header.n_actors = 2;
  file.samples.push_back({5, PathAssignment(2, 2), LevelAssignments(2), -1.5});
  std::stringstream ss;
  io::write_samples(ss, file, io::Manifest{});
  const std::string good = ss.str();
  auto load = [](const std::string& text) {
    std::istringstream in(text);
    io::read_samples(in, "s");
  };
  EXPECT_NO_THROW(load(good));
  const std::size_t lines = std::count(good.begin(), good.end(), '\n');
  const std::string prefix = "s:" + std::to_string(lines) + ":";
  EXPECT_EQ(error_of([&] { load(good + "6\t-1\t1,1;1,1\t1x2\n"); }).rfind("s:" + std::to_string(lines + 1) + ":", 0), 0u);
  std::string bad_path = good;
  bad_path.replace(bad_path.find("1,1;1,1"), 7, "1,1;1,0");
  EXPECT_EQ(error_of([&] { load(bad_path); }).rfind(prefix, 0), 0u);
  EXPECT_NE(error_of([&] { load("not a samples file\n"); }), "");
}

TEST(Config, KeyValueLines) {
  std::istringstream in("# comment\nK = 3\n--gamma=0.5\n\nK=2\n");
  auto cfg = io::read_config(in);
  EXPECT_EQ(cfg.at("K"), "2");
  EXPECT_EQ(cfg.at("gamma"), "0.5");
  std::istringstream bad("K 3\n");
  EXPECT_EQ(error_of([&] { io::read_config(bad, "c"); }), "c:1: expected key=value");
}

TEST(OutputSet, NothingAppearsWithoutCommit) {
  const auto dir = scratch_dir("abort");
  {
    io::OutputSet out;
    out.open(dir / "a.txt") << "partial";
    out.open(dir / "b.txt") << "partial";
  }
  EXPECT_TRUE(fs::is_empty(dir));
  {
    io::OutputSet out;
    out.open(dir / "a.txt") << "done";
    out.commit();
  }
  std::ifstream in(dir / "a.txt");
  std::string text;
  in >> text;
  EXPECT_EQ(text, "done");
  EXPECT_FALSE(fs::exists(dir / "a.txt.tmp"));
  io::OutputSet out;
  EXPECT_THROW(out.open(dir / "missing" / "x.txt"), UsageError);
}

TEST(Export, BlockOrderGroupsCommunities) {
  PathAssignment p(5, 2);
  p.set_path(0, std::vector<int>{2, 1});
  p.set_path(2, std::vector<int>{1, 2});
  auto order = io::block_order(p);
  EXPECT_EQ(order, (std::vector<int>{1, 3, 4, 2, 0}));
  DirectedNetwork net(5);
  net.set_edge(1, 0, true);
  std::stringstream ss;
  io::write_permuted_adjacency(ss, net, p, io::Manifest{});
  EXPECT_NE(ss.str().find("actor,path,1,3,4,2,0\n1,1.1,0,0,0,0,1\n"), std::string::npos);
}

TEST(Export, DotConventions) {
  PathAssignment flat(3, 1);
  flat.set_path(2, std::vector<int>{2});
  std::stringstream tree;
  io::write_hierarchy_dot(tree, flat, io::Manifest{});
  const auto t = tree.str();
  EXPECT_EQ(std::count(t.begin(), t.end(), '>'), 2);  // root -> two leaves
  EXPECT_NE(t.find("label=\"root\\n3\""), std::string::npos);

  PathAssignment p(3, 2);
  DirectedNetwork net(3);
  net.set_edge(0, 1, true);
  net.set_edge(1, 2, true);
  LevelAssignments lv(3);
  lv.set_donor(1, 2, 2);
  lv.set_receiver(1, 2, 2);
  std::stringstream g;
  io::write_network_dot(g, net, p, lv, io::Manifest{});
  const auto s = g.str();
  EXPECT_NE(s.find("0 -> 1 [color=\"#1f77b4;0.5:#1f77b4\", style=solid]"), std::string::npos);
  EXPECT_NE(s.find("1 -> 2 [color=\"#1f77b4;0.5:#1f77b4\", style=dashed]"), std::string::npos);
}

TEST(Csv, ReportsCarryManifestAndHeader) {
  F1Report r;
  r.per_level.push_back({1, 2, 1, 2, 1.0 / 3, 0.5, 0.4});
  r.total = 0.4;
  std::stringstream ss;
  io::write_f1(ss, r, test_manifest());
  EXPECT_NE(ss.str().find("# seed: 7\n"), std::string::npos);
  EXPECT_NE(ss.str().find("level,tp,fp,fn,tn,precision,recall,f1\n1,1,2,1,2,"), std::string::npos);
  EXPECT_NE(ss.str().find("total,,,,,,,0.4\n"), std::string::npos);
}
