#include "commands.hpp"

#include <cmath>
#include <json.hpp>

#include "hmmsb/eval.hpp"
#include "hmmsb/generative.hpp"
#include "hmmsb/gibbs.hpp"
#include "hmmsb/io.hpp"

namespace hmmsb::cmd {
namespace {

std::string str(const char* s) { return s ? s : ""; }

std::string require(const char* s, const char* what) {
  if (!s || !*s) throw UsageError(std::string(what) + " is required");
  return s;
}

io::Manifest manifest(const char* command, const char* invocation, std::uint64_t seed) {
  io::Manifest m;
  m.command = command;
  m.invocation = str(invocation);
  m.seed = seed;
  return m;
}

DirectedNetwork load_network(const char* edges, const char* labels) {
  auto net = io::read_edge_list(std::filesystem::path(require(edges, "edge list")));
  if (labels && *labels) net.set_labels(io::read_labels(std::filesystem::path(labels), net.size()));
  return net;
}

}  // namespace

Hyperparams to_hyper(const hmmsb_hyper& h) {
  Hyperparams out;
  out.max_depth = h.depth;
  out.gamma = h.gamma;
  out.m = h.m;
  out.pi = h.pi;
  out.lambda1 = h.lambda1;
  out.lambda2 = h.lambda2;
  out.validate();
  return out;
}

std::vector<Hyperparams> grid_for(const std::string& name, const Hyperparams& base) {
  if (name.empty() || name == "none") return {base};
  if (name == "gamma") return gamma_grid(base, kGammaGrid);
  if (name == "lambda") return lambda_grid(base, kLambdaGrid);
  if (name == "both") {
    std::vector<Hyperparams> out;
    for (const auto& g : gamma_grid(base, kGammaGrid)) {
      for (const auto& l : lambda_grid(g, kLambdaGrid)) out.push_back(l);
    }
    return out;
  }
  throw UsageError("unknown grid '" + name + "' (none, gamma, lambda, both)");
}

void simulate(const hmmsb_simulate_options& o) {
  const std::string prefix = require(o.out_prefix, "output prefix");
  SimulationConfig sc;
  sc.n_actors = o.n_actors;
  sc.hyper = to_hyper(o.hyper);
  if (o.b_length > 0) {
    if (!o.b_on || !o.b_off) throw UsageError("B override needs both on- and off-branch values");
    sc.fixed_b = BRegime{{o.b_on, o.b_on + o.b_length}, {o.b_off, o.b_off + o.b_length}};
  } else if (o.regime != 0) {
    sc.fixed_b = regime_preset(o.regime);
  }
  if (o.theta_length > 0) {
    if (!o.theta) throw UsageError("theta override has no values");
    sc.fixed_theta = std::vector<double>(o.theta, o.theta + o.theta_length);
  }
  sc.level_model = o.renormalized_levels ? LevelModel::kRenormalizedTheta : LevelModel::kConditioned;
  sc.validate();

  Rng rng(o.seed);
  const auto sim = generate_network(sc, rng);
  const auto m = manifest("simulate", o.invocation, o.seed);

  io::HierarchyDocument truth;
  truth.paths = sim.truth_paths;
  const auto stats = recount(sim.network, sim.truth_paths, sim.levels);
  truth.entries = io::summarize_entries(stats, sc.hyper);
  for (auto& [parent, list] : truth.entries) {
    for (auto& e : list) e.estimate = sim.realized_b.at(BEntryKey{parent, e.donor_child, e.receiver_child});
  }

  io::SamplesFile levels;
  levels.header = {sc.n_actors, sc.hyper, o.seed};
  levels.samples.push_back({0, sim.truth_paths, sim.levels,
                            complete_log_likelihood(sim.network, sim.truth_paths, sim.levels, sc.hyper)});

  nlohmann::ordered_json info;
  info["format"] = "hmmsb-simulation";
  info["manifest"] = {{"tool", "hmmsb"}, {"version", m.version}, {"command", m.command},
                      {"invocation", m.invocation}, {"seed", m.seed}};
  info["n_actors"] = sc.n_actors;
  info["hyper"] = {{"depth", sc.hyper.max_depth}, {"gamma", sc.hyper.gamma}, {"m", sc.hyper.m},
                   {"pi", sc.hyper.pi}, {"lambda1", sc.hyper.lambda1}, {"lambda2", sc.hyper.lambda2}};
  if (sc.fixed_b) info["b"] = {{"on", sc.fixed_b->on_diagonal}, {"off", sc.fixed_b->off_diagonal}};
  if (sc.fixed_theta) info["theta"] = *sc.fixed_theta;
  info["level_model"] = o.renormalized_levels ? "renormalized" : "conditioned";
  info["edges"] = sim.network.edge_count();
  nlohmann::ordered_json theta = nlohmann::ordered_json::array();
  for (const auto& mv : sim.memberships) theta.push_back(mv.theta);
  info["memberships"] = std::move(theta);

  io::OutputSet out;
  io::write_edge_list(out.open(prefix + ".edges.tsv"), sim.network, m);
  io::write_hierarchy(out.open(prefix + ".truth.json"), truth, m);
  io::write_samples(out.open(prefix + ".truth.samples"), levels, m);
  io::write_b_map(out.open(prefix + ".b.csv"), sim.realized_b, m);
  out.open(prefix + ".manifest.json") << info.dump(1) << '\n';
  out.commit();
}

void infer(const hmmsb_infer_options& o) {
  const std::string prefix = require(o.out_prefix, "output prefix");
  const auto net = load_network(o.edges_path, o.labels_path);
  Hyperparams hyper = to_hyper(o.hyper);
  ChainConfig cc;
  cc.burn_in = o.chain.burnin;
  cc.n_samples = o.chain.samples;
  cc.lag = o.chain.lag;
  cc.seed = o.seed;
  cc.scan = o.chain.random_scan ? ScanOrder::kRandom : ScanOrder::kFixed;
  cc.validate();
  if (o.min_community_size < 0) throw UsageError("min community size must be >= 0");
  if (o.threads < 1) throw UsageError("threads must be >= 1");

  const auto m = manifest("infer", o.invocation, o.seed);
  io::OutputSet out;

  const std::string grid_name = str(o.grid);
  if (!grid_name.empty() && grid_name != "none") {
    const auto grid = grid_for(grid_name, hyper);
    if (o.is_samples < 1) throw UsageError("is-samples must be >= 1");
    const auto cells = evaluate_grid(net, grid, o.is_samples, Rng(o.seed).split(2), o.threads);
    const std::size_t best = select_best(cells);
    hyper = cells[best].hyper;
    io::write_grid(out.open(prefix + ".grid.csv"), cells, best, m);
  }

  const auto chain = run_chain(net, hyper, cc);

  std::vector<PathAssignment> path_samples;
  std::vector<LevelAssignments> level_samples;
  for (const auto& s : chain.samples) {
    path_samples.push_back(s.paths);
    level_samples.push_back(s.levels);
  }
  const auto summary = consensus(path_samples, level_samples);
  const auto merged = merge_small_communities(summary.consensus_paths, o.min_community_size);

  io::HierarchyDocument consensus_doc;
  consensus_doc.paths = merged;
  consensus_doc.labels = net.labels();
  consensus_doc.entries =
      io::summarize_entries(recount(net, merged, summary.level_modes), hyper);

  const auto& last = chain.samples.back();
  io::HierarchyDocument final_doc;
  final_doc.paths = last.paths;
  final_doc.labels = net.labels();
  final_doc.entries = io::summarize_entries(recount(net, last.paths, last.levels), hyper);

  io::SamplesFile samples;
  samples.header = {net.size(), hyper, o.seed};
  samples.samples = chain.samples;

  io::write_samples(out.open(prefix + ".samples"), samples, m);
  io::write_trace(out.open(prefix + ".trace.csv"), chain.trace, m);
  io::write_hierarchy(out.open(prefix + ".hierarchy.json"), consensus_doc, m);
  io::write_hierarchy(out.open(prefix + ".final.json"), final_doc, m);
  io::write_hierarchy_dot(out.open(prefix + ".hierarchy.dot"), merged, m);
  io::write_permuted_adjacency(out.open(prefix + ".adjacency.csv"), net, merged, m);
  if (o.network_dot) {
    io::write_network_dot(out.open(prefix + ".network.dot"), net, merged, summary.level_modes, m);
  }
  out.commit();
}

double eval_f1(const hmmsb_eval_f1_options& o) {
  const std::string out_path = require(o.out_path, "output path");
  const auto predicted = io::read_hierarchy(std::filesystem::path(require(o.predicted_path, "predicted hierarchy")));
  const auto truth = io::read_hierarchy(std::filesystem::path(require(o.truth_path, "truth hierarchy")));
  if (predicted.paths.size() != truth.paths.size() || predicted.paths.depth() != truth.paths.depth()) {
    throw InputError("predicted and truth hierarchies differ in actors or depth");
  }
  const auto report = f1_report(predicted.paths, truth.paths);
  io::OutputSet out;
  io::write_f1(out.open(out_path), report, manifest("eval-f1", o.invocation, 0));
  out.commit();
  return report.total;
}

double heldout(const hmmsb_heldout_options& o) {
  const std::string prefix = require(o.out_prefix, "output prefix");
  const auto net = load_network(o.edges_path, nullptr);
  const auto grid = grid_for(str(o.grid), to_hyper(o.hyper));
  HeldoutConfig hc;
  hc.splits = o.splits;
  hc.is_samples = o.is_samples;
  hc.seed = o.seed;
  hc.threads = o.threads;
  const auto result = heldout_protocol(net, grid, hc);
  const auto m = manifest("heldout", o.invocation, o.seed);
  io::OutputSet out;
  io::write_heldout(out.open(prefix + ".heldout.csv"), result, m);
  io::write_heldout_cells(out.open(prefix + ".heldout_cells.csv"), result, m);
  io::write_heldout_summary(out.open(prefix + ".heldout_summary.csv"), result, m);
  out.commit();
  return result.mean_test_log_likelihood;
}

void export_dot(const hmmsb_export_dot_options& o) {
  const std::string prefix = require(o.out_prefix, "output prefix");
  const auto doc = io::read_hierarchy(std::filesystem::path(require(o.hierarchy_path, "hierarchy")));
  const auto m = manifest("export-dot", o.invocation, 0);
  io::OutputSet out;
  io::write_hierarchy_dot(out.open(prefix + ".hierarchy.dot"), doc.paths, m);
  if (o.edges_path && *o.edges_path) {
    auto net = load_network(o.edges_path, nullptr);
    if (net.size() != doc.paths.size()) {
      throw InputError("edge list has " + std::to_string(net.size()) + " actors, hierarchy has " +
                       std::to_string(doc.paths.size()));
    }
    if (!doc.labels.empty()) net.set_labels(doc.labels);
    LevelAssignments levels(net.size());
    if (o.samples_path && *o.samples_path) {
      const auto samples = io::read_samples(std::filesystem::path(o.samples_path));
      if (samples.header.n_actors != net.size()) throw InputError("samples file has a different actor count");
      if (samples.header.hyper.max_depth != doc.paths.depth()) throw InputError("samples file has a different depth");
      std::vector<LevelAssignments> all;
      for (const auto& s : samples.samples) all.push_back(s.levels);
      if (!all.empty()) levels = mode_levels(all);
    }
    io::write_network_dot(out.open(prefix + ".network.dot"), net, doc.paths, levels, m);
    io::write_permuted_adjacency(out.open(prefix + ".adjacency.csv"), net, doc.paths, m);
  }
  out.commit();
}

hmmsb_recount_report recount_check(const std::string& samples_path, const std::string& edges_path) {
  if (samples_path.empty() || edges_path.empty()) throw UsageError("samples file and edge list are required");
  const auto file = io::read_samples(std::filesystem::path(samples_path));
  const auto net = io::read_edge_list(std::filesystem::path(edges_path));
  if (net.size() != file.header.n_actors) throw InputError("edge list and samples file differ in actor count");
  hmmsb_recount_report report{0, 0};
  Rng rng(file.header.seed);
  for (const auto& s : file.samples) {
    ++report.records;
    SamplerState state(net, file.header.hyper, s.paths, s.levels);
    bool ok = state.incompatible_edge_count() == 0;
    ok = ok && state.labeled_stats() == recount(net, s.paths, s.levels);
    const double ll = state.complete_log_likelihood();
    ok = ok && std::abs(ll - s.log_likelihood) <= 1e-9 * std::max(1.0, std::abs(ll));
    // one sweep exercises every incremental update path
    state.sweep(rng);
    ok = ok && state.stats_consistent();
    if (!ok) ++report.failures;
  }
  return report;
}

}  // namespace hmmsb::cmd
