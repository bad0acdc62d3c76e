#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hmmsb/hmmsb.h"

namespace {

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag, "expected comma-separated numbers, got '" + text + "'");
    }
  }
  return out;
}

void add_hyper(CLI::App* app, hmmsb_hyper& h) {
  app->add_option("--K", h.depth, "hierarchy depth")->check(CLI::Range(1, 255));
  app->add_option("--gamma", h.gamma, "nCRP concentration");
  app->add_option("--m", h.m, "GEM mean");
  app->add_option("--pi", h.pi, "GEM concentration");
  app->add_option("--lambda1", h.lambda1, "Beta prior on edges");
  app->add_option("--lambda2", h.lambda2, "Beta prior on non-edges");
}

void add_seed(CLI::App* app, uint64_t& seed) {
  app->add_option("--seed", seed, "random seed")->envname("HMMSB_SEED");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Replaces "--config FILE" with the file's key=value lines as "--key=value"
// tokens placed right after the subcommand, so flags given on the command
// line (parsed later, last one wins) override them.
// Keys the chosen subcommand does not define are skipped, so one file can
// serve every command.
std::vector<std::string> expand_config(int argc, char** argv, const CLI::App& app) {
  std::vector<std::string> args(argv, argv + argc);
  if (args.size() < 2) return args;
  const CLI::App* sub = nullptr;
  for (const auto* s : app.get_subcommands({})) {
    if (s->get_name() == args[1]) sub = s;
  }
  std::vector<std::string> injected, rest;
  for (std::size_t a = 2; a < args.size(); ++a) {
    std::string path;
    if (args[a] == "--config" && a + 1 < args.size()) {
      path = args[++a];
    } else if (args[a].rfind("--config=", 0) == 0) {
      path = args[a].substr(9);
    } else {
      rest.push_back(args[a]);
      continue;
    }
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
      }
      std::string key = trim(line.substr(0, eq));
      while (!key.empty() && key[0] == '-') key.erase(0, 1);
      if (sub && !sub->get_option_no_throw("--" + key)) continue;
      injected.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
    }
  }
  std::vector<std::string> out{args[0], args[1]};
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

void add_config(CLI::App* app) {
  // consumed by expand_config; registered for --help
  app->add_option("--config", "key=value file mirroring these flags; flags override it");
}

int report(hmmsb_status status) {
  if (status != HMMSB_OK) std::fprintf(stderr, "hmmsb: %s\n", hmmsb_last_error());
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical mixed membership stochastic blockmodel"};
  app.require_subcommand(1);
  app.set_version_flag("--version", hmmsb_version());

  std::string invocation = "hmmsb";
  for (int a = 1; a < argc; ++a) invocation += std::string(" ") + argv[a];

  // simulate
  hmmsb_simulate_options sim;
  hmmsb_simulate_options_init(&sim);
  std::string sim_out, theta_text, b_on_text, b_off_text, level_model = "conditioned";
  auto* simulate = app.add_subcommand("simulate", "draw a network and its hierarchy from the model");
  add_config(simulate);
  simulate->add_option("--out", sim_out, "output prefix")->required();
  simulate->add_option("--n-actors", sim.n_actors, "number of actors")->check(CLI::PositiveNumber);
  simulate->add_option("--regime", sim.regime, "preset B regime 1-4 (0: draw B from its prior)")
      ->check(CLI::Range(0, 4));
  simulate->add_option("--theta", theta_text, "fixed membership vector, e.g. 0.25,0.75");
  simulate->add_option("--b-on", b_on_text, "same-branch edge probability per level");
  simulate->add_option("--b-off", b_off_text, "cross-branch edge probability per level");
  simulate->add_option("--level-model", level_model, "conditioned or renormalized")
      ->check(CLI::IsMember({"conditioned", "renormalized"}));
  add_hyper(simulate, sim.hyper);
  add_seed(simulate, sim.seed);

  // infer
  hmmsb_infer_options inf;
  hmmsb_infer_options_init(&inf);
  std::string inf_edges, inf_labels, inf_out, inf_grid = "none";
  bool random_scan = false, network_dot = false;
  auto* infer = app.add_subcommand("infer", "run the Gibbs sampler on an edge list");
  add_config(infer);
  infer->add_option("edges", inf_edges, "edge list TSV")->required();
  infer->add_option("--labels", inf_labels, "id<TAB>label sidecar");
  infer->add_option("--out", inf_out, "output prefix")->required();
  infer->add_option("--burnin", inf.chain.burnin, "burn-in iterations")->check(CLI::NonNegativeNumber);
  infer->add_option("--samples", inf.chain.samples, "retained samples")->check(CLI::PositiveNumber);
  infer->add_option("--lag", inf.chain.lag, "iterations between samples")->check(CLI::PositiveNumber);
  infer->add_flag("--random-scan", random_scan, "random site order each sweep");
  infer->add_option("--grid", inf_grid, "hyperparameter grid")
      ->check(CLI::IsMember({"none", "gamma", "lambda", "both"}));
  infer->add_option("--is-samples", inf.is_samples, "importance samples per grid cell")
      ->check(CLI::PositiveNumber);
  infer->add_option("--threads", inf.threads, "grid worker threads")->check(CLI::PositiveNumber);
  infer->add_option("--min-community-size", inf.min_community_size,
                    "merge bottom-level communities of at most this size")
      ->check(CLI::NonNegativeNumber);
  infer->add_flag("--network-dot", network_dot, "also render the network as DOT");
  add_hyper(infer, inf.hyper);
  add_seed(infer, inf.seed);

  // eval-f1
  hmmsb_eval_f1_options f1;
  hmmsb_eval_f1_options_init(&f1);
  std::string f1_pred, f1_truth, f1_out;
  auto* eval_f1 = app.add_subcommand("eval-f1", "score a hierarchy against the truth");
  eval_f1->add_option("predicted", f1_pred, "predicted hierarchy JSON")->required();
  eval_f1->add_option("truth", f1_truth, "truth hierarchy JSON")->required();
  eval_f1->add_option("--out", f1_out, "F1 CSV")->required();

  // heldout
  hmmsb_heldout_options ho;
  hmmsb_heldout_options_init(&ho);
  std::string ho_edges, ho_out, ho_grid = "lambda";
  auto* heldout = app.add_subcommand("heldout", "held-out marginal likelihood over random splits");
  add_config(heldout);
  heldout->add_option("edges", ho_edges, "edge list TSV")->required();
  heldout->add_option("--out", ho_out, "output prefix")->required();
  heldout->add_option("--splits", ho.splits, "number of splits")->check(CLI::PositiveNumber);
  heldout->add_option("--grid", ho_grid, "hyperparameter grid")
      ->check(CLI::IsMember({"none", "gamma", "lambda", "both"}));
  heldout->add_option("--is-samples", ho.is_samples, "importance samples per estimate")
      ->check(CLI::PositiveNumber);
  heldout->add_option("--threads", ho.threads, "grid worker threads")->check(CLI::PositiveNumber);
  add_hyper(heldout, ho.hyper);
  add_seed(heldout, ho.seed);

  // export-dot
  hmmsb_export_dot_options dot;
  hmmsb_export_dot_options_init(&dot);
  std::string dot_hier, dot_edges, dot_samples, dot_out;
  auto* export_dot = app.add_subcommand("export-dot", "render a hierarchy (and network) as DOT");
  export_dot->add_option("hierarchy", dot_hier, "hierarchy JSON")->required();
  export_dot->add_option("--edges", dot_edges, "edge list TSV");
  export_dot->add_option("--samples", dot_samples, "samples file for edge levels");
  export_dot->add_option("--out", dot_out, "output prefix")->required();

  // recount-check
  std::string rc_samples, rc_edges;
  auto* recount = app.add_subcommand("recount-check", "verify the count invariant on a samples file");
  recount->add_option("samples", rc_samples, "samples file")->required();
  recount->add_option("edges", rc_edges, "edge list TSV")->required();

  for (auto* sub : app.get_subcommands({})) {
    for (auto* opt : sub->get_options()) opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv, app);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "hmmsb: %s\n", e.what());
    return HMMSB_ERR_INPUT;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : HMMSB_ERR_USAGE;
  }

  try {
    if (simulate->parsed()) {
      sim.out_prefix = sim_out.c_str();
      sim.invocation = invocation.c_str();
      std::vector<double> theta, b_on, b_off;
      if (!theta_text.empty()) theta = parse_list(theta_text, "--theta");
      if (!b_on_text.empty()) b_on = parse_list(b_on_text, "--b-on");
      if (!b_off_text.empty()) b_off = parse_list(b_off_text, "--b-off");
      if (b_on.size() != b_off.size()) {
        throw CLI::ValidationError("--b-on/--b-off", "must list the same number of levels");
      }
      sim.theta = theta.data();
      sim.theta_length = static_cast<int32_t>(theta.size());
      sim.b_on = b_on.data();
      sim.b_off = b_off.data();
      sim.b_length = static_cast<int32_t>(b_on.size());
      sim.renormalized_levels = level_model == "renormalized";
      return report(hmmsb_cmd_simulate(&sim));
    }
    if (infer->parsed()) {
      inf.edges_path = inf_edges.c_str();
      inf.labels_path = inf_labels.empty() ? nullptr : inf_labels.c_str();
      inf.out_prefix = inf_out.c_str();
      inf.invocation = invocation.c_str();
      inf.grid = inf_grid.c_str();
      inf.chain.random_scan = random_scan;
      inf.network_dot = network_dot;
      return report(hmmsb_cmd_infer(&inf));
    }
    if (eval_f1->parsed()) {
      f1.predicted_path = f1_pred.c_str();
      f1.truth_path = f1_truth.c_str();
      f1.out_path = f1_out.c_str();
      f1.invocation = invocation.c_str();
      double total = 0;
      const auto status = hmmsb_cmd_eval_f1(&f1, &total);
      if (status == HMMSB_OK) std::printf("total_f1\t%.17g\n", total);
      return report(status);
    }
    if (heldout->parsed()) {
      ho.edges_path = ho_edges.c_str();
      ho.out_prefix = ho_out.c_str();
      ho.invocation = invocation.c_str();
      ho.grid = ho_grid.c_str();
      double mean = 0;
      const auto status = hmmsb_cmd_heldout(&ho, &mean);
      if (status == HMMSB_OK) std::printf("mean_test_log_marginal\t%.17g\n", mean);
      return report(status);
    }
    if (export_dot->parsed()) {
      dot.hierarchy_path = dot_hier.c_str();
      dot.edges_path = dot_edges.empty() ? nullptr : dot_edges.c_str();
      dot.samples_path = dot_samples.empty() ? nullptr : dot_samples.c_str();
      dot.out_prefix = dot_out.c_str();
      dot.invocation = invocation.c_str();
      return report(hmmsb_cmd_export_dot(&dot));
    }
    if (recount->parsed()) {
      hmmsb_recount_report r{};
      const auto status = hmmsb_cmd_recount_check(rc_samples.c_str(), rc_edges.c_str(), &r);
      std::printf("records\t%lld\nfailures\t%lld\n", static_cast<long long>(r.records),
                  static_cast<long long>(r.failures));
      return report(status);
    }
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return HMMSB_ERR_USAGE;
  }
  return HMMSB_ERR_USAGE;
}
