#include "hmmsb/hmmsb.h"

#include <new>
#include <string>

#include "commands.hpp"
#include "hmmsb/eval.hpp"
#include "hmmsb/gibbs.hpp"
#include "hmmsb/io.hpp"

struct hmmsb_network {
  hmmsb::DirectedNetwork net;
};

struct hmmsb_chain {
  hmmsb::ChainResult result;
  int depth = 0;
};

namespace {

thread_local std::string last_error;

template <class F>
hmmsb_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return HMMSB_OK;
  } catch (const hmmsb::UsageError& e) {
    last_error = e.what();
    return HMMSB_ERR_USAGE;
  } catch (const hmmsb::InputError& e) {
    last_error = e.what();
    return HMMSB_ERR_INPUT;
  } catch (const hmmsb::InternalFault& e) {
    last_error = e.what();
    return HMMSB_ERR_INTERNAL;
  } catch (const std::filesystem::filesystem_error& e) {
    last_error = e.what();
    return HMMSB_ERR_USAGE;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return HMMSB_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return HMMSB_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) throw hmmsb::UsageError(std::string(what) + " is NULL");
}

}  // namespace

extern "C" {

const char* hmmsb_version(void) { return hmmsb::io::kVersion; }

const char* hmmsb_last_error(void) { return last_error.c_str(); }

void hmmsb_hyper_init(hmmsb_hyper* hyper) {
  if (!hyper) return;
  const hmmsb::Hyperparams d;
  *hyper = {d.max_depth, d.gamma, d.m, d.pi, d.lambda1, d.lambda2};
}

void hmmsb_chain_options_init(hmmsb_chain_options* options) {
  if (!options) return;
  *options = {1400, 100, 1, 0};
}

hmmsb_status hmmsb_network_create(int32_t n_actors, hmmsb_network** out) {
  return guarded([&] {
    need(out, "out");
    if (n_actors < 0) throw hmmsb::UsageError("n_actors must be >= 0");
    *out = new hmmsb_network{hmmsb::DirectedNetwork(n_actors)};
  });
}

hmmsb_status hmmsb_network_read(const char* edges_path, const char* labels_path,
                                hmmsb_network** out) {
  return guarded([&] {
    need(out, "out");
    need(edges_path, "edges_path");
    auto net = hmmsb::io::read_edge_list(std::filesystem::path(edges_path));
    if (labels_path) net.set_labels(hmmsb::io::read_labels(std::filesystem::path(labels_path), net.size()));
    *out = new hmmsb_network{std::move(net)};
  });
}

hmmsb_status hmmsb_network_set_edge(hmmsb_network* network, int32_t src, int32_t dst,
                                    int32_t present) {
  return guarded([&] {
    need(network, "network");
    const int n = network->net.size();
    if (src < 0 || src >= n || dst < 0 || dst >= n) throw hmmsb::UsageError("actor id out of range");
    network->net.set_edge(src, dst, present != 0);
  });
}

int32_t hmmsb_network_size(const hmmsb_network* network) {
  return network ? network->net.size() : 0;
}

int32_t hmmsb_network_edge(const hmmsb_network* network, int32_t src, int32_t dst) {
  if (!network) return 0;
  const int n = network->net.size();
  if (src < 0 || src >= n || dst < 0 || dst >= n) return 0;
  return network->net.edge(src, dst) ? 1 : 0;
}

int64_t hmmsb_network_edge_count(const hmmsb_network* network) {
  return network ? static_cast<int64_t>(network->net.edge_count()) : 0;
}

void hmmsb_network_free(hmmsb_network* network) { delete network; }

hmmsb_status hmmsb_chain_run(const hmmsb_network* network, const hmmsb_hyper* hyper,
                             const hmmsb_chain_options* options, uint64_t seed, hmmsb_chain** out) {
  return guarded([&] {
    need(network, "network");
    need(hyper, "hyper");
    need(options, "options");
    need(out, "out");
    hmmsb::ChainConfig cc;
    cc.burn_in = options->burnin;
    cc.n_samples = options->samples;
    cc.lag = options->lag;
    cc.seed = seed;
    cc.scan = options->random_scan ? hmmsb::ScanOrder::kRandom : hmmsb::ScanOrder::kFixed;
    auto h = hmmsb::cmd::to_hyper(*hyper);
    *out = new hmmsb_chain{hmmsb::run_chain(network->net, h, cc), h.max_depth};
  });
}

int64_t hmmsb_chain_sample_count(const hmmsb_chain* chain) {
  return chain ? static_cast<int64_t>(chain->result.samples.size()) : 0;
}

int64_t hmmsb_chain_trace_length(const hmmsb_chain* chain) {
  return chain ? static_cast<int64_t>(chain->result.trace.size()) : 0;
}

double hmmsb_chain_trace_at(const hmmsb_chain* chain, int64_t iteration) {
  if (!chain || iteration < 1 || iteration > static_cast<int64_t>(chain->result.trace.size())) {
    return 0.0;
  }
  return chain->result.trace[static_cast<std::size_t>(iteration - 1)];
}

hmmsb_status hmmsb_chain_path(const hmmsb_chain* chain, int64_t sample, int32_t actor,
                              int32_t* labels) {
  return guarded([&] {
    need(chain, "chain");
    need(labels, "labels");
    const auto& samples = chain->result.samples;
    if (sample < 0 || sample >= static_cast<int64_t>(samples.size())) {
      throw hmmsb::UsageError("sample index out of range");
    }
    const auto& paths = samples[static_cast<std::size_t>(sample)].paths;
    if (actor < 0 || actor >= paths.size()) throw hmmsb::UsageError("actor id out of range");
    auto p = paths.path(actor);
    for (int d = 0; d < chain->depth; ++d) labels[d] = p[d];
  });
}

void hmmsb_chain_free(hmmsb_chain* chain) { delete chain; }

hmmsb_status hmmsb_log_marginal(const hmmsb_network* network, const hmmsb_hyper* hyper,
                                int64_t n_samples, uint64_t seed, double* log_estimate,
                                double* std_error) {
  return guarded([&] {
    need(network, "network");
    need(hyper, "hyper");
    hmmsb::Rng rng(seed);
    const auto est =
        hmmsb::marginal_likelihood_is(network->net, hmmsb::cmd::to_hyper(*hyper), n_samples, rng);
    if (log_estimate) *log_estimate = est.log_estimate;
    if (std_error) *std_error = est.std_error;
  });
}

void hmmsb_simulate_options_init(hmmsb_simulate_options* o) {
  if (!o) return;
  *o = {};
  hmmsb_hyper_init(&o->hyper);
  o->n_actors = 150;
}

hmmsb_status hmmsb_cmd_simulate(const hmmsb_simulate_options* options) {
  return guarded([&] {
    need(options, "options");
    hmmsb::cmd::simulate(*options);
  });
}

void hmmsb_infer_options_init(hmmsb_infer_options* o) {
  if (!o) return;
  *o = {};
  hmmsb_hyper_init(&o->hyper);
  hmmsb_chain_options_init(&o->chain);
  o->grid = "none";
  o->is_samples = 10000;
  o->threads = 1;
  o->min_community_size = 5;
}

hmmsb_status hmmsb_cmd_infer(const hmmsb_infer_options* options) {
  return guarded([&] {
    need(options, "options");
    hmmsb::cmd::infer(*options);
  });
}

void hmmsb_eval_f1_options_init(hmmsb_eval_f1_options* o) {
  if (o) *o = {};
}

hmmsb_status hmmsb_cmd_eval_f1(const hmmsb_eval_f1_options* options, double* total_f1) {
  return guarded([&] {
    need(options, "options");
    const double f = hmmsb::cmd::eval_f1(*options);
    if (total_f1) *total_f1 = f;
  });
}

void hmmsb_heldout_options_init(hmmsb_heldout_options* o) {
  if (!o) return;
  *o = {};
  hmmsb_hyper_init(&o->hyper);
  o->splits = 5;
  o->grid = "lambda";
  o->is_samples = 10000;
  o->threads = 1;
}

hmmsb_status hmmsb_cmd_heldout(const hmmsb_heldout_options* options,
                               double* mean_test_log_marginal) {
  return guarded([&] {
    need(options, "options");
    const double mean = hmmsb::cmd::heldout(*options);
    if (mean_test_log_marginal) *mean_test_log_marginal = mean;
  });
}

void hmmsb_export_dot_options_init(hmmsb_export_dot_options* o) {
  if (o) *o = {};
}

hmmsb_status hmmsb_cmd_export_dot(const hmmsb_export_dot_options* options) {
  return guarded([&] {
    need(options, "options");
    hmmsb::cmd::export_dot(*options);
  });
}

hmmsb_status hmmsb_cmd_recount_check(const char* samples_path, const char* edges_path,
                                     hmmsb_recount_report* report) {
  hmmsb_recount_report r{0, 0};
  const hmmsb_status status = guarded([&] {
    r = hmmsb::cmd::recount_check(samples_path ? samples_path : "", edges_path ? edges_path : "");
  });
  if (report) *report = r;
  if (status == HMMSB_OK && r.failures > 0) {
    last_error = std::to_string(r.failures) + " of " + std::to_string(r.records) +
                 " records failed the recount check";
    return HMMSB_ERR_INTERNAL;
  }
  return status;
}

}  // extern "C"
