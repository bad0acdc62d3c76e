#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "hmmsb/community_tree.hpp"
#include "hmmsb/generative.hpp"
#include "hmmsb/model.hpp"
#include "hmmsb/rng.hpp"
#include "hmmsb/special.hpp"

namespace hmmsb {

enum class Side { kDonor, kReceiver };
enum class ScanOrder { kFixed, kRandom };

struct ChainConfig {
  std::int64_t burn_in = 0;
  std::int64_t n_samples = 1;
  std::int64_t lag = 1;
  std::uint64_t seed = 0;
  ScanOrder scan = ScanOrder::kFixed;

  void validate() const;
  std::int64_t total_iterations() const noexcept { return burn_in + n_samples * lag; }
};

// -- Conditional pieces -----------------------------------------------------

/// Beta-Bernoulli predictive of one edge value given the entry's counts with
/// the pair itself excluded. An incompatible resolution gives 0 for an edge
/// and 1 for a non-edge.
double level_likelihood_term(const EdgeCounts& excluding_pair, bool edge, bool compatible,
                             const Hyperparams& hyper);

/// Unnormalized stick-breaking predictive of level k given an actor's other
/// level indicators (`counts[k-1]` = number at level k).
double level_prior_term(std::span<const int> counts, Level k, const Hyperparams& hyper);

/// level_prior_term over k = 1..K, renormalized.
std::vector<double> level_prior_distribution(std::span<const int> counts, const Hyperparams& hyper);

/// Collapsed ratio for one compatibility entry:
/// log [ B(g + r + l1, h + s + l2) / B(g + l1, h + l2) ], where g/h are the
/// entry's counts from non-incident pairs and r/s those from incident pairs.
double log_entry_ratio(const EdgeCounts& existing, const EdgeCounts& incident,
                       const Hyperparams& hyper);

struct EntryTally {
  EdgeCounts existing;  // g_B, h_B
  EdgeCounts incident;  // r_B, s_B
};

/// Sum of log_entry_ratio over entries (log of the product; 0 for none).
double log_path_likelihood(std::span<const EntryTally> entries, const Hyperparams& hyper);

// -- Sampler state -----------------------------------------------------------

/// One candidate for an actor's path: the existing nodes it follows from depth
/// 1 down, then fresh branches for the remaining levels.
struct PathCandidate {
  std::vector<NodeId> existing;
  double log_prior = 0.0;
  double log_likelihood = 0.0;
  double probability = 0.0;
};

/// Full sampler state for one chain: paths (as node ids in a CommunityTree),
/// level indicators, and the incrementally maintained compatibility counts.
/// B and theta are integrated out; only z and c are sampled.
class SamplerState {
 public:
  SamplerState(DirectedNetwork network, const Hyperparams& hyper, const PathAssignment& paths,
               const LevelAssignments& levels);

  /// Paths from the sequential nCRP prior; levels from the collapsed level prior.
  static SamplerState from_prior(DirectedNetwork network, const Hyperparams& hyper, Rng& rng);

  int size() const noexcept { return n_; }
  int depth() const noexcept { return depth_; }
  const Hyperparams& hyper() const noexcept { return hyper_; }
  const DirectedNetwork& network() const noexcept { return network_; }
  std::int64_t iteration() const noexcept { return iteration_; }
  const CommunityTree& tree() const noexcept { return tree_; }

  /// Canonically labeled paths.
  PathAssignment paths() const;
  LevelAssignments levels() const;
  Level donor_level(int i, int j) const { return donor_[pair_index(i, j)]; }
  Level receiver_level(int i, int j) const { return receiver_[pair_index(i, j)]; }
  std::span<const NodeId> node_path(int actor) const {
    return {paths_.data() + static_cast<std::size_t>(actor) * depth_,
            static_cast<std::size_t>(depth_)};
  }

  /// Counts keyed by the labeled entry (for comparison with `recount`).
  CompatibilityStats labeled_stats() const;
  const BasicCompatibilityStats<std::uint64_t>& node_stats() const noexcept { return stats_; }

  // Single-site moves.
  void sample_level(int i, int j, Side side, Rng& rng);
  void sample_path(int actor, Rng& rng);
  /// Every donor level (i, j) in lexicographic order, then every receiver
  /// level, then every path by actor index (or one random permutation of all
  /// those sites).
  void sweep(Rng& rng, ScanOrder order = ScanOrder::kFixed);

  /// Normalized conditional of the chosen indicator over 1..K. Leaves the
  /// state unchanged.
  std::vector<double> level_conditional(int i, int j, Side side);
  /// Every candidate path with its normalized probability (all 0 if no
  /// candidate can explain the actor's edges). Leaves the state unchanged.
  std::vector<PathCandidate> path_conditional(int actor);
  /// Canonical assignment obtained by moving `actor` onto `candidate`.
  PathAssignment paths_with(int actor, const PathCandidate& candidate) const;

  /// log p(E, z, c): collapsed Beta-Bernoulli terms over realized entries,
  /// nCRP log prior of the tree, and collapsed level-count terms per actor.
  double complete_log_likelihood() const;

  /// True when the incremental counts equal a from-scratch recount.
  bool stats_consistent() const;
  /// Observed edges whose current resolution is Incompatible.
  std::int64_t incompatible_edge_count() const;

  /// Swaps in a new edge set over the same actors and rebuilds the counts.
  void replace_network(DirectedNetwork network);

 private:
  static constexpr std::uint64_t kIncompatible = std::numeric_limits<std::uint64_t>::max();

  std::size_t pair_index(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) * n_ + j;
  }
  NodeId node_at(int actor, int level) const noexcept {
    return level == 0 ? kRootNode : paths_[static_cast<std::size_t>(actor) * depth_ + level - 1];
  }
  static std::uint64_t entry_key(NodeId donor_child, NodeId receiver_child) noexcept {
    return (static_cast<std::uint64_t>(donor_child) << 32) | receiver_child;
  }
  std::uint64_t resolve(int i, int j) const noexcept;
  void add_pair(int i, int j);
  void remove_pair(int i, int j);
  void detach_incident(int actor);
  void attach_incident(int actor);
  int* level_counts(int actor) noexcept {
    return level_counts_.data() + static_cast<std::size_t>(actor) * depth_;
  }
  void level_weights(int i, int j, Side side, std::vector<double>& out);
  double entry_term(std::uint64_t key, std::int64_t r, std::int64_t s);
  double fresh_term(std::int64_t r, std::int64_t s);
  /// Scores every candidate for an actor that has been fully detached.
  void score_candidates(int actor, std::vector<PathCandidate>& out);
  void rebuild_stats();

  DirectedNetwork network_;
  Hyperparams hyper_;
  int n_;
  int depth_;
  std::vector<NodeId> paths_;  // N x K node ids; filled while tree_ is built
  CommunityTree tree_;
  std::vector<std::uint8_t> donor_;
  std::vector<std::uint8_t> receiver_;
  std::vector<int> level_counts_;
  BasicCompatibilityStats<std::uint64_t> stats_;
  LevelCountPrior level_prior_;
  LogGammaTable lg1_;
  LogGammaTable lg2_;
  LogGammaTable lg12_;
  std::int64_t iteration_ = 0;

  // path-sampling scratch, indexed by node id
  struct Tally {
    std::int32_t donor_ones = 0, donor_zeros = 0, recv_ones = 0, recv_zeros = 0;
  };
  std::vector<Tally> tally_;
  std::vector<std::int32_t> ones_under_;
  std::vector<std::uint32_t> group_begin_;
  std::vector<std::uint32_t> group_end_;
  std::vector<NodeId> touched_;
  std::vector<double> weights_;
};

/// Batch version of SamplerState::complete_log_likelihood over labeled inputs.
double complete_log_likelihood(const DirectedNetwork& network, const PathAssignment& paths,
                               const LevelAssignments& levels, const Hyperparams& hyper);

/// nCRP log prior of a full assignment (exchangeable closed form).
double ncrp_log_prior(const PathAssignment& paths, double gamma);

struct ChainSample {
  std::int64_t iteration = 0;
  PathAssignment paths;
  LevelAssignments levels;
  double log_likelihood = 0.0;
};

struct ChainResult {
  std::vector<ChainSample> samples;
  std::vector<double> trace;  // complete log-likelihood after iterations 1..T
  std::uint64_t seed = 0;
};

/// Called after every iteration with (iteration, log-likelihood).
using ChainObserver = std::function<void(std::int64_t, double)>;

/// Initializes from the prior, runs burn-in then retains `n_samples` states
/// every `lag` iterations. Deterministic given `config.seed`.
ChainResult run_chain(const DirectedNetwork& network, const Hyperparams& hyper,
                      const ChainConfig& config, const ChainObserver& observer = {});

}  // namespace hmmsb
