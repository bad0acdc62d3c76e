#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "hmmsb/community_tree.hpp"
#include "hmmsb/model.hpp"
#include "hmmsb/rng.hpp"

namespace hmmsb {

/// Stick fractions V_1..V_K and the level distribution theta they induce,
/// renormalized over levels 1..K.
struct MembershipVector {
  std::vector<double> sticks;
  std::vector<double> theta;
};

/// theta_k = V_k * prod_{u<k} (1 - V_u), then renormalized over 1..K.
MembershipVector membership_from_sticks(std::vector<double> sticks);

/// Truncated GEM(m, pi) draw: V_k ~ Beta(m*pi, (1-m)*pi) for k = 1..K.
MembershipVector sample_gem(const Hyperparams& hyper, Rng& rng);

/// Conditional over the next branch below `prefix` given the other actors'
/// paths: existing children in label order, then the fresh branch (the
/// smallest unused positive label).
struct NcrpConditional {
  std::vector<int> labels;
  std::vector<double> probabilities;
  int fresh_label = 1;
  double fresh_probability = 1.0;
  int prefix_count = 0;  // actors sharing the prefix
};

/// `excluded_actor` (if >= 0) is left out of every count.
NcrpConditional ncrp_conditional(const PathAssignment& paths, std::span<const int> prefix,
                                 double gamma, int excluded_actor = -1);

/// Draws a length-K path for a new actor given the actors already in
/// `existing` (restricted to the first `n_existing` actors).
std::vector<int> sample_ncrp_path(const PathAssignment& existing, int n_existing,
                                  const Hyperparams& hyper, Rng& rng);

/// Sequential nCRP draw of N paths, canonical labels.
PathAssignment sample_ncrp_paths(int n_actors, const Hyperparams& hyper, Rng& rng);

/// Node-id variant used by the samplers: attaches a fresh nCRP draw to `tree`
/// and writes its K node ids into `path_out`.
void sample_ncrp_nodes(CommunityTree& tree, std::span<NodeId> path_out, double gamma, Rng& rng);

/// Prior over one actor's 2(N-1) level indicators with theta integrated out:
/// the GEM(m, pi) stick-breaking predictive conditioned on every indicator
/// falling in 1..K. Its single-site conditionals are exactly the renormalized
/// stick-breaking predictive that the collapsed sampler uses.
///
/// Holds suffix tables W_j(r) = log sum over ways of placing r indicators on
/// levels j..K, so count vectors can be drawn exactly level by level.
class LevelCountPrior {
 public:
  LevelCountPrior(const Hyperparams& hyper, int n_indicators);

  int n_indicators() const noexcept { return n_; }
  int depth() const noexcept { return depth_; }

  /// log P(all n indicators <= K) under the untruncated predictive.
  double log_normalizer() const { return log_w_[0][static_cast<std::size_t>(n_)]; }

  /// log-probability of one specific indicator sequence with these level counts.
  double log_sequence_probability(std::span<const int> counts) const;

  /// Level counts (index 0 = level 1) drawn from the conditioned prior.
  std::vector<int> sample_counts(Rng& rng) const;

 private:
  double log_stick_term(int at_level, int beyond) const;
  /// log-weights of placing t = 0..remaining indicators on level j+1.
  void count_log_weights(int j, int remaining, std::vector<double>& out) const;

  int n_;
  int depth_;
  double a_;
  double b_;
  std::vector<double> lg_a_;     // lgamma(a + t)
  std::vector<double> lg_b_;     // lgamma(b + t)
  std::vector<double> lg_ab_;    // lgamma(a + b + t)
  std::vector<double> lg_fact_;  // lgamma(t + 1)
  std::vector<std::vector<double>> log_w_;
  std::vector<double> first_cdf_;  // level-1 count distribution, all n remaining
};

/// Uniformly random sequence with the given per-level counts (index 0 =
/// level 1).
void arrange_levels(std::span<const int> counts, std::vector<std::uint8_t>& slots, Rng& rng);

/// Draws every actor's indicators from LevelCountPrior: counts first, then a
/// uniformly random arrangement over the actor's donor and receiver slots.
LevelAssignments sample_prior_levels(int n_actors, const Hyperparams& hyper, Rng& rng);

/// Fixed compatibility regime: same-child entries at level k take
/// on_diagonal[k-1], all other entries off_diagonal[k-1].
struct BRegime {
  std::vector<double> on_diagonal;
  std::vector<double> off_diagonal;
};

/// Simulation regimes 1..4: on-diagonal low/high noise, off-diagonal low/high noise.
BRegime regime_preset(int regime);

enum class LevelModel {
  kConditioned,        // joint consistent with the collapsed sampler (default)
  kRenormalizedTheta,  // per-actor truncated GEM theta, indicators iid from it
};

struct SimulationConfig {
  int n_actors = 150;
  Hyperparams hyper;
  std::optional<std::vector<double>> fixed_theta;
  std::optional<BRegime> fixed_b;
  LevelModel level_model = LevelModel::kConditioned;

  void validate() const;
};

struct SimulationResult {
  DirectedNetwork network;
  PathAssignment truth_paths;  // canonical
  std::vector<MembershipVector> memberships;
  LevelAssignments levels;
  std::map<BEntryKey, double> realized_b;
  std::uint64_t seed = 0;
};

SimulationResult generate_network(const SimulationConfig& config, Rng& rng);

/// Draws E given fixed paths and levels; compatibility entries are drawn from
/// Beta(lambda1, lambda2) on first touch (or taken from `fixed_b`).
DirectedNetwork sample_edges(const PathAssignment& paths, const LevelAssignments& levels,
                             const Hyperparams& hyper, const std::optional<BRegime>& fixed_b,
                             Rng& rng, std::map<BEntryKey, double>* realized = nullptr);

}  // namespace hmmsb
