#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hmmsb/model.hpp"
#include "hmmsb/rng.hpp"

namespace hmmsb {

// -- hierarchy recovery ------------------------------------------------------

/// Pair-counting agreement at one depth: two actors are "together" when their
/// paths share the length-k prefix.
struct F1Components {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// When the truth has no co-clustered pairs at level k, precision, recall and
/// F1 are all 1 if the prediction has none either, else 0.
F1Components f1_at_level(const PathAssignment& predicted, const PathAssignment& truth, Level k);

struct F1Report {
  std::vector<F1Components> per_level;  // index 0 = level 1
  double total = 0.0;                   // mean over levels
};

F1Report f1_report(const PathAssignment& predicted, const PathAssignment& truth);
double total_f1(const PathAssignment& predicted, const PathAssignment& truth);

// -- posterior summaries -----------------------------------------------------

/// Fraction of samples in which actors i and j share the length-k prefix.
class CoassignmentTensor {
 public:
  CoassignmentTensor() = default;
  explicit CoassignmentTensor(std::span<const PathAssignment> samples);

  int size() const noexcept { return n_; }
  int depth() const noexcept { return depth_; }
  double at(int i, int j, Level k) const {
    return values_[(static_cast<std::size_t>(k - 1) * n_ + i) * n_ + j];
  }

 private:
  int n_ = 0;
  int depth_ = 0;
  std::vector<double> values_;
};

/// Actors sharing a level-k position in more than half the samples are
/// linked; connected components of those links, taken level by level inside
/// the level-(k-1) groups, form the consensus tree. Canonical labels.
PathAssignment consensus_paths(std::span<const PathAssignment> samples);
PathAssignment consensus_paths(const CoassignmentTensor& coassignment);

/// Per-indicator majority over samples; ties go to the coarser level.
LevelAssignments mode_levels(std::span<const LevelAssignments> samples);

struct ConsensusResult {
  PathAssignment consensus_paths;
  LevelAssignments level_modes;
  CoassignmentTensor coassignment;
};

ConsensusResult consensus(std::span<const PathAssignment> path_samples,
                          std::span<const LevelAssignments> level_samples);

/// Within each depth-(K-1) node, bottom-level children holding at most
/// `min_size` actors are merged into one new child. Canonical labels.
PathAssignment merge_small_communities(const PathAssignment& paths, int min_size = 5);

// -- marginal likelihood -----------------------------------------------------

struct MarginalEstimate {
  double log_estimate = 0.0;  // log of the mean importance weight
  double std_error = 0.0;     // delta-method standard error of log_estimate
  std::int64_t n_samples = 0;
};

/// Importance-sampling estimate of log p(E | hyper) with the prior as the
/// proposal: paths from the nCRP, levels from the collapsed level prior, each
/// draw weighted by the collapsed Beta-Bernoulli edge likelihood.
MarginalEstimate marginal_likelihood_is(const DirectedNetwork& network, const Hyperparams& hyper,
                                        std::int64_t n_samples, Rng& rng);

/// log p(E | paths, levels) with B integrated out (-inf if an observed edge
/// resolves Incompatible).
double collapsed_edge_log_likelihood(const DirectedNetwork& network, const PathAssignment& paths,
                                     const LevelAssignments& levels, const Hyperparams& hyper);

// -- hyperparameter selection ------------------------------------------------

inline const std::vector<double> kGammaGrid{0.01, 0.1, 0.5, 1.0, 1.5, 2.0};
inline const std::vector<double> kLambdaGrid{0.1, 0.3, 0.5, 0.7, 0.9};

std::vector<Hyperparams> gamma_grid(const Hyperparams& base, std::span<const double> gammas);
/// Every (lambda1, lambda2) pair over `values`, lambda1 outermost.
std::vector<Hyperparams> lambda_grid(const Hyperparams& base, std::span<const double> values);

struct GridCell {
  Hyperparams hyper;
  MarginalEstimate estimate;
};

/// Estimates every cell; cell c draws from `rng.split(c)`, so results do not
/// depend on `threads`.
std::vector<GridCell> evaluate_grid(const DirectedNetwork& network,
                                    std::span<const Hyperparams> grid, std::int64_t n_is_samples,
                                    const Rng& rng, int threads = 1);

/// Highest estimate; ties go to smaller gamma, then smaller lambda1, then
/// smaller lambda2.
std::size_t select_best(std::span<const GridCell> cells);

// -- held-out protocol -------------------------------------------------------

struct HeldoutConfig {
  int splits = 5;
  std::int64_t is_samples = 10000;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct HeldoutSplit {
  int index = 0;
  std::vector<int> train;  // ascending actor ids
  std::vector<int> test;
  std::vector<GridCell> cells;
  Hyperparams selected;
  MarginalEstimate train_estimate;
  MarginalEstimate test_estimate;
};

struct HeldoutResult {
  std::vector<HeldoutSplit> splits;
  double mean_test_log_likelihood = 0.0;
};

/// For each split: partition actors in half at random, select hyperparameters
/// on the training subgraph by estimated marginal likelihood, then estimate
/// the test subgraph's marginal likelihood under them. Test edges never
/// influence selection: partitions and training draws use streams that do not
/// depend on edge data.
HeldoutResult heldout_protocol(const DirectedNetwork& network, std::span<const Hyperparams> grid,
                               const HeldoutConfig& config);

}  // namespace hmmsb
