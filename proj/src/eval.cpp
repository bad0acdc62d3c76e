#include "hmmsb/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include "hmmsb/community_tree.hpp"
#include "hmmsb/generative.hpp"
#include "hmmsb/special.hpp"

namespace hmmsb {
namespace {

std::int64_t pairs_of(std::int64_t n) { return n * (n - 1) / 2; }

// Cluster id of every actor at depth k (actors sharing the length-k prefix).
std::vector<int> cluster_ids(const PathAssignment& paths, Level k) {
  std::map<std::vector<int>, int> ids;
  std::vector<int> out(static_cast<std::size_t>(paths.size()));
  for (int a = 0; a < paths.size(); ++a) {
    auto p = paths.path(a);
    std::vector<int> prefix(p.begin(), p.begin() + k);
    auto [it, inserted] = ids.emplace(std::move(prefix), static_cast<int>(ids.size()));
    out[a] = it->second;
  }
  return out;
}

void check_same_shape(const PathAssignment& a, const PathAssignment& b) {
  if (a.size() != b.size()) throw UsageError("path assignments cover different actor counts");
  if (a.depth() != b.depth()) throw UsageError("path assignments have different depths");
}

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

}  // namespace

// ---------------------------------------------------------------------------

F1Components f1_at_level(const PathAssignment& predicted, const PathAssignment& truth, Level k) {
  check_same_shape(predicted, truth);
  if (k < 1 || k > truth.depth()) throw UsageError("F1 level out of range");
  const int n = truth.size();
  const auto pred_ids = cluster_ids(predicted, k);
  const auto true_ids = cluster_ids(truth, k);

  std::map<int, std::int64_t> pred_sizes, true_sizes;
  std::map<std::pair<int, int>, std::int64_t> joint;
  for (int a = 0; a < n; ++a) {
    ++pred_sizes[pred_ids[a]];
    ++true_sizes[true_ids[a]];
    ++joint[{pred_ids[a], true_ids[a]}];
  }
  std::int64_t together_pred = 0, together_true = 0, both = 0;
  for (const auto& [id, c] : pred_sizes) together_pred += pairs_of(c);
  for (const auto& [id, c] : true_sizes) together_true += pairs_of(c);
  for (const auto& [id, c] : joint) both += pairs_of(c);

  F1Components out;
  out.tp = both;
  out.fp = together_pred - both;
  out.fn = together_true - both;
  out.tn = pairs_of(n) - out.tp - out.fp - out.fn;
  if (together_true == 0) {
    const double v = together_pred == 0 ? 1.0 : 0.0;
    out.precision = out.recall = out.f1 = v;
    return out;
  }
  out.recall = static_cast<double>(out.tp) / static_cast<double>(together_true);
  out.precision =
      together_pred == 0 ? 0.0 : static_cast<double>(out.tp) / static_cast<double>(together_pred);
  const double sum = out.precision + out.recall;
  out.f1 = sum > 0.0 ? 2.0 * out.precision * out.recall / sum : 0.0;
  return out;
}

F1Report f1_report(const PathAssignment& predicted, const PathAssignment& truth) {
  check_same_shape(predicted, truth);
  F1Report report;
  double sum = 0.0;
  for (Level k = 1; k <= truth.depth(); ++k) {
    report.per_level.push_back(f1_at_level(predicted, truth, k));
    sum += report.per_level.back().f1;
  }
  report.total = truth.depth() > 0 ? sum / truth.depth() : 1.0;
  return report;
}

double total_f1(const PathAssignment& predicted, const PathAssignment& truth) {
  return f1_report(predicted, truth).total;
}

// ---------------------------------------------------------------------------

CoassignmentTensor::CoassignmentTensor(std::span<const PathAssignment> samples) {
  if (samples.empty()) throw UsageError("co-assignment needs at least one sample");
  n_ = samples.front().size();
  depth_ = samples.front().depth();
  const std::size_t nn = static_cast<std::size_t>(n_) * n_;
  std::vector<std::uint32_t> counts(nn * depth_, 0);
  std::vector<std::vector<int>> groups;
  for (const auto& s : samples) {
    if (s.size() != n_ || s.depth() != depth_) {
      throw UsageError("samples disagree on actor count or depth");
    }
    for (Level k = 1; k <= depth_; ++k) {
      const auto ids = cluster_ids(s, k);
      groups.assign(static_cast<std::size_t>(n_), {});
      for (int a = 0; a < n_; ++a) groups[ids[a]].push_back(a);
      std::uint32_t* level = counts.data() + static_cast<std::size_t>(k - 1) * nn;
      for (const auto& g : groups) {
        for (int a : g) {
          for (int b : g) ++level[static_cast<std::size_t>(a) * n_ + b];
        }
      }
    }
  }
  values_.resize(counts.size());
  const double denom = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < counts.size(); ++i) values_[i] = counts[i] / denom;
}

PathAssignment consensus_paths(std::span<const PathAssignment> samples) {
  return consensus_paths(CoassignmentTensor(samples));
}

PathAssignment consensus_paths(const CoassignmentTensor& co) {
  const int n = co.size();
  const int depth = co.depth();
  PathAssignment out(n, depth);
  std::vector<int> parent_group(static_cast<std::size_t>(n), 0);
  for (Level k = 1; k <= depth; ++k) {
    UnionFind uf(n);
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        if (parent_group[a] == parent_group[b] && co.at(a, b, k) > 0.5) uf.unite(a, b);
      }
    }
    for (int a = 0; a < n; ++a) {
      const int root = uf.find(a);
      out.path(a)[k - 1] = root + 1;
      parent_group[a] = root;
    }
  }
  out.canonicalize();
  return out;
}

LevelAssignments mode_levels(std::span<const LevelAssignments> samples) {
  if (samples.empty()) throw UsageError("level modes need at least one sample");
  const int n = samples.front().size();
  Level top = 0;
  for (const auto& s : samples) {
    if (s.size() != n) throw UsageError("samples disagree on actor count");
    top = std::max(top, s.max_level());
  }
  LevelAssignments out(n);
  std::vector<int> donor_votes(static_cast<std::size_t>(top) + 1);
  std::vector<int> recv_votes(static_cast<std::size_t>(top) + 1);
  auto mode = [](const std::vector<int>& votes) {
    // max_element returns the first maximum, i.e. the coarsest tied level.
    return static_cast<Level>(std::max_element(votes.begin() + 1, votes.end()) - votes.begin());
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      std::fill(donor_votes.begin(), donor_votes.end(), 0);
      std::fill(recv_votes.begin(), recv_votes.end(), 0);
      for (const auto& s : samples) {
        ++donor_votes[s.donor(i, j)];
        ++recv_votes[s.receiver(i, j)];
      }
      out.set_donor(i, j, mode(donor_votes));
      out.set_receiver(i, j, mode(recv_votes));
    }
  }
  return out;
}

ConsensusResult consensus(std::span<const PathAssignment> path_samples,
                          std::span<const LevelAssignments> level_samples) {
  ConsensusResult out;
  out.coassignment = CoassignmentTensor(path_samples);
  out.consensus_paths = consensus_paths(out.coassignment);
  out.level_modes = mode_levels(level_samples);
  return out;
}

PathAssignment merge_small_communities(const PathAssignment& paths, int min_size) {
  PathAssignment out = paths;
  const int depth = paths.depth();
  if (depth < 1) return out;
  const auto tree = HierarchyTree::build(paths);
  for (const auto& node : tree.nodes()) {
    if (static_cast<int>(node.prefix.size()) != depth - 1) continue;
    std::vector<std::size_t> small;
    int fresh = 0;
    for (std::size_t c : node.children) {
      const auto& child = tree.nodes()[c];
      fresh = std::max(fresh, child.prefix.back() + 1);
      if (child.occupancy <= min_size) small.push_back(c);
    }
    if (small.size() < 2) continue;
    for (std::size_t c : small) {
      for (int a : tree.nodes()[c].actors) out.path(a)[depth - 1] = fresh;
    }
  }
  out.canonicalize();
  return out;
}

// ---------------------------------------------------------------------------

double collapsed_edge_log_likelihood(const DirectedNetwork& network, const PathAssignment& paths,
                                     const LevelAssignments& levels, const Hyperparams& hyper) {
  if (pair_census(network, paths, levels).incompatible_edges > 0) {
    return -std::numeric_limits<double>::infinity();
  }
  double total = 0.0;
  const auto stats = recount(network, paths, levels);
  for (const auto& [key, c] : stats.map()) {
    total += log_beta_bernoulli(c.ones, c.zeros, hyper.lambda1, hyper.lambda2);
  }
  return total;
}

namespace {

// Reusable buffers for one importance-sampling run.
class ImportanceSampler {
 public:
  ImportanceSampler(const DirectedNetwork& network, const Hyperparams& hyper)
      : network_(network),
        hyper_(hyper),
        n_(network.size()),
        depth_(hyper.max_depth),
        level_prior_(hyper, n_ > 1 ? 2 * (n_ - 1) : 0),
        lg1_(hyper.lambda1),
        lg2_(hyper.lambda2),
        lg12_(hyper.lambda1 + hyper.lambda2),
        log_beta_prior_(log_beta(hyper.lambda1, hyper.lambda2)),
        nodes_(static_cast<std::size_t>(n_) * depth_),
        donor_(static_cast<std::size_t>(n_) * n_),
        receiver_(static_cast<std::size_t>(n_) * n_) {}

  double draw_log_weight(Rng& rng) {
    CommunityTree tree(depth_);
    for (int a = 0; a < n_; ++a) {
      sample_ncrp_nodes(tree, std::span<NodeId>(nodes_).subspan(static_cast<std::size_t>(a) * depth_, depth_),
                        hyper_.gamma, rng);
    }
    draw_levels(rng);
    index_cells(tree);

    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (i == j) continue;
        const std::size_t ij = static_cast<std::size_t>(i) * n_ + j;
        const int z = std::min(donor_[ij], receiver_[ij]);
        const NodeId pi = node_at(i, z - 1);
        const bool edge = network_.edge(i, j);
        if (pi != node_at(j, z - 1)) {
          if (edge) return -std::numeric_limits<double>::infinity();
          continue;
        }
        const std::size_t cell = offset_[pi] + local_[node_at(i, z)] * width_[pi] + local_[node_at(j, z)];
        (edge ? ones_ : zeros_)[cell] += 1;
      }
    }
    double total = 0.0;
    for (std::size_t c = 0; c < ones_.size(); ++c) {
      const std::int64_t g = ones_[c], h = zeros_[c];
      if (g + h == 0) continue;
      total += lg1_(g) + lg2_(h) - lg12_(g + h) - log_beta_prior_;
    }
    return total;
  }

 private:
  NodeId node_at(int actor, int level) const {
    return level == 0 ? kRootNode : nodes_[static_cast<std::size_t>(actor) * depth_ + level - 1];
  }

  void draw_levels(Rng& rng) {
    for (int a = 0; a < n_ && n_ > 1; ++a) {
      arrange_levels(level_prior_.sample_counts(rng), slots_, rng);
      std::size_t s = 0;
      for (int j = 0; j < n_; ++j) {
        if (j != a) donor_[static_cast<std::size_t>(a) * n_ + j] = slots_[s++];
      }
      for (int j = 0; j < n_; ++j) {
        if (j != a) receiver_[static_cast<std::size_t>(j) * n_ + a] = slots_[s++];
      }
    }
  }

  // Dense cell layout: parent p owns width[p]^2 cells starting at offset[p];
  // a child's position among its siblings is local[child].
  void index_cells(const CommunityTree& tree) {
    const std::size_t cap = tree.capacity();
    offset_.assign(cap, 0);
    width_.assign(cap, 0);
    local_.assign(cap, 0);
    std::size_t cells = 0;
    for (NodeId p = 0; p < cap; ++p) {
      if (!tree.alive(p) || tree.node_depth(p) >= depth_) continue;
      std::uint32_t w = 0;
      tree.for_each_occupied_child(p, [&](NodeId c) { local_[c] = w++; });
      width_[p] = w;
      offset_[p] = cells;
      cells += static_cast<std::size_t>(w) * w;
    }
    ones_.assign(cells, 0);
    zeros_.assign(cells, 0);
  }

  const DirectedNetwork& network_;
  Hyperparams hyper_;
  int n_;
  int depth_;
  LevelCountPrior level_prior_;
  LogGammaTable lg1_, lg2_, lg12_;
  double log_beta_prior_;
  std::vector<NodeId> nodes_;
  std::vector<std::uint8_t> donor_, receiver_, slots_;
  std::vector<std::size_t> offset_;
  std::vector<std::uint32_t> width_, local_;
  std::vector<std::int32_t> ones_, zeros_;
};

}  // namespace

MarginalEstimate marginal_likelihood_is(const DirectedNetwork& network, const Hyperparams& hyper,
                                        std::int64_t n_samples, Rng& rng) {
  hyper.validate();
  if (n_samples < 1) throw UsageError("importance sampling needs at least one sample");
  ImportanceSampler sampler(network, hyper);
  std::vector<double> log_w(static_cast<std::size_t>(n_samples));
  for (auto& w : log_w) w = sampler.draw_log_weight(rng);

  MarginalEstimate out;
  out.n_samples = n_samples;
  const double top = *std::max_element(log_w.begin(), log_w.end());
  if (!std::isfinite(top)) {
    out.log_estimate = -std::numeric_limits<double>::infinity();
    out.std_error = std::numeric_limits<double>::infinity();
    return out;
  }
  double sum = 0.0, sum_sq = 0.0;
  for (double lw : log_w) {
    const double w = std::exp(lw - top);
    sum += w;
    sum_sq += w * w;
  }
  const double n = static_cast<double>(n_samples);
  const double mean = sum / n;
  out.log_estimate = top + std::log(mean);
  if (n_samples > 1) {
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    out.std_error = std::sqrt(var / n) / mean;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Hyperparams> gamma_grid(const Hyperparams& base, std::span<const double> gammas) {
  std::vector<Hyperparams> out;
  for (double g : gammas) {
    Hyperparams h = base;
    h.gamma = g;
    out.push_back(h);
  }
  return out;
}

std::vector<Hyperparams> lambda_grid(const Hyperparams& base, std::span<const double> values) {
  std::vector<Hyperparams> out;
  for (double l1 : values) {
    for (double l2 : values) {
      Hyperparams h = base;
      h.lambda1 = l1;
      h.lambda2 = l2;
      out.push_back(h);
    }
  }
  return out;
}

std::vector<GridCell> evaluate_grid(const DirectedNetwork& network,
                                    std::span<const Hyperparams> grid, std::int64_t n_is_samples,
                                    const Rng& rng, int threads) {
  if (grid.empty()) throw UsageError("hyperparameter grid is empty");
  for (const auto& h : grid) h.validate();
  std::vector<GridCell> cells(grid.size());
  auto run_cell = [&](std::size_t c) {
    Rng cell_rng = rng.split(c);
    cells[c] = {grid[c], marginal_likelihood_is(network, grid[c], n_is_samples, cell_rng)};
  };
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), grid.size());
  if (workers <= 1) {
    for (std::size_t c = 0; c < grid.size(); ++c) run_cell(c);
    return cells;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c; (c = next.fetch_add(1)) < grid.size();) {
        try {
          run_cell(c);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return cells;
}

std::size_t select_best(std::span<const GridCell> cells) {
  if (cells.empty()) throw UsageError("no grid cells to select from");
  auto better = [](const GridCell& a, const GridCell& b) {
    if (a.estimate.log_estimate != b.estimate.log_estimate) {
      return a.estimate.log_estimate > b.estimate.log_estimate;
    }
    if (a.hyper.gamma != b.hyper.gamma) return a.hyper.gamma < b.hyper.gamma;
    if (a.hyper.lambda1 != b.hyper.lambda1) return a.hyper.lambda1 < b.hyper.lambda1;
    return a.hyper.lambda2 < b.hyper.lambda2;
  };
  std::size_t best = 0;
  for (std::size_t c = 1; c < cells.size(); ++c) {
    if (better(cells[c], cells[best])) best = c;
  }
  return best;
}

// ---------------------------------------------------------------------------

HeldoutResult heldout_protocol(const DirectedNetwork& network, std::span<const Hyperparams> grid,
                               const HeldoutConfig& config) {
  if (config.splits < 1) throw UsageError("held-out protocol needs at least one split");
  if (network.size() < 2) throw UsageError("held-out protocol needs at least two actors");
  const int n = network.size();
  const Rng root(config.seed);
  HeldoutResult out;
  double sum = 0.0;
  for (int s = 0; s < config.splits; ++s) {
    const Rng split_rng = root.split(static_cast<std::uint64_t>(s));
    Rng partition_rng = split_rng.split(0);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    partition_rng.shuffle(order);

    HeldoutSplit split;
    split.index = s;
    split.train.assign(order.begin(), order.begin() + n / 2);
    split.test.assign(order.begin() + n / 2, order.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());

    const DirectedNetwork train = network.induced(split.train);
    split.cells = evaluate_grid(train, grid, config.is_samples, split_rng.split(1), config.threads);
    const std::size_t best = select_best(split.cells);
    split.selected = split.cells[best].hyper;
    split.train_estimate = split.cells[best].estimate;

    Rng test_rng = split_rng.split(2);
    split.test_estimate =
        marginal_likelihood_is(network.induced(split.test), split.selected, config.is_samples, test_rng);
    sum += split.test_estimate.log_estimate;
    out.splits.push_back(std::move(split));
  }
  out.mean_test_log_likelihood = sum / config.splits;
  return out;
}

}  // namespace hmmsb
