#include "hmmsb/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hmmsb {

void ChainConfig::validate() const {
  if (burn_in < 0) throw UsageError("burn-in must be >= 0");
  if (n_samples < 1) throw UsageError("sample count must be >= 1");
  if (lag < 1) throw UsageError("lag must be >= 1");
}

// ---------------------------------------------------------------------------

double level_likelihood_term(const EdgeCounts& excluding_pair, bool edge, bool compatible,
                             const Hyperparams& hyper) {
  if (!compatible) return edge ? 0.0 : 1.0;
  const double a = static_cast<double>(excluding_pair.ones);
  const double b = static_cast<double>(excluding_pair.zeros);
  const double num = edge ? a + hyper.lambda1 : b + hyper.lambda2;
  return num / (a + b + hyper.lambda1 + hyper.lambda2);
}

double level_prior_term(std::span<const int> counts, Level k, const Hyperparams& hyper) {
  const int depth = static_cast<int>(counts.size());
  if (k < 1 || k > depth) throw UsageError("level outside 1..K");
  // at_least[u] = #[z >= u + 1]
  std::vector<double> at_least(static_cast<std::size_t>(depth) + 1, 0.0);
  for (int u = depth - 1; u >= 0; --u) at_least[u] = at_least[u + 1] + counts[u];
  const double a = hyper.stick_a();
  const double b = hyper.stick_b();
  double p = (a + counts[k - 1]) / (hyper.pi + at_least[k - 1]);
  for (int u = 0; u < k - 1; ++u) {
    p *= (b + at_least[u + 1]) / (hyper.pi + at_least[u]);
  }
  return p;
}

std::vector<double> level_prior_distribution(std::span<const int> counts, const Hyperparams& hyper) {
  std::vector<double> p(counts.size());
  double total = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    p[k] = level_prior_term(counts, static_cast<Level>(k) + 1, hyper);
    total += p[k];
  }
  for (double& v : p) v /= total;
  return p;
}

double log_entry_ratio(const EdgeCounts& existing, const EdgeCounts& incident,
                       const Hyperparams& hyper) {
  const double g = static_cast<double>(existing.ones);
  const double h = static_cast<double>(existing.zeros);
  const double r = static_cast<double>(incident.ones);
  const double s = static_cast<double>(incident.zeros);
  const double l1 = hyper.lambda1;
  const double l2 = hyper.lambda2;
  return std::lgamma(g + h + l1 + l2) - std::lgamma(g + l1) - std::lgamma(h + l2) +
         std::lgamma(g + r + l1) + std::lgamma(h + s + l2) - std::lgamma(g + h + r + s + l1 + l2);
}

double log_path_likelihood(std::span<const EntryTally> entries, const Hyperparams& hyper) {
  double total = 0.0;
  for (const auto& e : entries) total += log_entry_ratio(e.existing, e.incident, hyper);
  return total;
}

// ---------------------------------------------------------------------------

namespace {
const Hyperparams& validated(const Hyperparams& hyper) {
  hyper.validate();
  return hyper;
}
}  // namespace

SamplerState::SamplerState(DirectedNetwork network, const Hyperparams& hyper,
                           const PathAssignment& paths, const LevelAssignments& levels)
    : network_(std::move(network)),
      hyper_(validated(hyper)),
      n_(network_.size()),
      depth_(hyper.max_depth),
      tree_(CommunityTree::from_paths(paths, paths_)),
      level_prior_(hyper, n_ > 0 ? 2 * (n_ - 1) : 0),
      lg1_(hyper.lambda1),
      lg2_(hyper.lambda2),
      lg12_(hyper.lambda1 + hyper.lambda2) {
  if (paths.size() != n_ || paths.depth() != depth_ || levels.size() != n_) {
    throw UsageError("state components disagree on N or K");
  }
  paths.validate();
  donor_.assign(static_cast<std::size_t>(n_) * n_, 1);
  receiver_.assign(static_cast<std::size_t>(n_) * n_, 1);
  level_counts_.assign(static_cast<std::size_t>(n_) * depth_, 0);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (i == j) continue;
      const Level zd = levels.donor(i, j);
      const Level zr = levels.receiver(i, j);
      if (zd < 1 || zd > depth_ || zr < 1 || zr > depth_) throw InputError("level outside 1..K");
      donor_[pair_index(i, j)] = static_cast<std::uint8_t>(zd);
      receiver_[pair_index(i, j)] = static_cast<std::uint8_t>(zr);
      level_counts(i)[zd - 1]++;
      level_counts(j)[zr - 1]++;
    }
  }
  rebuild_stats();
}

SamplerState SamplerState::from_prior(DirectedNetwork network, const Hyperparams& hyper, Rng& rng) {
  hyper.validate();
  const int n = network.size();
  PathAssignment paths = sample_ncrp_paths(n, hyper, rng);
  LevelAssignments levels = sample_prior_levels(n, hyper, rng);
  return SamplerState(std::move(network), hyper, paths, levels);
}

void SamplerState::rebuild_stats() {
  stats_.clear();
  stats_.reserve(static_cast<std::size_t>(tree_.live_nodes()) * 4);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (i != j) add_pair(i, j);
    }
  }
}

void SamplerState::replace_network(DirectedNetwork network) {
  if (network.size() != n_) throw UsageError("replacement network has a different size");
  network_ = std::move(network);
  rebuild_stats();
}

PathAssignment SamplerState::paths() const { return tree_.to_paths(paths_, n_); }

LevelAssignments SamplerState::levels() const {
  LevelAssignments out(n_);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (i == j) continue;
      out.set_donor(i, j, donor_[pair_index(i, j)]);
      out.set_receiver(i, j, receiver_[pair_index(i, j)]);
    }
  }
  return out;
}

CompatibilityStats SamplerState::labeled_stats() const {
  return recount(network_, paths(), levels());
}

std::uint64_t SamplerState::resolve(int i, int j) const noexcept {
  const std::size_t p = pair_index(i, j);
  const int coarse = std::min(donor_[p], receiver_[p]);
  if (coarse >= 2 && node_at(i, coarse - 1) != node_at(j, coarse - 1)) return kIncompatible;
  return entry_key(node_at(i, coarse), node_at(j, coarse));
}

void SamplerState::add_pair(int i, int j) {
  const std::uint64_t key = resolve(i, j);
  if (key != kIncompatible) stats_.add(key, network_.edge(i, j));
}

void SamplerState::remove_pair(int i, int j) {
  const std::uint64_t key = resolve(i, j);
  if (key != kIncompatible) stats_.remove(key, network_.edge(i, j));
}

// -- level sampling ----------------------------------------------------------

void SamplerState::level_weights(int i, int j, Side side, std::vector<double>& out) {
  const std::size_t p = pair_index(i, j);
  std::uint8_t& slot = side == Side::kDonor ? donor_[p] : receiver_[p];
  const int owner = side == Side::kDonor ? i : j;
  const int* counts = level_counts(owner);
  const bool edge = network_.edge(i, j);
  const std::uint8_t original = slot;

  const double a = hyper_.stick_a();
  const double b = hyper_.stick_b();
  int at_least = 0;
  for (int u = 0; u < depth_; ++u) at_least += counts[u];

  out.resize(static_cast<std::size_t>(depth_));
  double stick_rest = 1.0;  // prod_{u<k} E[1 - V_u]
  for (int k = 1; k <= depth_; ++k) {
    const int here = counts[k - 1];
    const double prior = stick_rest * (a + here) / (hyper_.pi + at_least);
    stick_rest *= (b + (at_least - here)) / (hyper_.pi + at_least);
    at_least -= here;

    slot = static_cast<std::uint8_t>(k);
    const std::uint64_t key = resolve(i, j);
    double lik;
    if (key == kIncompatible) {
      lik = edge ? 0.0 : 1.0;
    } else {
      const EdgeCounts c = stats_.counts(key);
      const double ones = static_cast<double>(c.ones);
      const double zeros = static_cast<double>(c.zeros);
      lik = (edge ? ones + hyper_.lambda1 : zeros + hyper_.lambda2) /
            (ones + zeros + hyper_.lambda1 + hyper_.lambda2);
    }
    out[static_cast<std::size_t>(k - 1)] = lik * prior;
  }
  slot = original;
}

void SamplerState::sample_level(int i, int j, Side side, Rng& rng) {
  if (i == j) throw UsageError("no level indicator on the diagonal");
  const std::size_t p = pair_index(i, j);
  std::uint8_t& slot = side == Side::kDonor ? donor_[p] : receiver_[p];
  int* counts = level_counts(side == Side::kDonor ? i : j);

  remove_pair(i, j);
  counts[slot - 1]--;
  level_weights(i, j, side, weights_);
  const std::size_t pick = rng.categorical(weights_);
  if (pick >= weights_.size()) throw InternalFault("level conditional has no mass");
  slot = static_cast<std::uint8_t>(pick + 1);
  counts[slot - 1]++;
  add_pair(i, j);
}

std::vector<double> SamplerState::level_conditional(int i, int j, Side side) {
  if (i == j) throw UsageError("no level indicator on the diagonal");
  const std::size_t p = pair_index(i, j);
  const std::uint8_t slot = side == Side::kDonor ? donor_[p] : receiver_[p];
  int* counts = level_counts(side == Side::kDonor ? i : j);
  remove_pair(i, j);
  counts[slot - 1]--;
  std::vector<double> w;
  level_weights(i, j, side, w);
  counts[slot - 1]++;
  add_pair(i, j);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0)) throw InternalFault("level conditional has no mass");
  for (double& v : w) v /= total;
  return w;
}

// -- path sampling -----------------------------------------------------------

void SamplerState::detach_incident(int actor) {
  for (int j = 0; j < n_; ++j) {
    if (j == actor) continue;
    remove_pair(actor, j);
    remove_pair(j, actor);
  }
}

void SamplerState::attach_incident(int actor) {
  for (int j = 0; j < n_; ++j) {
    if (j == actor) continue;
    add_pair(actor, j);
    add_pair(j, actor);
  }
}

double SamplerState::entry_term(std::uint64_t key, std::int64_t r, std::int64_t s) {
  if (r + s == 0) return 0.0;
  const EdgeCounts c = stats_.counts(key);
  const std::int64_t g = c.ones;
  const std::int64_t h = c.zeros;
  return lg12_(g + h) - lg1_(g) - lg2_(h) + lg1_(g + r) + lg2_(h + s) - lg12_(g + h + r + s);
}

double SamplerState::fresh_term(std::int64_t r, std::int64_t s) {
  if (r + s == 0) return 0.0;
  return lg12_(0) - lg1_(0) - lg2_(0) + lg1_(r) + lg2_(s) - lg12_(r + s);
}

void SamplerState::score_candidates(int actor, std::vector<PathCandidate>& out) {
  out.clear();
  const std::size_t cap = tree_.capacity();
  if (tally_.size() < cap) {
    tally_.resize(cap);
    ones_under_.resize(cap, 0);
    group_begin_.resize(cap, 0);
    group_end_.resize(cap, 0);
  }

  // Tally incident pairs by the counterpart's node at the coarse level. Each
  // such pair can only be compatible under candidates passing through that
  // node's parent.
  std::vector<std::int64_t> ones_at_level(static_cast<std::size_t>(depth_) + 1, 0);
  touched_.clear();
  auto tally = [&](int other, int coarse, bool edge, bool as_donor) {
    const NodeId y = node_at(other, coarse);
    Tally& t = tally_[y];
    if (t.donor_ones + t.donor_zeros + t.recv_ones + t.recv_zeros == 0) touched_.push_back(y);
    if (as_donor) {
      (edge ? t.donor_ones : t.donor_zeros)++;
    } else {
      (edge ? t.recv_ones : t.recv_zeros)++;
    }
    if (edge) {
      ones_at_level[static_cast<std::size_t>(coarse)]++;
      ones_under_[tree_.parent(y)]++;
    }
  };
  for (int j = 0; j < n_; ++j) {
    if (j == actor) continue;
    const std::size_t out_pair = pair_index(actor, j);
    tally(j, std::min(donor_[out_pair], receiver_[out_pair]), network_.edge(actor, j), true);
    const std::size_t in_pair = pair_index(j, actor);
    tally(j, std::min(donor_[in_pair], receiver_[in_pair]), network_.edge(j, actor), false);
  }
  std::sort(touched_.begin(), touched_.end(), [&](NodeId x, NodeId y) {
    const NodeId px = tree_.parent(x), py = tree_.parent(y);
    return px != py ? px < py : x < y;
  });
  for (std::uint32_t k = 0; k < touched_.size(); ++k) {
    const NodeId parent = tree_.parent(touched_[k]);
    if (k == 0 || tree_.parent(touched_[k - 1]) != parent) group_begin_[parent] = k;
    group_end_[parent] = k + 1;
  }

  const double log_gamma = std::log(hyper_.gamma);
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  // Likelihood contribution of the level-(depth(q)+1) pairs when the actor
  // takes child x of q (x == kRootNode stands for a fresh branch).
  auto branch_term = [&](NodeId q, NodeId x, bool fresh) {
    double total = 0.0;
    for (std::uint32_t k = group_begin_[q]; k < group_end_[q]; ++k) {
      const NodeId y = touched_[k];
      const Tally& t = tally_[y];
      if (fresh) {
        total += fresh_term(t.donor_ones, t.donor_zeros) + fresh_term(t.recv_ones, t.recv_zeros);
      } else if (x == y) {
        total += entry_term(entry_key(x, x), t.donor_ones + t.recv_ones, t.donor_zeros + t.recv_zeros);
      } else {
        total += entry_term(entry_key(x, y), t.donor_ones, t.donor_zeros) +
                 entry_term(entry_key(y, x), t.recv_ones, t.recv_zeros);
      }
    }
    return total;
  };

  struct Frame {
    NodeId node;
    int depth;
    double log_prior;
    double log_lik;
  };
  std::vector<Frame> stack{{kRootNode, 0, 0.0, 0.0}};
  std::vector<NodeId> chain;
  std::vector<NodeId> kids;
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    const int level = f.depth + 1;
    const bool compatible =
        std::isfinite(f.log_lik) &&
        ones_under_[f.node] == ones_at_level[static_cast<std::size_t>(level)];
    const double denom = std::log(static_cast<double>(tree_.count(f.node)) + hyper_.gamma);

    // chain of existing nodes down to f.node
    chain.clear();
    for (NodeId n = f.node; n != kRootNode; n = tree_.parent(n)) chain.push_back(n);
    std::reverse(chain.begin(), chain.end());

    // Fresh branch below f.node; deeper levels are fresh too and can only
    // host non-edges.
    {
      PathCandidate c;
      c.existing = chain;
      c.log_prior = f.log_prior + log_gamma - denom;
      double lik = compatible ? f.log_lik + branch_term(f.node, kRootNode, true) : kNegInf;
      for (int deeper = level + 1; deeper <= depth_; ++deeper) {
        if (ones_at_level[static_cast<std::size_t>(deeper)] > 0) lik = kNegInf;
      }
      c.log_likelihood = lik;
      out.push_back(std::move(c));
    }

    kids.clear();
    tree_.for_each_occupied_child(f.node, [&](NodeId x) { kids.push_back(x); });
    // Reverse push so children are expanded in tree order.
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
      const NodeId x = *it;
      const double prior = f.log_prior + std::log(static_cast<double>(tree_.count(x))) - denom;
      const double lik = compatible ? f.log_lik + branch_term(f.node, x, false) : kNegInf;
      if (level == depth_) {
        PathCandidate c;
        c.existing = chain;
        c.existing.push_back(x);
        c.log_prior = prior;
        c.log_likelihood = lik;
        out.push_back(std::move(c));
      } else {
        stack.push_back({x, level, prior, lik});
      }
    }
  }

  // reset scratch
  for (NodeId y : touched_) {
    tally_[y] = Tally{};
    const NodeId parent = tree_.parent(y);
    ones_under_[parent] = 0;
    group_begin_[parent] = 0;
    group_end_[parent] = 0;
  }

  weights_.resize(out.size());
  for (std::size_t k = 0; k < out.size(); ++k) weights_[k] = out[k].log_prior + out[k].log_likelihood;
  const double norm = log_sum_exp(weights_);
  if (!std::isfinite(norm)) return;  // leaves every probability at 0
  for (std::size_t k = 0; k < out.size(); ++k) out[k].probability = std::exp(weights_[k] - norm);
}

void SamplerState::sample_path(int actor, Rng& rng) {
  std::vector<PathCandidate> candidates;
  detach_incident(actor);
  auto old_path = node_path(actor);
  std::vector<NodeId> previous(old_path.begin(), old_path.end());
  tree_.detach(previous);
  score_candidates(actor, candidates);

  weights_.resize(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) weights_[k] = candidates[k].probability;
  const std::size_t pick = rng.categorical(weights_);
  if (pick >= candidates.size()) {
    tree_.attach(previous);
    attach_incident(actor);
    // The current path is itself a candidate, so this needs an incident
    // observed edge that is already Incompatible (a zero-probability start).
    // Stay put and let the level updates repair it.
    for (int j = 0; j < n_; ++j) {
      if (j == actor) continue;
      if ((network_.edge(actor, j) && resolve(actor, j) == kIncompatible) ||
          (network_.edge(j, actor) && resolve(j, actor) == kIncompatible)) {
        return;
      }
    }
    throw InternalFault("every candidate path has zero probability");
  }

  const PathCandidate& chosen = candidates[pick];
  NodeId* path = paths_.data() + static_cast<std::size_t>(actor) * depth_;
  NodeId node = kRootNode;
  for (int d = 0; d < depth_; ++d) {
    node = static_cast<std::size_t>(d) < chosen.existing.size() ? chosen.existing[d]
                                                                  : tree_.add_child(node);
    path[d] = node;
  }
  tree_.attach(node_path(actor));
  tree_.prune(previous);
  attach_incident(actor);
}

std::vector<PathCandidate> SamplerState::path_conditional(int actor) {
  std::vector<PathCandidate> candidates;
  detach_incident(actor);
  tree_.detach(node_path(actor));
  score_candidates(actor, candidates);
  tree_.attach(node_path(actor));
  attach_incident(actor);
  return candidates;
}

PathAssignment SamplerState::paths_with(int actor, const PathCandidate& candidate) const {
  // Node ids are unique across the tree, so they serve as (non-canonical)
  // branch labels; fresh branches get ids past the current capacity.
  PathAssignment labeled(n_, depth_);
  for (int i = 0; i < n_; ++i) {
    auto path = labeled.path(i);
    for (int d = 0; d < depth_; ++d) path[d] = static_cast<int>(node_at(i, d + 1)) + 1;
  }
  auto path = labeled.path(actor);
  for (int d = 0; d < depth_; ++d) {
    path[d] = static_cast<std::size_t>(d) < candidate.existing.size()
                  ? static_cast<int>(candidate.existing[d]) + 1
                  : static_cast<int>(tree_.capacity()) + 1 + d;
  }
  labeled.canonicalize();
  return labeled;
}

// -- sweep -------------------------------------------------------------------

void SamplerState::sweep(Rng& rng, ScanOrder order) {
  if (order == ScanOrder::kFixed) {
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (i != j) sample_level(i, j, Side::kDonor, rng);
      }
    }
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (i != j) sample_level(i, j, Side::kReceiver, rng);
      }
    }
    for (int a = 0; a < n_; ++a) sample_path(a, rng);
  } else {
    // site encoding: [0, n*n) donor, [n*n, 2n*n) receiver, then paths
    const std::size_t nn = static_cast<std::size_t>(n_) * n_;
    std::vector<std::size_t> sites;
    sites.reserve(2 * nn + n_);
    for (std::size_t s = 0; s < 2 * nn; ++s) {
      const std::size_t p = s % nn;
      if (p / n_ != p % n_) sites.push_back(s);
    }
    for (int a = 0; a < n_; ++a) sites.push_back(2 * nn + a);
    rng.shuffle(sites);
    for (std::size_t s : sites) {
      if (s >= 2 * nn) {
        sample_path(static_cast<int>(s - 2 * nn), rng);
      } else {
        const std::size_t p = s % nn;
        sample_level(static_cast<int>(p / n_), static_cast<int>(p % n_),
                     s < nn ? Side::kDonor : Side::kReceiver, rng);
      }
    }
  }
  ++iteration_;
#ifndef NDEBUG
  if (!stats_consistent()) throw InternalFault("incremental counts diverged from recount");
#endif
}

// -- diagnostics ---------------------------------------------------------------

bool SamplerState::stats_consistent() const {
  BasicCompatibilityStats<std::uint64_t> fresh;
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (i == j) continue;
      const std::uint64_t key = resolve(i, j);
      if (key != kIncompatible) fresh.add(key, network_.edge(i, j));
    }
  }
  return fresh == stats_;
}

std::int64_t SamplerState::incompatible_edge_count() const {
  std::int64_t bad = 0;
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (i != j && network_.edge(i, j) && resolve(i, j) == kIncompatible) ++bad;
    }
  }
  return bad;
}

double SamplerState::complete_log_likelihood() const {
  double ll = 0.0;
  for (const auto& [key, c] : stats_.map()) {
    ll += log_beta_bernoulli(c.ones, c.zeros, hyper_.lambda1, hyper_.lambda2);
  }
  if (incompatible_edge_count() > 0) return -std::numeric_limits<double>::infinity();

  // nCRP: each occupied internal node with children counts c_1..c_d over n
  // actors contributes gamma^d prod Gamma(c) Gamma(gamma) / Gamma(gamma + n).
  const double lg_gamma = std::lgamma(hyper_.gamma);
  const double log_gamma = std::log(hyper_.gamma);
  std::vector<NodeId> stack{kRootNode};
  while (!stack.empty()) {
    const NodeId q = stack.back();
    stack.pop_back();
    if (tree_.node_depth(q) >= depth_ || tree_.count(q) == 0) continue;
    ll += lg_gamma - std::lgamma(hyper_.gamma + tree_.count(q));
    tree_.for_each_occupied_child(q, [&](NodeId c) {
      ll += log_gamma + std::lgamma(static_cast<double>(tree_.count(c)));
      stack.push_back(c);
    });
  }

  if (n_ > 1) {
    for (int a = 0; a < n_; ++a) {
      const int* counts = level_counts_.data() + static_cast<std::size_t>(a) * depth_;
      ll += level_prior_.log_sequence_probability(std::span<const int>(counts, depth_));
    }
  }
  return ll;
}

// ---------------------------------------------------------------------------

double ncrp_log_prior(const PathAssignment& paths, double gamma) {
  const HierarchyTree tree = HierarchyTree::build(paths);
  double lp = 0.0;
  for (const auto& node : tree.nodes()) {
    if (static_cast<int>(node.prefix.size()) >= paths.depth() || node.occupancy == 0) continue;
    lp += std::lgamma(gamma) - std::lgamma(gamma + node.occupancy);
    for (std::size_t c : node.children) {
      lp += std::log(gamma) + std::lgamma(static_cast<double>(tree.nodes()[c].occupancy));
    }
  }
  return lp;
}

double complete_log_likelihood(const DirectedNetwork& network, const PathAssignment& paths,
                               const LevelAssignments& levels, const Hyperparams& hyper) {
  const int n = network.size();
  if (pair_census(network, paths, levels).incompatible_edges > 0) {
    return -std::numeric_limits<double>::infinity();
  }
  double ll = 0.0;
  const auto stats = recount(network, paths, levels);
  for (const auto& [key, c] : stats.map()) {
    ll += log_beta_bernoulli(c.ones, c.zeros, hyper.lambda1, hyper.lambda2);
  }
  ll += ncrp_log_prior(paths, hyper.gamma);
  if (n > 1) {
    const LevelCountPrior prior(hyper, 2 * (n - 1));
    std::vector<int> counts(static_cast<std::size_t>(hyper.max_depth));
    for (int a = 0; a < n; ++a) {
      std::fill(counts.begin(), counts.end(), 0);
      for (int j = 0; j < n; ++j) {
        if (j == a) continue;
        counts[levels.donor(a, j) - 1]++;
        counts[levels.receiver(j, a) - 1]++;
      }
      ll += prior.log_sequence_probability(counts);
    }
  }
  return ll;
}

ChainResult run_chain(const DirectedNetwork& network, const Hyperparams& hyper,
                      const ChainConfig& config, const ChainObserver& observer) {
  config.validate();
  hyper.validate();
  ChainResult result;
  result.seed = config.seed;
  Rng root(config.seed);
  Rng init = root.split(0);
  Rng moves = root.split(1);
  SamplerState state = SamplerState::from_prior(network, hyper, init);

  const std::int64_t total = config.total_iterations();
  result.trace.reserve(static_cast<std::size_t>(total));
  for (std::int64_t t = 1; t <= total; ++t) {
    state.sweep(moves, config.scan);
    const double ll = state.complete_log_likelihood();
    result.trace.push_back(ll);
    if (observer) observer(t, ll);
    if (t > config.burn_in && (t - config.burn_in) % config.lag == 0) {
      if (state.incompatible_edge_count() != 0) {
        throw InternalFault("retained sample contains an edge with zero probability");
      }
      result.samples.push_back({t, state.paths(), state.levels(), ll});
    }
  }
  return result;
}

}  // namespace hmmsb
