#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hmmsb/errors.hpp"

namespace hmmsb {

/// Interaction level, 1..K. Level 0 is the hierarchy root and is never an
/// interaction level.
using Level = int;

struct Hyperparams {
  double gamma = 1.0;    // nCRP concentration
  double m = 0.5;        // GEM mean parameter, in (0, 1)
  double pi = 0.5;       // GEM variance parameter
  double lambda1 = 0.5;  // Beta prior shape on compatibility entries (edges)
  double lambda2 = 0.5;  // Beta prior shape on compatibility entries (non-edges)
  int max_depth = 2;     // K

  /// Throws UsageError on any out-of-domain value.
  void validate() const;

  double stick_a() const noexcept { return m * pi; }
  double stick_b() const noexcept { return (1.0 - m) * pi; }

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

/// N x N binary adjacency. Self-entries are not stored as edges: `edge(i, i)`
/// is always false and `set_edge(i, i, ...)` is rejected.
class DirectedNetwork {
 public:
  DirectedNetwork() = default;
  explicit DirectedNetwork(int n_actors);

  int size() const noexcept { return n_; }
  bool edge(int src, int dst) const noexcept {
    return adj_[static_cast<std::size_t>(src) * n_ + dst] != 0;
  }
  void set_edge(int src, int dst, bool present);
  std::size_t edge_count() const noexcept;

  /// Optional per-actor display labels; empty or exactly `size()` entries.
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  void set_labels(std::vector<std::string> labels);

  /// Subgraph induced by `actors`, renumbered 0..actors.size()-1 in order.
  DirectedNetwork induced(std::span<const int> actors) const;

  friend bool operator==(const DirectedNetwork&, const DirectedNetwork&) = default;

 private:
  int n_ = 0;
  std::vector<std::uint8_t> adj_;
  std::vector<std::string> labels_;
};

/// Per-actor community paths c_i = (c_i1..c_iK). Branch labels are local to
/// their parent node.
class PathAssignment {
 public:
  PathAssignment() = default;
  /// Every actor on path (1, ..., 1).
  PathAssignment(int n_actors, int depth);

  int size() const noexcept { return n_; }
  int depth() const noexcept { return depth_; }

  std::span<const int> path(int actor) const {
    return {labels_.data() + static_cast<std::size_t>(actor) * depth_,
            static_cast<std::size_t>(depth_)};
  }
  std::span<int> path(int actor) {
    return {labels_.data() + static_cast<std::size_t>(actor) * depth_,
            static_cast<std::size_t>(depth_)};
  }
  void set_path(int actor, std::span<const int> path);

  /// True when actors a and b agree on their first `length` branches.
  bool shares_prefix(int a, int b, int length) const;

  /// Relabels children of every node to 1..d in order of first visit when
  /// scanning actors 0..N-1. Two assignments describing the same nested
  /// partition become equal after canonicalization.
  void canonicalize();
  PathAssignment canonical() const;
  bool is_canonical() const;

  /// Throws InputError unless every label is >= 1.
  void validate() const;

  PathAssignment restricted(std::span<const int> actors) const;

  friend bool operator==(const PathAssignment&, const PathAssignment&) = default;

 private:
  int n_ = 0;
  int depth_ = 0;
  std::vector<int> labels_;
};

/// Tree of nodes keyed by path prefix with their occupancy counts, derived
/// from a PathAssignment. Node 0 is the root (empty prefix).
class HierarchyTree {
 public:
  struct Node {
    std::vector<int> prefix;
    int occupancy = 0;
    std::vector<int> actors;            // ascending
    std::vector<std::size_t> children;  // ordered by branch label
  };

  static HierarchyTree build(const PathAssignment& paths);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const Node& root() const { return nodes_.front(); }
  std::optional<std::size_t> find(std::span<const int> prefix) const;
  /// Number of children of `node` whose occupancy is at least `min_size`.
  int branch_count(std::size_t node, int min_size = 1) const;

 private:
  std::vector<Node> nodes_;
};

/// Donor levels z_{i->j} and receiver levels z_{i<-j} for every ordered pair
/// i != j. Diagonal slots are unused.
class LevelAssignments {
 public:
  LevelAssignments() = default;
  /// All indicators set to level 1.
  explicit LevelAssignments(int n_actors);

  int size() const noexcept { return n_; }
  Level donor(int i, int j) const noexcept { return donor_[index(i, j)]; }
  Level receiver(int i, int j) const noexcept { return receiver_[index(i, j)]; }
  void set_donor(int i, int j, Level z);
  void set_receiver(int i, int j, Level z);

  /// Largest level in use (0 when N < 2).
  Level max_level() const noexcept;
  LevelAssignments restricted(std::span<const int> actors) const;

  friend bool operator==(const LevelAssignments&, const LevelAssignments&) = default;

 private:
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) * n_ + j;
  }
  int n_ = 0;
  std::vector<std::uint8_t> donor_;
  std::vector<std::uint8_t> receiver_;
};

/// Identifies one compatibility entry: the parent node (by its prefix) and the
/// donor/receiver child branches beneath it. Its level is parent.size() + 1.
struct BEntryKey {
  std::vector<int> parent;
  int donor_child = 0;
  int receiver_child = 0;

  Level level() const noexcept { return static_cast<Level>(parent.size()) + 1; }

  friend bool operator==(const BEntryKey&, const BEntryKey&) = default;
  friend auto operator<=>(const BEntryKey&, const BEntryKey&) = default;
};

struct BEntryKeyHash {
  std::size_t operator()(const BEntryKey& key) const noexcept;
};

/// Edge-probability resolution. Coarsens to min(z_donor, z_recv) and returns
/// the entry key, or nullopt ("Incompatible", probability zero) when the two
/// paths disagree above the coarse level.
std::optional<BEntryKey> resolve_sb(std::span<const int> donor_path,
                                    std::span<const int> receiver_path, Level z_donor,
                                    Level z_receiver);

struct EdgeCounts {
  std::int64_t ones = 0;
  std::int64_t zeros = 0;

  std::int64_t total() const noexcept { return ones + zeros; }
  friend bool operator==(const EdgeCounts&, const EdgeCounts&) = default;
};

/// Beta-Bernoulli sufficient statistics per compatibility entry. Entries whose
/// counts reach zero are pruned, so two stores holding the same assignments
/// compare equal.
template <class Key, class Hash = std::hash<Key>>
class BasicCompatibilityStats {
 public:
  using Map = std::unordered_map<Key, EdgeCounts, Hash>;

  void add(const Key& key, bool edge) {
    auto& c = map_[key];
    (edge ? c.ones : c.zeros) += 1;
    ++total_;
  }

  void remove(const Key& key, bool edge) {
    auto it = map_.find(key);
    if (it == map_.end() || (edge ? it->second.ones : it->second.zeros) <= 0) {
      throw InternalFault("compatibility count would drop below zero");
    }
    (edge ? it->second.ones : it->second.zeros) -= 1;
    --total_;
    if (it->second.total() == 0) map_.erase(it);
  }

  EdgeCounts counts(const Key& key) const {
    auto it = map_.find(key);
    return it == map_.end() ? EdgeCounts{} : it->second;
  }

  std::size_t entries() const noexcept { return map_.size(); }
  std::int64_t total() const noexcept { return total_; }
  bool empty() const noexcept { return map_.empty(); }
  const Map& map() const noexcept { return map_; }
  void reserve(std::size_t n) { map_.reserve(n); }
  void clear() {
    map_.clear();
    total_ = 0;
  }

  friend bool operator==(const BasicCompatibilityStats& a, const BasicCompatibilityStats& b) {
    return a.total_ == b.total_ && a.map_ == b.map_;
  }

 private:
  Map map_;
  std::int64_t total_ = 0;
};

using CompatibilityStats = BasicCompatibilityStats<BEntryKey, BEntryKeyHash>;

/// Posterior mean of a compatibility entry given its counts.
double point_estimate(const EdgeCounts& counts, const Hyperparams& hyper);

/// From-scratch recount over every ordered pair i != j.
CompatibilityStats recount(const DirectedNetwork& network, const PathAssignment& paths,
                           const LevelAssignments& levels);

struct PairCensus {
  std::int64_t compatible = 0;
  std::int64_t incompatible = 0;
  std::int64_t incompatible_edges = 0;  // E=1 pairs resolving Incompatible
};
PairCensus pair_census(const DirectedNetwork& network, const PathAssignment& paths,
                       const LevelAssignments& levels);

}  // namespace hmmsb
