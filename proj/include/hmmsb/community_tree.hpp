#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hmmsb/model.hpp"

namespace hmmsb {

using NodeId = std::uint32_t;
inline constexpr NodeId kRootNode = 0;

/// Mutable community tree keyed by stable node ids, used by the sampler and
/// the prior samplers. A path is the list of node ids at depths 1..K.
///
/// Node ids survive relabeling, so compatibility entries can be keyed by the
/// (donor child, receiver child) node pair; the shared parent is implied.
class CommunityTree {
 public:
  explicit CommunityTree(int depth);

  int depth() const noexcept { return depth_; }
  NodeId parent(NodeId node) const { return nodes_[node].parent; }
  int node_depth(NodeId node) const { return nodes_[node].depth; }
  int count(NodeId node) const { return nodes_[node].count; }
  bool alive(NodeId node) const { return nodes_[node].alive; }
  const std::vector<NodeId>& children(NodeId node) const { return nodes_[node].children; }
  /// One past the largest node id ever handed out.
  std::size_t capacity() const noexcept { return nodes_.size(); }
  std::size_t live_nodes() const noexcept { return nodes_.size() - free_.size(); }

  /// Appends a new empty child under `parent`.
  NodeId add_child(NodeId parent);

  /// Increments occupancy along `path` (and the root).
  void attach(std::span<const NodeId> path);
  /// Decrements occupancy along `path`. Nodes reaching zero stay allocated
  /// until `prune` is called so the same path can be reattached unchanged.
  void detach(std::span<const NodeId> path);
  /// Frees zero-occupancy nodes along `path`, deepest first.
  void prune(std::span<const NodeId> path);

  /// Live child of `node` with nonzero occupancy (the sampler's view of
  /// "existing" branches while an actor is detached).
  template <class F>
  void for_each_occupied_child(NodeId node, F&& f) const {
    for (NodeId c : nodes_[node].children) {
      if (nodes_[c].count > 0) f(c);
    }
  }

  /// Builds the tree for a labeled assignment; `paths_out` receives the node
  /// path of each actor (N x K, row-major).
  static CommunityTree from_paths(const PathAssignment& paths, std::vector<NodeId>& paths_out);

  /// Canonical labeled form of node paths (N x K, row-major).
  PathAssignment to_paths(std::span<const NodeId> node_paths, int n_actors) const;

 private:
  struct Node {
    NodeId parent = kRootNode;
    int depth = 0;
    int count = 0;
    bool alive = true;
    std::vector<NodeId> children;
  };

  int depth_;
  std::vector<Node> nodes_;
  std::vector<NodeId> free_;
};

}  // namespace hmmsb
