#include "hmmsb/community_tree.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>


namespace hmmsb {

CommunityTree::CommunityTree(int depth) : depth_(depth) {
  if (depth < 1) throw UsageError("tree depth must be >= 1");
  nodes_.push_back(Node{});
}

NodeId CommunityTree::add_child(NodeId parent) {
  NodeId id;
  if (!free_.empty()) {
    id = free_.back();
    free_.pop_back();
    nodes_[id] = Node{};
  } else {
    id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(Node{});
  }
  nodes_[id].parent = parent;
  nodes_[id].depth = nodes_[parent].depth + 1;
  nodes_[parent].children.push_back(id);
  return id;
}

void CommunityTree::attach(std::span<const NodeId> path) {
  nodes_[kRootNode].count++;
  for (NodeId n : path) nodes_[n].count++;
}

void CommunityTree::detach(std::span<const NodeId> path) {
  if (nodes_[kRootNode].count <= 0) throw InternalFault("tree occupancy below zero");
  nodes_[kRootNode].count--;
  for (NodeId n : path) {
    if (nodes_[n].count <= 0 || !nodes_[n].alive) throw InternalFault("tree occupancy below zero");
    nodes_[n].count--;
  }
}

void CommunityTree::prune(std::span<const NodeId> path) {
  for (std::size_t d = path.size(); d-- > 0;) {
    const NodeId n = path[d];
    if (!nodes_[n].alive || nodes_[n].count > 0) continue;
    auto& siblings = nodes_[nodes_[n].parent].children;
    siblings.erase(std::find(siblings.begin(), siblings.end(), n));
    nodes_[n].alive = false;
    nodes_[n].children.clear();
    free_.push_back(n);
  }
}

CommunityTree CommunityTree::from_paths(const PathAssignment& paths,
                                        std::vector<NodeId>& paths_out) {
  CommunityTree tree(paths.depth());
  const int depth = paths.depth();
  paths_out.assign(static_cast<std::size_t>(paths.size()) * depth, kRootNode);
  std::map<std::pair<NodeId, int>, NodeId> index;
  for (int i = 0; i < paths.size(); ++i) {
    NodeId node = kRootNode;
    auto path = paths.path(i);
    for (int d = 0; d < depth; ++d) {
      auto [it, inserted] = index.try_emplace({node, path[d]}, 0);
      if (inserted) it->second = tree.add_child(node);
      node = it->second;
      paths_out[static_cast<std::size_t>(i) * depth + d] = node;
    }
    tree.attach(std::span<const NodeId>(paths_out).subspan(static_cast<std::size_t>(i) * depth, depth));
  }
  return tree;
}

PathAssignment CommunityTree::to_paths(std::span<const NodeId> node_paths, int n_actors) const {
  PathAssignment out(n_actors, depth_);
  std::unordered_map<NodeId, int> label;
  std::vector<int> next(nodes_.size(), 0);
  for (int i = 0; i < n_actors; ++i) {
    auto path = out.path(i);
    for (int d = 0; d < depth_; ++d) {
      const NodeId n = node_paths[static_cast<std::size_t>(i) * depth_ + d];
      auto [it, inserted] = label.try_emplace(n, 0);
      if (inserted) it->second = ++next[nodes_[n].parent];
      path[d] = it->second;
    }
  }
  return out;
}

}  // namespace hmmsb
