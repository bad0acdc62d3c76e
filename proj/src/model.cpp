#include "hmmsb/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace hmmsb {

void Hyperparams::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(gamma)) throw UsageError("gamma must be > 0");
  if (!positive(pi)) throw UsageError("pi must be > 0");
  if (!positive(lambda1)) throw UsageError("lambda1 must be > 0");
  if (!positive(lambda2)) throw UsageError("lambda2 must be > 0");
  if (!(m > 0.0 && m < 1.0)) throw UsageError("m must lie in (0, 1)");
  if (max_depth < 1 || max_depth > 255) throw UsageError("K must lie in [1, 255]");
}

// ---------------------------------------------------------------------------

DirectedNetwork::DirectedNetwork(int n_actors) : n_(n_actors) {
  if (n_actors < 0) throw UsageError("negative actor count");
  adj_.assign(static_cast<std::size_t>(n_) * n_, 0);
}

void DirectedNetwork::set_edge(int src, int dst, bool present) {
  if (src < 0 || dst < 0 || src >= n_ || dst >= n_) {
    throw UsageError("actor id out of range");
  }
  if (src == dst) throw UsageError("self-edges are not part of the model");
  adj_[static_cast<std::size_t>(src) * n_ + dst] = present ? 1 : 0;
}

std::size_t DirectedNetwork::edge_count() const noexcept {
  return static_cast<std::size_t>(std::count(adj_.begin(), adj_.end(), std::uint8_t{1}));
}

void DirectedNetwork::set_labels(std::vector<std::string> labels) {
  if (!labels.empty() && static_cast<int>(labels.size()) != n_) {
    throw UsageError("label count does not match actor count");
  }
  labels_ = std::move(labels);
}

DirectedNetwork DirectedNetwork::induced(std::span<const int> actors) const {
  DirectedNetwork sub(static_cast<int>(actors.size()));
  for (std::size_t a = 0; a < actors.size(); ++a) {
    for (std::size_t b = 0; b < actors.size(); ++b) {
      if (a != b && edge(actors[a], actors[b])) {
        sub.set_edge(static_cast<int>(a), static_cast<int>(b), true);
      }
    }
  }
  if (!labels_.empty()) {
    std::vector<std::string> sub_labels;
    for (int a : actors) sub_labels.push_back(labels_[a]);
    sub.set_labels(std::move(sub_labels));
  }
  return sub;
}

// ---------------------------------------------------------------------------

PathAssignment::PathAssignment(int n_actors, int depth) : n_(n_actors), depth_(depth) {
  if (n_actors < 0 || depth < 1) throw UsageError("invalid path assignment shape");
  labels_.assign(static_cast<std::size_t>(n_) * depth_, 1);
}

void PathAssignment::set_path(int actor, std::span<const int> path) {
  if (static_cast<int>(path.size()) != depth_) throw UsageError("path length differs from K");
  std::copy(path.begin(), path.end(), this->path(actor).begin());
}

bool PathAssignment::shares_prefix(int a, int b, int length) const {
  auto pa = path(a);
  auto pb = path(b);
  return std::equal(pa.begin(), pa.begin() + length, pb.begin());
}

void PathAssignment::canonicalize() {
  // Map (canonical parent id, old label) -> canonical child id; the canonical
  // label of a child is its rank among its parent's children in visit order.
  std::map<std::pair<int, int>, std::pair<int, int>> seen;  // -> (node id, label)
  std::vector<int> child_count{0};
  for (int i = 0; i < n_; ++i) {
    int node = 0;
    for (int d = 0; d < depth_; ++d) {
      int& label = labels_[static_cast<std::size_t>(i) * depth_ + d];
      auto [it, inserted] = seen.try_emplace({node, label});
      if (inserted) {
        const int id = static_cast<int>(child_count.size());
        child_count.push_back(0);
        it->second = {id, ++child_count[node]};
      }
      node = it->second.first;
      label = it->second.second;
    }
  }
}

PathAssignment PathAssignment::canonical() const {
  PathAssignment copy = *this;
  copy.canonicalize();
  return copy;
}

bool PathAssignment::is_canonical() const { return canonical() == *this; }

void PathAssignment::validate() const {
  for (int v : labels_) {
    if (v < 1) throw InputError("path labels must be positive integers");
  }
}

PathAssignment PathAssignment::restricted(std::span<const int> actors) const {
  PathAssignment sub(static_cast<int>(actors.size()), depth_);
  for (std::size_t a = 0; a < actors.size(); ++a) {
    sub.set_path(static_cast<int>(a), path(actors[a]));
  }
  return sub;
}

// ---------------------------------------------------------------------------

HierarchyTree HierarchyTree::build(const PathAssignment& paths) {
  HierarchyTree tree;
  tree.nodes_.push_back(Node{});
  std::vector<std::map<int, std::size_t>> child_index(1);
  for (int i = 0; i < paths.size(); ++i) {
    std::size_t node = 0;
    tree.nodes_[0].occupancy++;
    tree.nodes_[0].actors.push_back(i);
    auto path = paths.path(i);
    for (int d = 0; d < paths.depth(); ++d) {
      auto [it, inserted] = child_index[node].try_emplace(path[d], tree.nodes_.size());
      if (inserted) {
        Node child;
        child.prefix.assign(path.begin(), path.begin() + d + 1);
        tree.nodes_.push_back(std::move(child));
        child_index.emplace_back();
      }
      node = it->second;
      tree.nodes_[node].occupancy++;
      tree.nodes_[node].actors.push_back(i);
    }
  }
  for (std::size_t n = 0; n < tree.nodes_.size(); ++n) {
    for (const auto& [label, child] : child_index[n]) tree.nodes_[n].children.push_back(child);
  }
  return tree;
}

std::optional<std::size_t> HierarchyTree::find(std::span<const int> prefix) const {
  std::size_t node = 0;
  for (int label : prefix) {
    const auto& kids = nodes_[node].children;
    auto it = std::find_if(kids.begin(), kids.end(), [&](std::size_t c) {
      return nodes_[c].prefix.back() == label;
    });
    if (it == kids.end()) return std::nullopt;
    node = *it;
  }
  return node;
}

int HierarchyTree::branch_count(std::size_t node, int min_size) const {
  int count = 0;
  for (std::size_t c : nodes_[node].children) {
    if (nodes_[c].occupancy >= min_size) ++count;
  }
  return count;
}

// ---------------------------------------------------------------------------

LevelAssignments::LevelAssignments(int n_actors) : n_(n_actors) {
  if (n_actors < 0) throw UsageError("negative actor count");
  donor_.assign(static_cast<std::size_t>(n_) * n_, 1);
  receiver_.assign(static_cast<std::size_t>(n_) * n_, 1);
}

void LevelAssignments::set_donor(int i, int j, Level z) {
  if (z < 1 || z > 255) throw UsageError("level out of range");
  donor_[index(i, j)] = static_cast<std::uint8_t>(z);
}

void LevelAssignments::set_receiver(int i, int j, Level z) {
  if (z < 1 || z > 255) throw UsageError("level out of range");
  receiver_[index(i, j)] = static_cast<std::uint8_t>(z);
}

Level LevelAssignments::max_level() const noexcept {
  Level hi = 0;
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (i != j) hi = std::max({hi, donor(i, j), receiver(i, j)});
    }
  }
  return hi;
}

LevelAssignments LevelAssignments::restricted(std::span<const int> actors) const {
  LevelAssignments sub(static_cast<int>(actors.size()));
  for (std::size_t a = 0; a < actors.size(); ++a) {
    for (std::size_t b = 0; b < actors.size(); ++b) {
      if (a == b) continue;
      sub.set_donor(static_cast<int>(a), static_cast<int>(b), donor(actors[a], actors[b]));
      sub.set_receiver(static_cast<int>(a), static_cast<int>(b), receiver(actors[a], actors[b]));
    }
  }
  return sub;
}

// ---------------------------------------------------------------------------

std::size_t BEntryKeyHash::operator()(const BEntryKey& key) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::size_t v) { h = (h ^ v) * 0x100000001b3ULL; };
  for (int v : key.parent) mix(static_cast<std::size_t>(v));
  mix(0x9e37U);
  mix(static_cast<std::size_t>(key.donor_child));
  mix(static_cast<std::size_t>(key.receiver_child));
  return h;
}

std::optional<BEntryKey> resolve_sb(std::span<const int> donor_path,
                                    std::span<const int> receiver_path, Level z_donor,
                                    Level z_receiver) {
  const Level coarse = std::min(z_donor, z_receiver);
  if (coarse < 1 || static_cast<std::size_t>(std::max(z_donor, z_receiver)) > donor_path.size() ||
      static_cast<std::size_t>(std::max(z_donor, z_receiver)) > receiver_path.size()) {
    throw UsageError("path shorter than interaction level");
  }
  const std::size_t shared = static_cast<std::size_t>(coarse) - 1;
  if (!std::equal(donor_path.begin(), donor_path.begin() + shared, receiver_path.begin())) {
    return std::nullopt;
  }
  BEntryKey key;
  key.parent.assign(donor_path.begin(), donor_path.begin() + shared);
  key.donor_child = donor_path[shared];
  key.receiver_child = receiver_path[shared];
  return key;
}

double point_estimate(const EdgeCounts& counts, const Hyperparams& hyper) {
  return (static_cast<double>(counts.ones) + hyper.lambda1) /
         (static_cast<double>(counts.total()) + hyper.lambda1 + hyper.lambda2);
}

CompatibilityStats recount(const DirectedNetwork& network, const PathAssignment& paths,
                           const LevelAssignments& levels) {
  CompatibilityStats stats;
  const int n = network.size();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      auto key = resolve_sb(paths.path(i), paths.path(j), levels.donor(i, j), levels.receiver(i, j));
      if (key) stats.add(*key, network.edge(i, j));
    }
  }
  return stats;
}

PairCensus pair_census(const DirectedNetwork& network, const PathAssignment& paths,
                       const LevelAssignments& levels) {
  PairCensus census;
  const int n = network.size();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (resolve_sb(paths.path(i), paths.path(j), levels.donor(i, j), levels.receiver(i, j))) {
        ++census.compatible;
      } else {
        ++census.incompatible;
        if (network.edge(i, j)) ++census.incompatible_edges;
      }
    }
  }
  return census;
}

}  // namespace hmmsb
