#pragma once

// Brute-force reference computations for small instances. Everything here is
// written from the model definition directly and shares no code with the
// library beyond its plain data types.

#include <map>
#include <span>
#include <vector>

#include "hmmsb/model.hpp"

namespace oracle {

using hmmsb::DirectedNetwork;
using hmmsb::Hyperparams;
using hmmsb::LevelAssignments;
using hmmsb::PathAssignment;

/// Every nested partition of n actors into a depth-K tree, in canonical
/// (first-visit) labeling.
std::vector<PathAssignment> all_hierarchies(int n, int depth);

/// Probability of drawing `paths` (label for label) when actors are seated one
/// at a time in `order` under the nCRP.
double ncrp_probability(const PathAssignment& paths, double gamma, std::span<const int> order);
double ncrp_probability(const PathAssignment& paths, double gamma);

/// Probability of one actor's indicator sequence under the GEM stick-breaking
/// predictive restricted to levels 1..K (normalized by summing every sequence
/// in {1..K}^n).
double level_sequence_probability(std::span<const int> sequence, const Hyperparams& hyper);

/// Beta-Bernoulli marginal of `ones` successes and `zeros` failures under a
/// Beta(l1, l2) prior, by adaptive quadrature.
double beta_bernoulli_quadrature(int ones, int zeros, double lambda1, double lambda2);

/// Donor levels then receiver levels of one actor, in counterpart order.
std::vector<int> actor_levels(const LevelAssignments& levels, int actor);

/// Joint probability p(E, c, z) with theta and B integrated out.
double joint_probability(const DirectedNetwork& network, const PathAssignment& paths,
                         const LevelAssignments& levels, const Hyperparams& hyper);

/// Exact conditional of one level indicator over 1..K.
std::vector<double> level_conditional(const DirectedNetwork& network, const PathAssignment& paths,
                                      LevelAssignments levels, int i, int j, bool donor,
                                      const Hyperparams& hyper);

/// Exact conditional of an actor's path: canonical assignment -> probability,
/// over every hierarchy that leaves the other actors' nested partition
/// unchanged.
std::map<std::vector<int>, double> path_conditional(const DirectedNetwork& network,
                                                    const PathAssignment& paths,
                                                    const LevelAssignments& levels, int actor,
                                                    const Hyperparams& hyper);

/// Flattened labels of a canonical assignment, used as a map key.
std::vector<int> key_of(const PathAssignment& paths);

/// Exact p(E | hyper) by summing the joint over every hierarchy and every
/// level assignment.
double marginal_likelihood(const DirectedNetwork& network, const Hyperparams& hyper);

/// Independent pair-by-pair F1 at depth k.
double pairwise_f1(const PathAssignment& predicted, const PathAssignment& truth, int k);

}  // namespace oracle
