#include "hmmsb/generative.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "hmmsb/special.hpp"

namespace hmmsb {

MembershipVector membership_from_sticks(std::vector<double> sticks) {
  MembershipVector mv;
  mv.theta.resize(sticks.size());
  double remaining = 1.0;
  double total = 0.0;
  for (std::size_t k = 0; k < sticks.size(); ++k) {
    mv.theta[k] = sticks[k] * remaining;
    remaining *= 1.0 - sticks[k];
    total += mv.theta[k];
  }
  if (total > 0.0) {
    for (double& t : mv.theta) t /= total;
  } else if (!mv.theta.empty()) {
    // Every stick fraction was zero: put all mass on the deepest level.
    mv.theta.back() = 1.0;
  }
  mv.sticks = std::move(sticks);
  return mv;
}

MembershipVector sample_gem(const Hyperparams& hyper, Rng& rng) {
  std::vector<double> sticks(static_cast<std::size_t>(hyper.max_depth));
  for (double& v : sticks) v = rng.beta(hyper.stick_a(), hyper.stick_b());
  return membership_from_sticks(std::move(sticks));
}

// ---------------------------------------------------------------------------

namespace {

NcrpConditional conditional_over(const PathAssignment& paths, int n_actors,
                                 std::span<const int> prefix, double gamma, int excluded) {
  std::map<int, int> counts;
  int total = 0;
  const std::size_t len = prefix.size();
  for (int i = 0; i < n_actors; ++i) {
    if (i == excluded) continue;
    auto p = paths.path(i);
    if (!std::equal(prefix.begin(), prefix.end(), p.begin())) continue;
    counts[p[len]]++;
    ++total;
  }
  NcrpConditional out;
  out.prefix_count = total;
  const double denom = static_cast<double>(total) + gamma;
  for (const auto& [label, c] : counts) {
    out.labels.push_back(label);
    out.probabilities.push_back(static_cast<double>(c) / denom);
  }
  int fresh = 1;
  while (counts.count(fresh)) ++fresh;
  out.fresh_label = fresh;
  out.fresh_probability = gamma / denom;
  return out;
}

}  // namespace

NcrpConditional ncrp_conditional(const PathAssignment& paths, std::span<const int> prefix,
                                 double gamma, int excluded_actor) {
  if (static_cast<int>(prefix.size()) >= paths.depth()) {
    throw UsageError("prefix must be shorter than the path depth");
  }
  return conditional_over(paths, paths.size(), prefix, gamma, excluded_actor);
}

std::vector<int> sample_ncrp_path(const PathAssignment& existing, int n_existing,
                                  const Hyperparams& hyper, Rng& rng) {
  std::vector<int> path;
  path.reserve(static_cast<std::size_t>(hyper.max_depth));
  std::vector<double> weights;
  for (int d = 0; d < hyper.max_depth; ++d) {
    auto cond = conditional_over(existing, n_existing, path, hyper.gamma, -1);
    weights = cond.probabilities;
    weights.push_back(cond.fresh_probability);
    const std::size_t pick = rng.categorical(weights);
    path.push_back(pick < cond.labels.size() ? cond.labels[pick] : cond.fresh_label);
  }
  return path;
}

PathAssignment sample_ncrp_paths(int n_actors, const Hyperparams& hyper, Rng& rng) {
  CommunityTree tree(hyper.max_depth);
  std::vector<NodeId> nodes(static_cast<std::size_t>(n_actors) * hyper.max_depth);
  for (int i = 0; i < n_actors; ++i) {
    sample_ncrp_nodes(tree,
                      std::span<NodeId>(nodes).subspan(static_cast<std::size_t>(i) * hyper.max_depth,
                                                       hyper.max_depth),
                      hyper.gamma, rng);
  }
  return tree.to_paths(nodes, n_actors);
}

void sample_ncrp_nodes(CommunityTree& tree, std::span<NodeId> path_out, double gamma, Rng& rng) {
  NodeId node = kRootNode;
  std::vector<double> weights;
  std::vector<NodeId> options;
  for (int d = 0; d < tree.depth(); ++d) {
    weights.clear();
    options.clear();
    tree.for_each_occupied_child(node, [&](NodeId c) {
      options.push_back(c);
      weights.push_back(static_cast<double>(tree.count(c)));
    });
    weights.push_back(gamma);
    const std::size_t pick = rng.categorical(weights);
    node = pick < options.size() ? options[pick] : tree.add_child(node);
    path_out[static_cast<std::size_t>(d)] = node;
  }
  tree.attach(path_out);
}

// ---------------------------------------------------------------------------

LevelCountPrior::LevelCountPrior(const Hyperparams& hyper, int n_indicators)
    : n_(n_indicators), depth_(hyper.max_depth), a_(hyper.stick_a()), b_(hyper.stick_b()) {
  if (n_indicators < 0) throw UsageError("negative indicator count");
  const std::size_t size = static_cast<std::size_t>(n_) + 1;
  lg_a_.resize(size);
  lg_b_.resize(size);
  lg_ab_.resize(size);
  lg_fact_.resize(size);
  for (std::size_t t = 0; t < size; ++t) {
    const double td = static_cast<double>(t);
    lg_a_[t] = std::lgamma(a_ + td);
    lg_b_[t] = std::lgamma(b_ + td);
    lg_ab_[t] = std::lgamma(a_ + b_ + td);
    lg_fact_[t] = std::lgamma(td + 1.0);
  }

  log_w_.assign(static_cast<std::size_t>(depth_), std::vector<double>(size));
  for (std::size_t r = 0; r < size; ++r) {
    log_w_[depth_ - 1][r] = log_stick_term(static_cast<int>(r), 0);
  }
  std::vector<double> terms;
  for (int j = depth_ - 2; j >= 0; --j) {
    for (std::size_t r = 0; r < size; ++r) {
      terms.resize(r + 1);
      for (std::size_t t = 0; t <= r; ++t) {
        terms[t] = lg_fact_[r] - lg_fact_[t] - lg_fact_[r - t] +
                   log_stick_term(static_cast<int>(t), static_cast<int>(r - t)) +
                   log_w_[j + 1][r - t];
      }
      log_w_[j][r] = log_sum_exp(terms);
    }
  }

  if (depth_ >= 2) {
    std::vector<double> logw;
    count_log_weights(0, n_, logw);
    const double top = *std::max_element(logw.begin(), logw.end());
    first_cdf_.resize(logw.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < logw.size(); ++t) {
      acc += std::exp(logw[t] - top);
      first_cdf_[t] = acc;
    }
    for (double& c : first_cdf_) c /= acc;
  }
}

void LevelCountPrior::count_log_weights(int j, int remaining, std::vector<double>& out) const {
  const auto r = static_cast<std::size_t>(remaining);
  out.resize(r + 1);
  for (std::size_t t = 0; t <= r; ++t) {
    out[t] = lg_fact_[r] - lg_fact_[t] - lg_fact_[r - t] +
             log_stick_term(static_cast<int>(t), static_cast<int>(r - t)) + log_w_[j + 1][r - t];
  }
}

double LevelCountPrior::log_stick_term(int at_level, int beyond) const {
  // log E[V^at (1 - V)^beyond] for V ~ Beta(a, b)
  return lg_a_[at_level] + lg_b_[beyond] - lg_ab_[at_level + beyond] -
         (lg_a_[0] + lg_b_[0] - lg_ab_[0]);
}

double LevelCountPrior::log_sequence_probability(std::span<const int> counts) const {
  if (static_cast<int>(counts.size()) != depth_) throw UsageError("count vector length differs from K");
  int beyond = std::accumulate(counts.begin(), counts.end(), 0);
  if (beyond != n_) throw UsageError("counts do not sum to the indicator total");
  double lp = 0.0;
  for (int k = 0; k < depth_; ++k) {
    beyond -= counts[k];
    lp += log_stick_term(counts[k], beyond);
  }
  return lp - log_normalizer();
}

std::vector<int> LevelCountPrior::sample_counts(Rng& rng) const {
  std::vector<int> counts(static_cast<std::size_t>(depth_), 0);
  int remaining = n_;
  std::vector<double> logw;
  for (int j = 0; j + 1 < depth_; ++j) {
    std::size_t t;
    if (j == 0) {
      const double u = rng.uniform();
      t = std::min<std::size_t>(std::upper_bound(first_cdf_.begin(), first_cdf_.end(), u) - first_cdf_.begin(),
                                first_cdf_.size() - 1);
    } else {
      count_log_weights(j, remaining, logw);
      t = rng.log_categorical(logw);
      if (t >= logw.size()) throw InternalFault("level count prior has no mass");
    }
    counts[j] = static_cast<int>(t);
    remaining -= static_cast<int>(t);
  }
  counts[depth_ - 1] = remaining;
  return counts;
}

void arrange_levels(std::span<const int> counts, std::vector<std::uint8_t>& slots, Rng& rng) {
  const int total = std::accumulate(counts.begin(), counts.end(), 0);
  const auto major = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  const auto major_level = static_cast<std::uint8_t>(major + 1);
  slots.assign(static_cast<std::size_t>(total), major_level);
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (k == major) continue;
    for (int placed = 0; placed < counts[k];) {
      auto& slot = slots[rng.below(slots.size())];
      if (slot != major_level) continue;
      slot = static_cast<std::uint8_t>(k + 1);
      ++placed;
    }
  }
}

LevelAssignments sample_prior_levels(int n_actors, const Hyperparams& hyper, Rng& rng) {
  LevelAssignments levels(n_actors);
  if (n_actors < 2) return levels;
  const LevelCountPrior prior(hyper, 2 * (n_actors - 1));
  std::vector<std::uint8_t> slots;
  for (int a = 0; a < n_actors; ++a) {
    arrange_levels(prior.sample_counts(rng), slots, rng);
    std::size_t s = 0;
    for (int j = 0; j < n_actors; ++j) {
      if (j != a) levels.set_donor(a, j, slots[s++]);
    }
    for (int j = 0; j < n_actors; ++j) {
      if (j != a) levels.set_receiver(j, a, slots[s++]);
    }
  }
  return levels;
}

// ---------------------------------------------------------------------------

BRegime regime_preset(int regime) {
  switch (regime) {
    case 1: return {{0.4, 0.8}, {0.02, 0.02}};
    case 2: return {{0.3, 0.6}, {0.1, 0.1}};
    case 3: return {{0.02, 0.02}, {0.4, 0.8}};
    case 4: return {{0.1, 0.1}, {0.3, 0.6}};
    default: throw UsageError("regime must be 1..4");
  }
}

void SimulationConfig::validate() const {
  hyper.validate();
  if (n_actors < 1) throw UsageError("simulation needs at least one actor");
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (fixed_theta) {
    if (static_cast<int>(fixed_theta->size()) != hyper.max_depth) {
      throw UsageError("fixed theta must have K entries");
    }
    double total = 0.0;
    for (double v : *fixed_theta) {
      if (!in_unit(v)) throw UsageError("fixed theta entries must lie in [0, 1]");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) throw UsageError("fixed theta must sum to 1");
  }
  if (fixed_b) {
    if (static_cast<int>(fixed_b->on_diagonal.size()) != hyper.max_depth ||
        static_cast<int>(fixed_b->off_diagonal.size()) != hyper.max_depth) {
      throw UsageError("fixed B regime must have K on- and off-diagonal entries");
    }
    for (double v : fixed_b->on_diagonal) {
      if (!in_unit(v)) throw UsageError("B entries must lie in [0, 1]");
    }
    for (double v : fixed_b->off_diagonal) {
      if (!in_unit(v)) throw UsageError("B entries must lie in [0, 1]");
    }
  }
}

DirectedNetwork sample_edges(const PathAssignment& paths, const LevelAssignments& levels,
                             const Hyperparams& hyper, const std::optional<BRegime>& fixed_b,
                             Rng& rng, std::map<BEntryKey, double>* realized) {
  const int n = paths.size();
  DirectedNetwork net(n);
  std::map<BEntryKey, double> local;
  auto& table = realized ? *realized : local;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      auto key = resolve_sb(paths.path(i), paths.path(j), levels.donor(i, j), levels.receiver(i, j));
      if (!key) continue;
      auto it = table.find(*key);
      if (it == table.end()) {
        double p;
        if (fixed_b) {
          const auto k = static_cast<std::size_t>(key->level() - 1);
          p = key->donor_child == key->receiver_child ? fixed_b->on_diagonal[k]
                                                      : fixed_b->off_diagonal[k];
        } else {
          p = rng.beta(hyper.lambda1, hyper.lambda2);
        }
        it = table.emplace(std::move(*key), p).first;
      }
      if (rng.bernoulli(it->second)) net.set_edge(i, j, true);
    }
  }
  return net;
}

SimulationResult generate_network(const SimulationConfig& config, Rng& rng) {
  config.validate();
  const Hyperparams& hyper = config.hyper;
  const int n = config.n_actors;
  const int depth = hyper.max_depth;

  SimulationResult out;
  out.seed = rng.seed();
  out.truth_paths = sample_ncrp_paths(n, hyper, rng);
  out.levels = LevelAssignments(n);

  auto draw_level = [&](const std::vector<double>& theta) {
    return static_cast<Level>(rng.categorical(theta)) + 1;
  };

  if (config.fixed_theta) {
    MembershipVector mv;
    mv.theta = *config.fixed_theta;
    out.memberships.assign(static_cast<std::size_t>(n), mv);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        out.levels.set_donor(i, j, draw_level(mv.theta));
        out.levels.set_receiver(i, j, draw_level(mv.theta));
      }
    }
  } else if (config.level_model == LevelModel::kRenormalizedTheta) {
    for (int i = 0; i < n; ++i) out.memberships.push_back(sample_gem(hyper, rng));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        out.levels.set_donor(i, j, draw_level(out.memberships[i].theta));
        out.levels.set_receiver(i, j, draw_level(out.memberships[j].theta));
      }
    }
  } else {
    out.levels = sample_prior_levels(n, hyper, rng);
    // theta drawn from the stick posterior given each actor's level counts.
    for (int a = 0; a < n; ++a) {
      std::vector<int> counts(static_cast<std::size_t>(depth), 0);
      for (int j = 0; j < n; ++j) {
        if (j == a) continue;
        counts[out.levels.donor(a, j) - 1]++;
        counts[out.levels.receiver(j, a) - 1]++;
      }
      std::vector<double> sticks(static_cast<std::size_t>(depth));
      int beyond = std::accumulate(counts.begin(), counts.end(), 0);
      for (int k = 0; k < depth; ++k) {
        beyond -= counts[k];
        sticks[k] = rng.beta(hyper.stick_a() + counts[k], hyper.stick_b() + beyond);
      }
      out.memberships.push_back(membership_from_sticks(std::move(sticks)));
    }
  }

  out.network = sample_edges(out.truth_paths, out.levels, hyper, config.fixed_b, rng, &out.realized_b);
  return out;
}

}  // namespace hmmsb
