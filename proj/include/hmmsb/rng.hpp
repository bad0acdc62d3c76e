#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace hmmsb {

/// Seeded random stream. `split(k)` derives an independent child stream, so
/// parallel units (chains, grid cells, splits) stay reproducible regardless of
/// scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  Rng split(std::uint64_t child) const;

  double uniform();
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n);
  bool bernoulli(double p);
  double gamma(double shape);
  double beta(double a, double b);

  /// Index drawn proportionally to nonnegative `weights`. Returns
  /// `weights.size()` if every weight is zero.
  std::size_t categorical(std::span<const double> weights);
  /// Same, over log-weights (max-subtracted). Returns `size()` if all are -inf.
  std::size_t log_categorical(std::span<const double> log_weights);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer, used for seed derivation.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace hmmsb
