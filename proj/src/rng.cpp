#include "hmmsb/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hmmsb {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(mix_seed(seed, stream)) {}

Rng Rng::split(std::uint64_t child) const {
  return Rng(mix_seed(seed_, stream_), child);
}

double Rng::uniform() {
  // 53 random bits -> [0, 1)
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::below(std::size_t n) {
  // Lemire's multiply-and-reject; the modulo only runs on the rare slow path.
  if (n <= 1) return 0;
  const std::uint64_t range = n;
  unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(engine_()) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

bool Rng::bernoulli(double p) { return uniform() < p; }

double Rng::gamma(double shape) {
  // Marsaglia-Tsang; shapes below one use the u^(1/a) boost.
  if (shape < 1.0) {
    double u = uniform();
    while (u == 0.0) u = uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  std::normal_distribution<double> normal;
  for (;;) {
    double x, v;
    do {
      x = normal(engine_);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::beta(double a, double b) {
  // Tiny shapes can underflow both gammas.
  const double x = gamma(a);
  const double y = gamma(b);
  if (x + y > 0.0) return x / (x + y);
  return uniform() < a / (a + b) ? 1.0 : 0.0;
}

std::size_t Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) return weights.size();
  double target = uniform() * total;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    target -= weights[k];
    if (target < 0.0) return k;
  }
  // Round-off: return the last positive weight.
  for (std::size_t k = weights.size(); k-- > 0;) {
    if (weights[k] > 0.0) return k;
  }
  return weights.size();
}

std::size_t Rng::log_categorical(std::span<const double> log_weights) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double w : log_weights) hi = std::max(hi, w);
  if (!std::isfinite(hi)) return log_weights.size();
  std::vector<double> w(log_weights.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::exp(log_weights[k] - hi);
  return categorical(w);
}

}  // namespace hmmsb
