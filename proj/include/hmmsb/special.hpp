#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace hmmsb {

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

/// lgamma(n + offset) for integer n >= 0, memoized. The sampler evaluates
/// these at integer counts shifted by a fixed prior shape.
class LogGammaTable {
 public:
  explicit LogGammaTable(double offset = 0.0) : offset_(offset) {}

  double operator()(std::int64_t n) {
    if (static_cast<std::size_t>(n) >= values_.size()) grow(static_cast<std::size_t>(n));
    return values_[static_cast<std::size_t>(n)];
  }
  double offset() const noexcept { return offset_; }

 private:
  void grow(std::size_t n) {
    std::size_t size = values_.empty() ? 64 : values_.size();
    while (size <= n) size *= 2;
    const std::size_t old = values_.size();
    values_.resize(size);
    for (std::size_t k = old; k < size; ++k) {
      values_[k] = std::lgamma(static_cast<double>(k) + offset_);
    }
  }

  double offset_;
  std::vector<double> values_;
};

/// log of the Beta-Bernoulli marginal of `ones` successes and `zeros`
/// failures: log B(l1 + ones, l2 + zeros) - log B(l1, l2).
inline double log_beta_bernoulli(std::int64_t ones, std::int64_t zeros, double lambda1,
                                 double lambda2) {
  return log_beta(lambda1 + static_cast<double>(ones), lambda2 + static_cast<double>(zeros)) -
         log_beta(lambda1, lambda2);
}

double log_sum_exp(const std::vector<double>& values);

}  // namespace hmmsb
