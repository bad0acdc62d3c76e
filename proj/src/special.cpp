#include "hmmsb/special.hpp"

#include <algorithm>
#include <limits>

namespace hmmsb {

double log_sum_exp(const std::vector<double>& values) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : values) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - hi);
  return hi + std::log(sum);
}

}  // namespace hmmsb
