#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace riagap {

/// Pairwise (cascade) summation with a fixed split, so the result depends only
/// on the sequence, not on how it was produced.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (const double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double mean_of(std::span<const double> xs) {
  return xs.empty() ? 0.0 : pairwise_sum(xs) / static_cast<double>(xs.size());
}

/// Standard error of a mean of i.i.d. terms with population variance (divisor n).
inline double se_of_mean(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean_of(xs);
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - mu) * (xs[i] - mu);
  return std::sqrt(mean_of(sq) / static_cast<double>(xs.size()));
}

}  // namespace riagap
