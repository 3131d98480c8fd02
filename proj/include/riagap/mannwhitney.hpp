#pragma once

#include <optional>

#include "riagap/population.hpp"

namespace riagap {

struct MwEffectSet {
  double natural = 0.0;  // E[1(Y_1 >= Y_0)]
  double ria = 0.0;      // E[1(H_1 >= H_0)], H_a independent draws from the law of Y_a
  double gap = 0.0;      // natural - ria
  /// sum_t sum_s 1(t >= s) Cov[1(Y_1 = t), 1(Y_0 = s)]
  double cov_sum = 0.0;
  /// Cov(Y_1, Y_0) when both supports lie in {0, 1}.
  std::optional<double> binary_cov;
};

/// Y_a is the unit's factual outcome under a, Y_{a, M_a}. Requires a finite
/// outcome support (at most kMaxSupportCells joint cells).
MwEffectSet mw_oracle(const Population& pop);

inline constexpr std::size_t kMaxSupportCells = 1000000;

}  // namespace riagap
