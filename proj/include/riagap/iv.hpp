#pragma once

#include "riagap/population.hpp"

namespace riagap {

/// Binary-instrument estimands. A is the instrument, M the treatment it
/// encourages, and Y_{M=m} the outcome under treatment m.
struct IvEffectSet {
  double ate = 0.0;             // E(Y_{M=1} - Y_{M=0})
  double late = 0.0;            // same, among compliers (M_1 = 1, M_0 = 0); NaN without compliers
  double wald = 0.0;            // [E(Y | A=1) - E(Y | A=0)] / [E(M | A=1) - E(M | A=0)]
  double complier_share = 0.0;  // P(M_1 = 1, M_0 = 0)
  double first_stage = 0.0;     // E(M_1 - M_0)
  double selection_cov = 0.0;   // Cov(M_1 - M_0, Y_{M=1} - Y_{M=0})
  bool monotonic = true;        // no defiers
};

/// True when every unit's outcome table is identical across instrument arms.
bool respects_exclusion(const Population& pop);

/// Requires binary M, a single C stratum, and exclusion; throws
/// std::domain_error on a zero first stage (relevance violation).
IvEffectSet iv_oracle(const Population& pop);

}  // namespace riagap
