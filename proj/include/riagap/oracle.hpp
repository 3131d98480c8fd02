#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "riagap/population.hpp"

namespace riagap {

enum class OracleMode { exact, monte_carlo };

std::string_view to_string(OracleMode m);

struct EffectFields {
  double te = 0.0;
  double nie = 0.0;
  double nde = 0.0;
  double te_r = 0.0;
  double nie_r = 0.0;
  double nde_r = 0.0;
  double nie_organic = 0.0;
  double nde_organic = 0.0;
};

/// Natural effect minus its randomized (or organic) analogue.
struct GapFields {
  double te = 0.0;
  double nie = 0.0;
  double nde = 0.0;
  double nie_organic = 0.0;
  double nde_organic = 0.0;
};

struct EffectSet {
  EffectFields effects;
  EffectFields mc_se;  // zero in exact mode
  GapFields gaps;
  GapFields gap_se;
  OracleMode mode = OracleMode::exact;
  std::size_t n_units = 0;
};

/// Ground truth on a population.
///
/// Exact mode enumerates per stratum f(M_{a'} = m | C) and E(Y_{a,m} | C) and
/// forms E(Y_{a,G_{a'}}) = E_C sum_m E(Y_{a,m} | C) f(M_{a'} = m | C); it needs a
/// finite mediator support. Monte Carlo mode uses the same stratum formula for
/// finite supports, or each unit's independent G draw for a continuous
/// mediator, and reports influence-function standard errors of every field.
/// The default mode is exact for enumerated populations, Monte Carlo otherwise.
EffectSet compute_effects(const Population& pop, std::optional<OracleMode> mode = std::nullopt);

struct NaturalEffects {
  double te;
  double nie;
  double nde;
};
struct RiaEffects {
  double te_r;
  double nie_r;
  double nde_r;
};
struct OrganicEffects {
  double nie_organic;
  double nde_organic;
};

NaturalEffects natural_effects(const Population& pop);
RiaEffects ria_effects(const Population& pop, std::optional<OracleMode> mode = std::nullopt);
OrganicEffects organic_effects(const Population& pop, std::optional<OracleMode> mode = std::nullopt);

enum class CovarianceForm {
  binary_randomized,  // M in {0,1}, no C strata
  general,            // finite M support, finite C strata
  organic,            // gaps against the organic effects
};

/// Right-hand sides of the covariance representations, computed with
/// population (divisor-n) covariances. For `organic`, nie_gap and nde_gap are
/// NIE - NIE^organic and NDE - NDE^organic, and te_gap is 0.
struct CovarianceTerms {
  double te_gap = 0.0;
  double nie_gap = 0.0;
  double nde_gap = 0.0;
};

CovarianceTerms covariance_rhs(const Population& pop, CovarianceForm which);

}  // namespace riagap
