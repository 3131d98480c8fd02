#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "riagap/oracle.hpp"
#include "riagap/scm.hpp"

namespace riagap {

enum class Proposition {
  binary_covariance,
  general_covariance,
  organic_covariance,
  linear_closed_form,
  structural_null,
  iv_bridge,
  mann_whitney,
  crossworld_collapse,
};

std::string_view to_string(Proposition p);
Proposition proposition_from_string(std::string_view s);

enum class ToleranceUnit { absolute, mc_se };

struct SpecResult {
  std::uint64_t seed = 0;
  double violation = 0.0;      // in the report's tolerance unit
  double abs_violation = 0.0;  // |lhs - rhs|, largest over the checked equations
  bool pass = true;
  /// |TE - TE^R| <= |NIE - NIE^R| + |NDE - NDE^R| on this population.
  bool triangle_ok = true;
  std::string note;
};

struct IdentityReport {
  Proposition proposition = Proposition::binary_covariance;
  std::size_t n_specs = 0;
  double max_violation = 0.0;
  double tolerance = 0.0;
  ToleranceUnit unit = ToleranceUnit::absolute;
  std::vector<SpecResult> specs;

  std::size_t failures() const;
  std::size_t triangle_failures() const;
  bool pass() const { return failures() == 0 && max_violation <= tolerance; }
};

inline constexpr double kExactTolerance = 1e-10;
inline constexpr double kMcSeMultiple = 4.0;
/// Absolute floor for Monte Carlo comparisons whose gap and se are both
/// rounding-level (exactly null constructions).
inline constexpr double kRoundingFloor = 1e-12;

// Random model generators; all deterministic in the seed.

struct RandomDiscreteOptions {
  std::size_t min_m = 2;
  std::size_t max_m = 4;
  std::size_t max_strata = 3;
  std::size_t max_y_support = 5;
  std::size_t max_types = 8;
};

DiscreteScm random_discrete_scm(std::uint64_t seed, const RandomDiscreteOptions& opt = {});
/// Cross-world independent by construction (product of mediator and outcome components).
DiscreteScm random_independent_scm(std::uint64_t seed, const RandomDiscreteOptions& opt = {});

enum class LinearSlice { none, beta3_zero, gamma7_zero };
/// Coefficients in [-2, 2], variances in [0.25, 2].
ParametricScm random_linear_scm(std::uint64_t seed, LinearSlice slice = LinearSlice::none);
Prop5Inner random_prop5_inner(std::uint64_t seed, Prop5Kind kind);

/// Exclusion-respecting IV population with random (possibly defier) types.
DiscreteScm random_iv_scm(std::uint64_t seed, bool monotone);
/// Random joint law of (Y_1, Y_0) with |support| <= max_support, carried by a
/// model with a degenerate mediator.
DiscreteScm random_outcome_pair_scm(std::uint64_t seed, std::size_t max_support = 5);

// Individual checks.

IdentityReport check_prop4(const ParametricScm& spec, std::size_t n_mc, std::uint64_t seed);

struct EquivalenceGap {
  double gap = 0.0;
  double se = 0.0;
  bool unit_condition = true;         // per-unit constancy in m
  double max_condition_excess = 0.0;  // beyond the rounding bound
  EffectSet effects;
};

/// Gap and per-unit constancy condition for the NIE (nie_null) or NDE
/// (nde_null) equivalence on any parametric model.
EquivalenceGap equivalence_gap(const ParametricScm& spec, Prop5Kind target, std::size_t n_mc,
                               std::uint64_t seed);

IdentityReport check_prop5(Prop5Kind kind, const Prop5Inner& inner, std::size_t n_mc, std::uint64_t seed);

IdentityReport check_crossworld_collapse(const DiscreteScm& spec);

/// Runs `prop` over n_specs random models with seeds base_seed, base_seed+1, ...
/// n_mc applies to the Monte Carlo checks (linear closed form, structural null).
IdentityReport run_identity_suite(Proposition prop, std::size_t n_specs, std::uint64_t base_seed,
                                  std::size_t n_mc = 1000000);

}  // namespace riagap
