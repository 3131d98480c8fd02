#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "riagap/oracle.hpp"

namespace riagap {

struct SweepConfig {
  std::vector<double> b_grid;
  std::size_t n_mc = 200000;
  std::uint64_t seed = 0;
  std::string output;

  /// Grid nonempty, finite and strictly increasing; n_mc >= 1.
  void validate() const;
};

struct SweepRow {
  double b = 0.0;
  EffectSet effects;
  /// sign(NIE) != sign(NIE^R) with both beyond 4 Monte Carlo se of zero.
  bool sign_reversal = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  /// Maximal runs of consecutive grid points with a sign reversal.
  std::vector<std::pair<double, double>> reversal_intervals;
};

/// Monte Carlo oracle on fig1_dgp(b) for every grid value. All grid points
/// share the seed, hence the same noise draws.
SweepResult sweep_fig1(const SweepConfig& config);

void write_sweep_csv(const SweepResult& result, std::ostream& out);

/// n evenly spaced points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t n);
/// "lo:hi:n" or a comma-separated list.
std::vector<double> parse_grid(const std::string& text);

}  // namespace riagap
